import numpy as np
import pytest

from iontrap.frames import TrapLaserParams
from iontrap.noiselab import (
    ExperimentResult,
    FitError,
    NoiseModel,
    error_budget,
    fit_gate_fidelity,
    fit_rabi,
    fit_sinusoid,
    heating_budget,
    nbar_to_ratio,
    rabi_experiment,
    ramsey_experiment,
    residual_stark_check,
    sample_noise_trajectory,
    sideband_clear,
    sideband_pi_probabilities,
    sideband_ramsey_oscillation,
    stark_scan,
    thermometry,
)
from iontrap.sequencer import ExecutionContext
from iontrap.stark import stark_delta

TWO_PI = 2 * np.pi


# Noise model


def test_noise_validation():
    with pytest.raises(ValueError):
        NoiseModel(laser_linewidth_equiv=-1.0)
    with pytest.raises(ValueError):
        sample_noise_trajectory(NoiseModel(), 0.0)


def test_zero_noise_trajectory():
    tr = sample_noise_trajectory(NoiseModel(), 1e-3, n_points=11, n=3, rng_seed=0)
    assert np.all(tr.detuning == 0) and np.all(tr.phase == 0) and np.all(tr.intensity == 1)
    assert NoiseModel().is_null


def test_walk_matches_closed_form_variance():
    m = NoiseModel.reference()
    d = m.diffusion
    tr = sample_noise_trajectory(m, 1e-3, n_points=5, n=40000, rng_seed=1)
    t = tr.times[1:]
    eps, phi = tr.detuning[:, 1:], tr.phase[:, 1:]
    assert np.allclose(eps.var(axis=0), d * t, rtol=0.05)
    assert np.allclose(phi.var(axis=0), d * t**3 / 3, rtol=0.05)
    assert np.allclose(np.mean(eps * phi, axis=0), d * t**2 / 2, rtol=0.05)
    # The ensemble Ramsey contrast follows from the phase variance.
    assert np.allclose(np.abs(np.mean(np.exp(1j * phi), axis=0)), m.ramsey_contrast(t), atol=0.01)


def test_diffusion_anchor_and_scaling():
    m = NoiseModel.reference()
    assert m.coherence_time == pytest.approx(660e-6)
    doubled = NoiseModel(laser_linewidth_equiv=2 * m.laser_linewidth_equiv)
    assert doubled.diffusion == pytest.approx(4 * m.diffusion)
    assert NoiseModel().coherence_time == float("inf")


def test_intensity_bounds():
    m = NoiseModel(intensity_fast_pp=1e-3, intensity_slow_pp=1e-2)
    tr = sample_noise_trajectory(m, 1e-4, n_points=50, n=500, rng_seed=2)
    assert np.all(np.abs(tr.intensity - 1) <= 0.5 * (1e-3 + 1e-2))
    assert np.std(tr.intensity[:, 0]) > 1e-3


def test_pulse_noise_piecewise_constant():
    m = NoiseModel.reference()
    rng = np.random.default_rng(0)
    pn = m.sample_pulses(np.array([0.0, 1e-4, 3e-4]), np.array([1e-4, 2e-4, 1e-5]), 4, rng)
    assert pn.detuning.shape == pn.phase.shape == pn.scale.shape == (4, 3)
    assert np.all(pn.detuning[:, 0] == 0)
    assert np.all(np.abs(pn.scale**2 - 1) <= 0.5 * (1e-3 + 1e-2) + 1e-15)


# Rabi


def test_rabi_noiseless(ref):
    t = np.arange(0, 400e-6, 5e-6)
    res = rabi_experiment(t)
    assert res.params["contrast"] == pytest.approx(1.0, abs=1e-3)
    assert res.params["frequency"] == pytest.approx(ref.sideband_rabi / TWO_PI, rel=0.02)


def test_rabi_thermal_reduces_contrast():
    t = np.arange(0, 400e-6, 5e-6)
    res = rabi_experiment(t, nbar=0.1)
    assert res.params["contrast"] < 0.995


def test_rabi_fit_recovers_synthetic_parameters():
    f0, c0 = 46.7e3, 0.976
    t = np.linspace(0, 100e-6, 101)
    hits = {"contrast": 0, "frequency": 0}
    n = 40
    for seed in range(n):
        rng = np.random.default_rng(seed)
        y = 0.5 * c0 * (1 - np.exp(-2e3 * t) * np.cos(TWO_PI * f0 * t)) + rng.normal(0, 0.02, t.size)
        p, e, _ = fit_rabi(t, y)
        for k, v in (("contrast", c0), ("frequency", f0)):
            hits[k] += abs(p[k] - v) <= e[k]
    # Calibrated one-sigma errors cover the truth about 68% of the time.
    for k in hits:
        assert 0.5 <= hits[k] / n <= 0.85


def test_fit_sinusoid_and_failure():
    x = np.linspace(0, 1, 50)
    p, _, r = fit_sinusoid(x, 0.3 + 0.2 * np.cos(TWO_PI * 3.2 * x + 0.4))
    assert p["frequency"] == pytest.approx(3.2, rel=1e-6)
    assert p["amplitude"] == pytest.approx(0.2, rel=1e-6)
    assert np.abs(r).max() < 1e-8
    with pytest.raises(FitError):
        fit_sinusoid(x[:2], x[:2])


def test_experiment_result_csv():
    res = ExperimentResult("demo", np.array([1.0, 2.0]), np.array([0.1, 0.2]), None, {"b": 1.5}, {"b": 0.1},
                           np.array([0.0, 0.0]), ("x", "y", "stderr"))
    text = res.to_csv("hello")
    lines = text.splitlines()
    assert lines[0] == "# hello" and lines[1] == "x,y,stderr" and lines[2].startswith("1,0.1,")
    assert "# b = 1.5 +- 0.1" in text


# Ramsey


def test_ramsey_noiseless():
    res = ramsey_experiment(np.linspace(0, 1e-3, 6), "carrier")
    assert np.allclose(res.y, 1.0, atol=1e-9)
    assert res.params["T2"] == float("inf")


@pytest.fixture(scope="module")
def ramsey_pair():
    delays = np.linspace(0, 1.2e-3, 9)
    m = NoiseModel.reference()
    return (ramsey_experiment(delays, "carrier", noise=m, n_trajectories=200, seed=1),
            ramsey_experiment(delays, "blue_sideband", noise=m, n_trajectories=200, seed=2))


def test_ramsey_calibrated_coherence(ramsey_pair):
    carrier, sideband = ramsey_pair
    assert carrier.params["T2"] == pytest.approx(660e-6, rel=0.15)
    assert 500e-6 <= sideband.params["T2"] <= 750e-6
    assert sideband.params["T2"] == pytest.approx(carrier.params["T2"], rel=0.2)


# Stark scans


@pytest.fixture(scope="module")
def scan():
    return stark_scan(np.round(np.arange(1.05, 1.96, 0.1), 2))


def test_stark_scan_recovers_offset(scan, ref):
    b, sb = scan.params["b"], scan.errors["b"]
    assert abs(b - (-ref.Delta0)) <= 2 * sb
    assert scan.params["A"] == pytest.approx(ref.Omega**2 / (2 * ref.omega_sec))


def test_stark_shift_at_105(scan):
    assert scan.y[0] == pytest.approx(TWO_PI * 5.50e3, rel=0.10)


def test_stark_drive_free_limit():
    p = TrapLaserParams.from_hz(1.32e6, 0.0616, 5e3, 500.0)
    res = stark_scan([1.5], np.linspace(0, 4.8e-3, 41), context=p, t_fixed=5e-3)
    assert res.y[0] == pytest.approx(abs(stark_delta(1.5 * p.omega_sec, p.Omega, p.Delta0)), rel=0.02)
    assert res.y[0] == pytest.approx(abs(p.Delta0), rel=0.02)


def test_sideband_exclusion():
    assert list(sideband_clear([0.8, 1.0, 1.03, 1.05, 1.98, 2.0])) == [True, False, False, True, False, False]


def test_stark_scan_too_long_pulse(ref):
    with pytest.raises(ValueError):
        stark_scan([1.5], [0.0, 1e-3])


# Residual Stark shift


def test_residual_calibrated_flat(ref):
    ctx = ExecutionContext(ref, "physical").calibrated()
    res = residual_stark_check(np.linspace(0, 1e-3, 11), ctx)
    assert abs(res.params["offset"]) < TWO_PI * 1.0


def test_residual_injected_error(ref):
    ctx = ExecutionContext(ref, "physical").calibrated()
    mis = ExecutionContext(ref, "physical", stark_trim=ctx.stark_trim + TWO_PI * 25)
    res = residual_stark_check(np.linspace(0, 1e-3, 11), mis)
    assert res.params["offset"] == pytest.approx(-TWO_PI * 25, rel=0.05)


def test_residual_bare_model(ref):
    res = residual_stark_check(np.linspace(0, 1e-3, 11), ExecutionContext(ref, "physical"))
    assert abs(res.params["offset"]) < TWO_PI * 50


def test_residual_with_noise_stays_small(ref):
    ctx = ExecutionContext(ref, "physical").calibrated()
    res = residual_stark_check(np.linspace(0, 1e-3, 11), ctx, noise=NoiseModel.reference(), n_trajectories=50)
    assert abs(res.params["offset"]) < TWO_PI * 50


def test_residual_unbiased_under_dephasing(ref):
    bare = ExecutionContext(ref, "physical")
    delays = np.linspace(0, 4e-4, 21)
    clean = residual_stark_check(delays, bare).params["offset"]
    noisy = residual_stark_check(delays, bare, noise=NoiseModel.reference(), n_trajectories=200, seed=3)
    assert abs(noisy.params["offset"] - clean) < 3 * noisy.errors["offset"]
    assert noisy.errors["offset"] < TWO_PI * 15


def test_uncorrected_sideband_ramsey_oscillates_at_shift(ref):
    ctx = ExecutionContext(ref, "physical", stark_corrections=False)
    res = sideband_ramsey_oscillation(np.linspace(0, 1e-3, 81), ctx)
    true_shift = ctx.sideband_laser_detuning - ref.omega_sec
    assert res.params["angular_frequency"] == pytest.approx(abs(true_shift), rel=0.02)


# Thermometry and heating


def test_thermometry_examples():
    assert thermometry(0.0, 0.5) == 0.0
    assert thermometry(0.1, 0.3) == pytest.approx(0.5)
    with pytest.raises(ValueError):
        thermometry(0.5, 0.5)
    with pytest.raises(ValueError):
        thermometry(-0.1, 0.5)
    with pytest.raises(ValueError):
        thermometry(0.1, 0.0)


@pytest.mark.parametrize("nbar", [0.0, 0.02, 0.05, 0.1, 0.7])
def test_thermometry_inverse(nbar):
    assert thermometry(nbar_to_ratio(nbar), 1.0) == pytest.approx(nbar, rel=1e-12, abs=1e-15)


@pytest.mark.parametrize("nbar", [0.05, 0.1])
def test_thermometry_closed_loop(nbar):
    red, blue = sideband_pi_probabilities(nbar)
    assert thermometry(red, blue) == pytest.approx(nbar, rel=0.05)


def test_heating_budget_examples():
    assert heating_budget(230e-6, 0.01) == pytest.approx(43.5, abs=0.05)
    assert heating_budget(230e-6, 0.02) == pytest.approx(87.0, abs=0.1)
    assert heating_budget(460e-6, 0.01) == pytest.approx(21.7, abs=0.05)
    with pytest.raises(ValueError):
        heating_budget(0.0, 0.01)


# Error budget and gate-fidelity fit


def test_fit_gate_fidelity_exact():
    f_i, f_g = fit_gate_fidelity([0.9, 0.9 * 0.95, 0.9 * 0.95**2])
    assert f_i == pytest.approx(0.9) and f_g == pytest.approx(0.95)


def test_error_budget_no_sources():
    eb = error_budget(sources=(), n_trajectories=50)
    assert eb.total < 1e-6


def test_error_budget_validation():
    with pytest.raises(ValueError):
        error_budget(n_trajectories=10)
    with pytest.raises(ValueError):
        error_budget(sources=("magnetic",), n_trajectories=50)


@pytest.fixture(scope="module")
def budget():
    return error_budget(n_trajectories=50, seed=0)


def test_error_budget_reference(budget):
    assert 0.80 <= 1 - budget.total <= 0.90
    assert budget.total == pytest.approx(0.15, abs=0.05)
    assert abs(budget.product_total - budget.total) <= 0.03
    assert [r[0] for r in budget.rows()] == ["off_resonant", "laser_freq", "laser_intensity", "total"]
    assert "source,infidelity,process_fidelity" in budget.to_csv()
    assert "total" in budget.to_table()


def test_error_budget_monotone(budget):
    assert budget.total >= max(budget.deficits.values()) - 0.02
