import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from iontrap import qlinalg as ql
from iontrap.frames import (
    PulseParams,
    TrapLaserParams,
    displacement,
    frame_transform_ULQC,
    gate_propagator,
    gate_propagators,
    integrate_qc_frame,
    laser_frame_hamiltonian,
)

TWO_PI = 2 * np.pi


def test_params_validation():
    with pytest.raises(ValueError):
        TrapLaserParams(0.0, 0.06, 1.0)
    with pytest.raises(ValueError):
        TrapLaserParams(1.0, 1.5, 1.0)
    with pytest.raises(ValueError):
        TrapLaserParams(1.0, 0.06, -1.0)
    with pytest.raises(ValueError):
        PulseParams(0.0, 0.0, -1e-6)


def test_reference_rates(ref):
    assert ref.Omega == pytest.approx(TWO_PI * 125e3)
    assert ref.sideband_rabi / TWO_PI == pytest.approx(7.7e3, rel=1e-3)


def test_hamiltonian_eta_zero_is_two_level_times_free_motion():
    p = TrapLaserParams(TWO_PI * 1e6, 1e-300, TWO_PI * 1e5)
    delta = TWO_PI * 3e4
    v = laser_frame_hamiltonian(p, PulseParams(delta, 0.0, 1e-6))
    expected = (-delta * ql.kron(ql.SZ, ql.I3) + p.omega_sec * ql.kron(ql.I2, ql.NUM)
                + p.Omega * ql.kron(ql.SX, ql.I3))
    assert np.allclose(v, expected, atol=1e-6)


def test_sideband_matrix_element(ref):
    p = ref.with_(Delta0=0.0)
    v = laser_frame_hamiltonian(p, PulseParams(p.omega_sec, 0.0, 1e-6))
    elem = v[ql.basis_index("D1"), ql.basis_index("S0")]
    assert abs(elem) == pytest.approx(p.eta * p.Omega / 2, rel=5e-3)
    # First-order displacement <1|E|0> = i eta.
    assert displacement(p.eta)[1, 0] == pytest.approx(1j * p.eta, rel=5e-3)


def test_hamiltonian_no_drive_is_diagonal(ref):
    p = ref.with_(Omega=0.0, Delta0=0.0)
    v = laser_frame_hamiltonian(p, PulseParams(p.omega_sec, 0.0, 1e-6))
    assert np.allclose(v, np.diag(np.diag(v)))
    sz = np.array([0.5, 0.5, 0.5, -0.5, -0.5, -0.5])
    n = np.array([0, 1, 2, 0, 1, 2])
    assert np.allclose(np.diag(v).real, -p.omega_sec * sz + n * p.omega_sec)


def test_ulqc_examples(ref):
    assert np.allclose(frame_transform_ULQC(ref, PulseParams(TWO_PI * 1e6, 0, 0), 0.0), np.eye(6))
    # Resonant carrier: the laser frame of the atom is the QC frame; the
    # motional part of U_LQC stays (see the frames module docstring).
    u = frame_transform_ULQC(ref, PulseParams(0.0, 0, 0), 1e-6)
    assert np.allclose(np.abs(np.diag(u)), 1)
    assert np.allclose(np.angle(np.diag(u))[[0, 3]], 0)
    u = frame_transform_ULQC(ref, PulseParams(TWO_PI * 1e6, 0, 0), 0.5e-6)
    d = np.diag(u)
    assert d[0] == pytest.approx(np.exp(-1j * np.pi / 2))
    assert d[3] == pytest.approx(np.exp(1j * np.pi / 2))


def test_gate_propagator_zero_time(ref):
    assert np.allclose(gate_propagator(ref, PulseParams(ref.omega_sec, 0.3, 0.0, 1e-5)), np.eye(6))


def test_resonant_carrier_pi_pulse():
    p = TrapLaserParams(TWO_PI * 1e6, 1e-12, TWO_PI * 1e5)
    u = gate_propagator(p, PulseParams(0.0, 0.0, np.pi / p.Omega))
    assert abs(u[ql.basis_index("D0"), ql.basis_index("S0")]) ** 2 == pytest.approx(1.0, abs=1e-9)


@pytest.mark.parametrize("seed", range(3))
def test_gate_propagator_matches_fine_step_oracle(ref, seed):
    rng = np.random.default_rng(seed)
    delta = rng.choice([0.0, ref.omega_sec, -ref.omega_sec]) + TWO_PI * rng.uniform(-20e3, 20e3)
    q = PulseParams(delta, rng.uniform(0, TWO_PI), rng.uniform(0.1e-6, 0.3e-6), rng.uniform(0, 50e-6))
    u = integrate_qc_frame(ref, q, dt=1e-12)
    assert np.linalg.norm(u - gate_propagator(ref, q), 2) < 1e-6


def test_gate_propagator_matches_oracle_long_pulse(ref):
    q = PulseParams(ref.omega_sec + TWO_PI * 3e3, 0.7, 5e-6, 3e-6)
    u = integrate_qc_frame(ref, q, dt=1e-11)
    assert np.linalg.norm(u - gate_propagator(ref, q), 2) < 1e-6


@given(st.floats(-2e7, 2e7), st.floats(0, 7), st.floats(0, 1e-4), st.floats(0, 1e-3))
def test_gate_propagator_unitary(delta, phi, t, t0):
    p = TrapLaserParams.reference()
    assert ql.unitarity_error(gate_propagator(p, PulseParams(delta, phi, t, t0))) < 1e-10


@given(st.floats(-2e7, 2e7), st.floats(0, 7), st.floats(1e-7, 5e-5), st.floats(1e-7, 5e-5), st.floats(0, 1e-3))
def test_concatenation(delta, phi, t1, t2, t0):
    p = TrapLaserParams.reference()
    first = gate_propagator(p, PulseParams(delta, phi, t2, t0))
    second = gate_propagator(p, PulseParams(delta, phi, t1, t0 + t2))
    merged = gate_propagator(p, PulseParams(delta, phi, t1 + t2, t0))
    assert np.linalg.norm(second @ first - merged) < 1e-9


def test_vectorized_matches_scalar(ref, rng):
    n = 5
    d = ref.omega_sec + rng.normal(0, 1e4, n)
    ph, t, t0, s = rng.uniform(0, 6, n), rng.uniform(0, 1e-4, n), rng.uniform(0, 1e-3, n), rng.uniform(0.9, 1.1, n)
    batch = gate_propagators(ref, d, ph, t, t0, s)
    for k in range(n):
        assert np.allclose(batch[k], gate_propagator(ref, PulseParams(d[k], ph[k], t[k], t0[k]), s[k]), atol=1e-12)


def test_blue_sideband_flopping_frequency():
    p = TrapLaserParams.from_hz(1.32e6, 0.06, 125e3)
    from iontrap.stark import resonant_sideband_detuning

    d = resonant_sideband_detuning(p)
    ts = np.linspace(0, 400e-6, 401)
    s0, d1 = ql.basis_index("S0"), ql.basis_index("D1")
    pd = np.array([abs(gate_propagator(p, PulseParams(d, 0.0, t))[d1, s0]) ** 2 for t in ts])
    spec = np.abs(np.fft.rfft(pd - pd.mean(), n=64 * len(ts)))
    f = np.fft.rfftfreq(64 * len(ts), ts[1] - ts[0])[np.argmax(spec)]
    # Population oscillates at (eta Omega) / 2 pi cycles per second.
    assert TWO_PI * f == pytest.approx(p.eta * p.Omega, rel=0.02)


def test_off_resonant_carrier_bounded(ref):
    from iontrap.stark import resonant_sideband_detuning

    d = resonant_sideband_detuning(ref)
    t = np.pi / ref.sideband_rabi
    u = gate_propagator(ref, PulseParams(d, 0.0, t))
    s0 = ql.basis_index("S0")
    carrier = abs(u[ql.basis_index("D0"), s0]) ** 2
    assert 0 < carrier <= (ref.Omega / d) ** 2
