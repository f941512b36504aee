"""Calibration and benchmark experiments on the simulated ion."""

from __future__ import annotations

import numpy as np

from .. import qlinalg as ql
from ..frames import TrapLaserParams
from ..sequencer.compile import make_pulse
from ..sequencer.execute import ExecutionContext, run_program
from ..sequencer.ir import Pulse, PulseProgram, Wait
from .fitting import (
    ExperimentResult,
    FitError,
    fit_gaussian_envelope,
    fit_line,
    fit_offset,
    fit_rabi,
    fit_sinusoid,
)
from .noise import NoiseModel

TWO_PI = 2.0 * np.pi
T_FIXED = 230e-6
N_RAMSEY_PHASES = 8


def _context(context) -> ExecutionContext:
    if context is None:
        return ExecutionContext(TrapLaserParams.reference())
    if isinstance(context, TrapLaserParams):
        return ExecutionContext(context)
    return context


def thermal_state(nbar: float, atom: str = "S") -> np.ndarray:
    """6x6 thermal motional state (truncated to n <= 2, renormalized) with the atom in ``atom``."""
    if nbar < 0:
        raise ValueError("nbar must be non-negative")
    q = nbar / (1.0 + nbar)
    pn = (1 - q) * q ** np.arange(3)
    pn /= pn.sum()
    rho = np.zeros((6, 6), dtype=complex)
    base = 0 if atom == "D" else 3
    for k in range(3):
        rho[base + k, base + k] = pn[k]
    return rho


def _p_dark(rho: np.ndarray) -> np.ndarray:
    return np.real(np.einsum("...ii->...", rho @ ql.P_D)) if rho.ndim == 2 else \
        np.real(np.einsum("nij,ji->n", rho, ql.P_D))


def _run_pd(prog, initial, ctx, noise, seed, n_traj) -> float:
    res = run_program(prog, initial, ctx, noise=noise, rng_seed=seed,
                      n_trajectories=n_traj if noise is not None else 1)
    return float(_p_dark(res.rho))


def _sample(p: np.ndarray, shots: int | None, seed) -> tuple[np.ndarray, np.ndarray]:
    if shots is None:
        return p, np.zeros_like(p)
    rng = np.random.default_rng(seed)
    f = rng.binomial(int(shots), np.clip(p, 0, 1)) / shots
    return f, np.sqrt(np.clip(f * (1 - f), 1.0 / shots**2, None) / shots)


def rabi_experiment(durations, transition: str = "blue_sideband", context=None, noise: NoiseModel | None = None,
                    nbar: float = 0.0, n_trajectories: int = 100, seed: int = 0,
                    shots: int | None = None) -> ExperimentResult:
    """Dark-state population versus pulse length from |S> (thermal motion), fit to damped flopping.

    The fitted ``frequency`` is in Hz (cycles per second).
    """
    ctx = _context(context)
    p = ctx.params
    t = np.asarray(durations, dtype=float)
    rate = p.Omega if transition == "carrier" else p.sideband_rabi
    init = thermal_state(nbar)
    pd = np.array([
        _run_pd(PulseProgram((make_pulse(p, transition, rate * tk, 0.0),)) if tk > 0 else PulseProgram(()),
                init, ctx, noise, [seed, k], n_trajectories)
        for k, tk in enumerate(t)
    ])
    y, se = _sample(pd, shots, [seed, 10**6])
    params, errors, r = fit_rabi(t, y)
    return ExperimentResult("rabi", t, y, se, params, errors, r, ("duration_s", "p_dark", "stderr"),
                            {"transition": transition, "nbar": nbar})


def ramsey_fringe_contrast(delay: float, transition: str, ctx: ExecutionContext, noise, n_traj: int,
                           seed, phase_offset: float = 0.0) -> float:
    """Contrast of the ensemble fringe obtained by scanning the second pulse phase."""
    p = ctx.params
    init = ql.ket("S0")
    phases = phase_offset + TWO_PI * np.arange(N_RAMSEY_PHASES) / N_RAMSEY_PHASES
    pd = []
    for k, ph in enumerate(phases):
        prog = PulseProgram((make_pulse(p, transition, np.pi / 2, 0.0), Wait(delay),
                             make_pulse(p, transition, np.pi / 2, ph)))
        # Every phase step sees the same noise realizations.
        pd.append(_run_pd(prog, init, ctx, noise, seed, n_traj))
    pd = np.array(pd)
    return float(4.0 * np.abs(np.sum(pd * np.exp(-1j * phases))) / N_RAMSEY_PHASES)


def ramsey_experiment(delays, transition: str = "carrier", context=None, noise: NoiseModel | None = None,
                      n_trajectories: int = 200, seed: int = 0) -> ExperimentResult:
    """Fringe contrast versus free-evolution delay with a Gaussian envelope fit for T2*.

    ``transition`` is ``"carrier"`` or ``"blue_sideband"``. Without decay the
    fitted T2 is inf.
    """
    ctx = _context(context)
    t = np.asarray(delays, dtype=float)
    c = np.array([ramsey_fringe_contrast(tk, transition, ctx, noise, n_trajectories, [seed, k])
                  for k, tk in enumerate(t)])
    params, errors, r = fit_gaussian_envelope(t, c)
    return ExperimentResult("ramsey", t, c, np.zeros_like(c), params, errors, r,
                            ("delay_s", "contrast", "stderr"), {"transition": transition})


def stark_pulse_program(p: TrapLaserParams, x: float, tau: float, t_fixed: float = T_FIXED) -> PulseProgram:
    """Carrier pi/2, Stark pulse detuned by x * omega_sec for tau, carrier pi/2; ``t_fixed`` in total."""
    first = make_pulse(p, "carrier", np.pi / 2, 0.0)
    last = make_pulse(p, "carrier", np.pi / 2, np.pi)
    gap = t_fixed - first.duration - last.duration - tau
    if gap < -1e-15:
        raise ValueError("Stark pulse does not fit inside the fixed delay")
    body = [first]
    if tau > 0:
        body.append(Pulse("carrier", p.Omega * tau, 0.0, tau, detuning=x * p.omega_sec))
    body += [Wait(max(gap, 0.0)), last]
    return PulseProgram(tuple(body), name=f"stark x={x:g} tau={tau:g}")


def stark_oscillation(p: TrapLaserParams, x: float, taus: np.ndarray, noise=None, n_traj: int = 50, seed=0,
                      t_fixed: float = T_FIXED, shots: int | None = None) -> tuple[np.ndarray, np.ndarray]:
    """P(D) versus Stark-pulse length for a laser detuned by x * omega_sec (no corrections)."""
    ctx = ExecutionContext(p, "physical", stark_corrections=False)
    init = ql.ket("S0")
    pd = np.array([_run_pd(stark_pulse_program(p, x, tau, t_fixed), init, ctx, noise, [*np.atleast_1d(seed), k],
                           n_traj) for k, tau in enumerate(taus)])
    return _sample(pd, shots, [*np.atleast_1d(seed), 10**6])


SIDEBAND_EXCLUSION = 0.04


def sideband_clear(xs) -> np.ndarray:
    """True where x (units of omega_sec) is at least SIDEBAND_EXCLUSION away from every integer sideband.

    Near x = k the laser drives the k-th sideband resonantly and the population
    oscillation is not a Stark shift, so those points are kept in the scan
    output but left out of the offset fit.
    """
    xs = np.asarray(xs, dtype=float)
    k = np.maximum(np.round(xs), 1.0)
    return np.abs(xs - k) >= SIDEBAND_EXCLUSION


def stark_scan(detunings, stark_pulse_lengths=None, context=None, noise: NoiseModel | None = None,
               t_fixed: float = T_FIXED, n_trajectories: int = 50, seed: int = 0,
               shots: int | None = None) -> ExperimentResult:
    """Stark shift versus laser detuning (units of omega_sec) and the A/x + b offset fit.

    For every detuning the P(D) oscillation versus Stark-pulse length is fitted
    for its angular frequency |shift|; the shifts are then fitted to A/x + b
    with A = Omega^2 / (2 omega_sec) fixed.

    Returns:
        ExperimentResult with x = detunings, y = |shift| (rad/s), params ``b``
        (rad/s) and ``A``; ``meta["traces"]`` holds the per-detuning scans.
    """
    ctx = _context(context)
    p = ctx.params
    xs = np.asarray(detunings, dtype=float)
    if stark_pulse_lengths is None:
        stark_pulse_lengths = np.linspace(0.0, t_fixed - 2 * np.pi / 2 / p.Omega - 1e-6, 41)
    taus = np.asarray(stark_pulse_lengths, dtype=float)
    shifts, errs, traces = [], [], []
    for k, x in enumerate(xs):
        y, se = stark_oscillation(p, x, taus, noise, n_trajectories, [seed, k], t_fixed, shots)
        try:
            fp, fe, _ = fit_sinusoid(taus, y, sigma=None if shots is None else se)
        except FitError as exc:
            raise FitError(f"insufficient oscillation at x = {x:g}: {exc}") from exc
        shifts.append(TWO_PI * fp["frequency"])
        errs.append(TWO_PI * fe["frequency"])
        traces.append((taus, y))
    shifts = np.array(shifts)
    errs = np.array(errs)
    a_fixed = p.Omega**2 / (2 * p.omega_sec)
    use = sideband_clear(xs)
    if use.sum() < 1:
        raise FitError("no detuning clear of the motional sidebands to fit")
    sigma = errs[use] if shots is not None and np.all(np.isfinite(errs[use])) and np.all(errs[use] > 0) else None
    b, sb, r = fit_offset(xs[use], shifts[use], a_fixed, sigma=sigma)
    return ExperimentResult("stark_scan", xs, shifts, errs, {"b": b, "A": a_fixed, "n_fit": int(use.sum())},
                            {"b": sb}, r, ("detuning_over_omega_sec", "abs_shift_rad_s", "stderr"),
                            {"traces": traces, "fit_mask": use})


def residual_stark_check(delays, context=None, noise: NoiseModel | None = None, n_trajectories: int = 50,
                         seed: int = 0) -> ExperimentResult:
    """Two-quadrature sideband Ramsey; the phase slope gives the residual shift.

    The second pulse at phase pi/2 gives P_s = (1 + C sin(e t)) / 2 and at
    phase 0 gives P_c = (1 + C cos(e t)) / 2, with e = Delta_true - Delta_used
    and C the ensemble contrast. The phase atan2(2 P_s - 1, 2 P_c - 1) = e t
    does not depend on C, so dephasing does not bias e. The delay step must
    keep |e| * step below pi for the phase unwrapping.

    Returns:
        ExperimentResult with ``y`` = P_s, params ``offset`` = e (rad/s) and
        ``phase0``; ``meta["p_cos"]`` holds P_c.
    """
    ctx = _context(context)
    p = ctx.params
    t = np.asarray(delays, dtype=float)
    init = ql.ket("S0")

    def run(k, tk, phase, stream):
        prog = PulseProgram((make_pulse(p, "blue_sideband", np.pi / 2, 0.0), Wait(tk),
                             make_pulse(p, "blue_sideband", np.pi / 2, phase)))
        return _run_pd(prog, init, ctx, noise, [seed, k, stream], n_trajectories)

    ps = np.array([run(k, tk, np.pi / 2, 0) for k, tk in enumerate(t)])
    pc = np.array([run(k, tk, 0.0, 1) for k, tk in enumerate(t)])
    theta = np.unwrap(np.arctan2(2 * ps - 1, 2 * pc - 1))
    line, line_err, r = fit_line(t, theta)
    params = {"offset": line["slope"], "phase0": line["intercept"]}
    errors = {"offset": line_err["slope"], "phase0": line_err["intercept"]}
    return ExperimentResult("residual_stark", t, ps, np.zeros_like(ps), params, errors, r,
                            ("delay_s", "p_dark", "stderr"), meta={"p_cos": pc})


def sideband_ramsey_oscillation(delays, context=None, n_trajectories: int = 1, seed: int = 0,
                                noise=None) -> ExperimentResult:
    """Same sequence as ``residual_stark_check`` fitted to a sinusoid (for uncorrected runs)."""
    res = residual_stark_check(delays, context, noise, n_trajectories, seed)
    params, errors, r = fit_sinusoid(res.x, res.y)
    params["angular_frequency"] = TWO_PI * params["frequency"]
    errors["angular_frequency"] = TWO_PI * errors["frequency"]
    return ExperimentResult("sideband_ramsey", res.x, res.y, res.stderr, params, errors, r, res.columns)
