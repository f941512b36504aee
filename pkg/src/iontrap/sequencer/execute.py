"""Execution of pulse programs on the six-dimensional simulator.

States are propagated as batches of density matrices, one per noise
trajectory. In exact mode each fluorescence detection splits every branch into
a bright and a dark part, so outcome probabilities are exact for each
trajectory. In shot mode each trajectory samples one outcome and collapses.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Protocol

import numpy as np

from .. import qlinalg as ql
from ..frames import TrapLaserParams, gate_propagators
from ..stark import StarkLedger, nth_gate_phase, resonant_sideband_detuning, stark_delta
from . import gates
from .ir import ConditionalBranch, FluorescenceMeasure, Pulse, PulseProgram, Wait

MODES = ("idealized", "physical")
SAMPLINGS = ("exact", "shots")

_SZ6 = np.real(np.diag(ql.kron(ql.SZ, ql.I3)))
_MASK_S = np.real(np.diag(ql.P_S)).astype(bool)


class PulseNoise(Protocol):
    """Per-pulse noise realization for a batch of trajectories, arrays of shape (n, k)."""

    detuning: np.ndarray
    phase: np.ndarray
    scale: np.ndarray


class NoiseSource(Protocol):
    heating_rate: float

    def sample_pulses(self, starts: np.ndarray, durations: np.ndarray, n: int,
                      rng: np.random.Generator) -> PulseNoise: ...


@lru_cache(maxsize=64)
def _resonance(p: TrapLaserParams) -> float:
    return resonant_sideband_detuning(p)


@dataclass(frozen=True)
class ExecutionContext:
    """How pulses are turned into propagators.

    Attributes:
        params: Trap and laser constants.
        mode: ``"idealized"`` (exact rotations) or ``"physical"`` (full V_L).
        stark_corrections: Apply the ledger phase corrections in physical mode.
        stark_trim: Added to Delta0 in the correction model only; the
            calibration knob the experiment tunes (rad/s).
        sideband_detuning: Laser detuning for sideband pulses (rad/s);
            defaults to the Stark-shifted resonance of the full model.
        carrier_detuning: Laser detuning for carrier pulses (rad/s).
    """

    params: TrapLaserParams
    mode: str = "idealized"
    stark_corrections: bool = True
    stark_trim: float = 0.0
    sideband_detuning: float | None = None
    carrier_detuning: float = 0.0

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")

    @property
    def sideband_laser_detuning(self) -> float:
        if self.sideband_detuning is not None:
            return self.sideband_detuning
        return _resonance(self.params)

    @property
    def sideband_shift(self) -> float:
        """Delta used by the phase corrections of sideband pulses (rad/s)."""
        p = self.params
        return stark_delta(self.sideband_laser_detuning, p.Omega, p.Delta0 + self.stark_trim)

    def calibrated(self) -> "ExecutionContext":
        """Copy whose ``stark_trim`` nulls the residual shift of the full model."""
        from ..stark import stark_model_residual

        d = self.sideband_laser_detuning
        p = self.params
        trim = (d - p.omega_sec) - stark_delta(d, p.Omega, p.Delta0) if self.sideband_detuning is not None \
            else stark_model_residual(p)
        return ExecutionContext(p, self.mode, self.stark_corrections, trim, self.sideband_detuning,
                                self.carrier_detuning)


@dataclass
class RunResult:
    """Outcome of ``run_program``.

    Attributes:
        rho: Final 6x6 density matrix averaged over trajectories (and branches).
        record: Exact mode: {outcome history: per-trajectory probabilities}.
            Histories are tuples of ``"S"`` (bright) / ``"D"`` (dark).
        outcomes: Shot mode: (n, n_measurements) int array, 1 bright, 0 dark,
            -1 not executed.
        ledger: Stark registers at the end of the program.
        trajectories: Per-trajectory final density matrices (n, 6, 6).
    """

    rho: np.ndarray
    record: dict = field(default_factory=dict)
    outcomes: np.ndarray | None = None
    ledger: StarkLedger | None = None
    trajectories: np.ndarray | None = None

    def probability(self, history: tuple) -> float:
        """Mean probability of an outcome history (exact mode) or its frequency (shot mode)."""
        if self.outcomes is None:
            return float(np.mean(self.record.get(tuple(history), 0.0)))
        code = np.array([1 if h == "S" else 0 for h in history])
        k = len(history)
        hit = np.all(self.outcomes[:, :k] == code, axis=1)
        if self.outcomes.shape[1] > k:
            hit &= np.all(self.outcomes[:, k:] == -1, axis=1)
        return float(np.mean(hit))

    def success_probability(self) -> float:
        """Probability of dark on every detection but the last, which is bright."""
        n = max((len(h) for h in self.record), default=0) if self.outcomes is None else self.outcomes.shape[1]
        if n == 0:
            return 0.0
        return self.probability(("D",) * (n - 1) + ("S",))

    def success_per_trajectory(self) -> np.ndarray:
        if self.outcomes is not None:
            n = self.outcomes.shape[1]
            code = np.array([0] * (n - 1) + [1])
            return np.all(self.outcomes == code, axis=1).astype(float)
        n = max(len(h) for h in self.record)
        return np.asarray(self.record.get(("D",) * (n - 1) + ("S",), 0.0), dtype=float)


def _flatten_schedule(prog: PulseProgram) -> list[tuple[float, Pulse]]:
    """Start time of every pulse (conditional bodies included, the clock always runs)."""
    out: list[tuple[float, Pulse]] = []
    t = 0.0

    def walk(instructions):
        nonlocal t
        for ins in instructions:
            if isinstance(ins, Pulse):
                out.append((t, ins))
                t += ins.duration
            elif isinstance(ins, Wait):
                t += ins.duration
            elif isinstance(ins, ConditionalBranch):
                walk(ins.body)
            elif not isinstance(ins, FluorescenceMeasure):
                raise TypeError(f"malformed program: {ins!r}")

    walk(prog.instructions)
    return out


def _ideal_propagators(transition: str, theta: float, duration: float, phase: np.ndarray,
                       detuning: np.ndarray, scale: np.ndarray, t0: float) -> np.ndarray:
    """QC-frame propagators of the effective two-level coupling with detuning and amplitude errors."""
    g = gates.generator(transition)
    n = len(phase)
    if duration <= 0:
        return np.broadcast_to(np.eye(6, dtype=complex), (n, 6, 6)).copy()
    rate = theta / duration
    c = np.exp(1j * phase)[:, None, None] * g
    h = 0.5 * rate * scale[:, None, None] * (c + np.conj(np.swapaxes(c, -1, -2))) \
        - detuning[:, None, None] * np.diag(_SZ6)[None]
    u = ql.expm_hermitian_batch(h, duration)
    d1 = np.exp(-1j * detuning[:, None] * _SZ6 * (t0 + duration))
    d0 = np.exp(-1j * detuning[:, None] * _SZ6 * t0)
    return d1[:, :, None] * u * np.conj(d0)[:, None, :]


def _conj_apply(u: np.ndarray, rho: np.ndarray) -> np.ndarray:
    return u @ rho @ np.conj(np.swapaxes(u, -1, -2))


def _to_logical_frame(rho: np.ndarray, ledger: StarkLedger, apply: bool) -> np.ndarray:
    """Undo the pending Z rotation of the Stark ledger (the virtual Z the next pulse would absorb)."""
    if not apply or ledger.global_phase == 0.0:
        return rho
    z = np.exp(1j * ledger.global_phase * _SZ6)
    return z[None, :, None] * rho * np.conj(z)[None, None, :]


def _initial_batch(initial, n: int) -> np.ndarray:
    x = np.asarray(initial, dtype=complex)
    if x.shape == (6,):
        x = ql.dm(x)
    if x.shape == (6, 6):
        return np.broadcast_to(x, (n, 6, 6)).copy()
    if x.shape == (n, 6, 6):
        return x.copy()
    raise ValueError(f"initial state has shape {x.shape}; expected (6,), (6, 6) or ({n}, 6, 6)")


def _heating_superoperator(rate: float, duration: float) -> np.ndarray:
    """Column-stacked superoperator of symmetric heating/cooling at ``rate`` quanta/s for ``duration``."""
    from scipy.linalg import expm

    a = ql.kron(ql.I2, ql.A)
    ad = a.conj().T
    eye = np.eye(6)

    def diss(c):
        cdc = c.conj().T @ c
        return np.kron(c.conj(), c) - 0.5 * np.kron(eye, cdc) - 0.5 * np.kron(cdc.T, eye)

    return expm(rate * duration * (diss(a) + diss(ad)))


def run_program(
    prog: PulseProgram,
    initial,
    context: ExecutionContext | TrapLaserParams | None = None,
    mode: str | None = None,
    noise: NoiseSource | None = None,
    rng_seed=0,
    n_trajectories: int = 1,
    sampling: str = "exact",
) -> RunResult:
    """Simulate a pulse program.

    Args:
        prog: Program with logical phases.
        initial: State vector (6,), density matrix (6, 6) or a batch (n, 6, 6).
        context: Execution context, or bare parameters (reference ion if None).
        mode: Overrides ``context.mode`` when given.
        noise: Optional noise source providing per-pulse detuning, phase and
            amplitude errors (see ``noiselab.NoiseModel``).
        rng_seed: Seed (int or sequence of ints) for noise and shot sampling.
        n_trajectories: Number of trajectories simulated as one batch.
        sampling: ``"exact"`` probabilities or ``"shots"`` (one outcome per trajectory).

    Returns:
        RunResult with the averaged final state and the measurement record.
    """
    if context is None:
        context = ExecutionContext(TrapLaserParams.reference())
    elif isinstance(context, TrapLaserParams):
        context = ExecutionContext(context)
    if mode is not None and mode != context.mode:
        context = ExecutionContext(context.params, mode, context.stark_corrections, context.stark_trim,
                                   context.sideband_detuning, context.carrier_detuning)
    if sampling not in SAMPLINGS:
        raise ValueError(f"sampling must be one of {SAMPLINGS}")
    n = int(n_trajectories)
    if n < 1:
        raise ValueError("need at least one trajectory")
    rng = np.random.default_rng(rng_seed)
    p = context.params

    schedule = _flatten_schedule(prog)
    k = len(schedule)
    if noise is not None and k > 0:
        starts = np.array([s for s, _ in schedule])
        durs = np.array([pu.duration for _, pu in schedule])
        pn = noise.sample_pulses(starts, durs, n, rng)
        eps, dphi, scale = pn.detuning, pn.phase, pn.scale
    else:
        eps = np.zeros((n, k))
        dphi = np.zeros((n, k))
        scale = np.ones((n, k))
    heating = 0.0 if noise is None else float(getattr(noise, "heating_rate", 0.0))

    physical = context.mode == "physical"
    shift = context.sideband_shift if physical else 0.0
    d_sb = context.sideband_laser_detuning if physical else 0.0
    ledger = StarkLedger()
    counter = 0

    def propagators(pulse: Pulse, t0: float) -> np.ndarray:
        nonlocal counter
        j = counter
        counter += 1
        if physical:
            is_sb = pulse.transition == "blue_sideband"
            corr = shift if (is_sb and context.stark_corrections) else 0.0
            phi = nth_gate_phase(ledger, pulse.phi, pulse.duration, corr, t0)
            delta = (d_sb if is_sb else context.carrier_detuning) + pulse.detuning + eps[:, j]
            return gate_propagators(p, delta, phi + dphi[:, j], pulse.duration, t0, scale[:, j])
        ledger.global_time = t0 + pulse.duration
        phase = pulse.phi - gates.LASER_PHASE_OFFSET[pulse.transition] + dphi[:, j]
        return _ideal_propagators(pulse.transition, pulse.theta, pulse.duration, phase, eps[:, j] + pulse.detuning,
                                  scale[:, j], t0)

    rho0 = _initial_batch(initial, n)
    clock = 0.0

    if sampling == "exact":
        branches: dict[tuple, np.ndarray] = {(): rho0}

        def walk(instructions, active):
            nonlocal clock
            for ins in instructions:
                if isinstance(ins, Pulse):
                    u = propagators(ins, clock)
                    for h in active():
                        branches[h] = _conj_apply(u, branches[h])
                    clock += ins.duration
                elif isinstance(ins, Wait):
                    if heating > 0:
                        sop = _heating_superoperator(heating, ins.duration)
                        for h in active():
                            r = branches[h]
                            vec = np.swapaxes(r, -1, -2).reshape(n, 36)
                            branches[h] = np.swapaxes((vec @ sop.T).reshape(n, 6, 6), -1, -2)
                    ledger.wait(clock + ins.duration - ledger.global_time)
                    clock += ins.duration
                elif isinstance(ins, FluorescenceMeasure):
                    for h in active():
                        r = branches.pop(h)
                        ms = _MASK_S[:, None] & _MASK_S[None, :]
                        md = (~_MASK_S)[:, None] & (~_MASK_S)[None, :]
                        branches[h + ("S",)] = r * ms
                        branches[h + ("D",)] = r * md
                elif isinstance(ins, ConditionalBranch):
                    dark = [h for h in active() if h and h[-1] == "D"]
                    walk(ins.body, lambda dark=dark: [h for h in list(branches)
                                                      if any(h[: len(d)] == d for d in dark)])
                else:
                    raise TypeError(f"malformed program: {ins!r}")

        walk(prog.instructions, lambda: list(branches))
        record = {h: np.real(np.trace(r, axis1=1, axis2=2)) for h, r in branches.items() if h}
        traj = _to_logical_frame(sum(branches.values()), ledger, physical and context.stark_corrections)
        return RunResult(rho=traj.mean(axis=0), record=record, ledger=ledger, trajectories=traj)

    # Shot mode: each trajectory carries a normalized state and its own outcomes.
    rho = rho0
    outcomes = np.full((n, prog.n_measurements), -1, dtype=int)
    m_idx = 0
    last_bright = np.ones(n, dtype=bool)

    def walk_shots(instructions, mask):
        nonlocal clock, rho, m_idx, last_bright
        for ins in instructions:
            if isinstance(ins, Pulse):
                u = propagators(ins, clock)
                rho = np.where(mask[:, None, None], _conj_apply(u, rho), rho)
                clock += ins.duration
            elif isinstance(ins, Wait):
                if heating > 0:
                    sop = _heating_superoperator(heating, ins.duration)
                    vec = np.swapaxes(rho, -1, -2).reshape(n, 36)
                    new = np.swapaxes((vec @ sop.T).reshape(n, 6, 6), -1, -2)
                    rho = np.where(mask[:, None, None], new, rho)
                ledger.wait(clock + ins.duration - ledger.global_time)
                clock += ins.duration
            elif isinstance(ins, FluorescenceMeasure):
                p_s = np.clip(np.real(np.einsum("nii->n", rho * _MASK_S[None, :, None] * _MASK_S[None, None, :])), 0, 1)
                bright = rng.random(n) < p_s
                proj = np.where(bright[:, None], _MASK_S[None, :], ~_MASK_S[None, :]).astype(float)
                new = rho * proj[:, :, None] * proj[:, None, :]
                tr = np.real(np.einsum("nii->n", new))
                new = new / np.where(tr > 0, tr, 1.0)[:, None, None]
                rho = np.where(mask[:, None, None], new, rho)
                outcomes[:, m_idx] = np.where(mask, bright.astype(int), -1)
                m_idx += 1
                last_bright = np.where(mask, bright, last_bright)
            elif isinstance(ins, ConditionalBranch):
                walk_shots(ins.body, mask & ~last_bright)
            else:
                raise TypeError(f"malformed program: {ins!r}")

    walk_shots(prog.instructions, np.ones(n, dtype=bool))
    rho = _to_logical_frame(rho, ledger, physical and context.stark_corrections)
    return RunResult(rho=rho.mean(axis=0), outcomes=outcomes, ledger=ledger, trajectories=rho)
