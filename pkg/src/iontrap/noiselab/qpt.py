"""Simulated process tomography of the identity, CNOT and CNOT x 2 programs."""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor

import numpy as np

from .. import qlinalg as ql
from ..sequencer.compile import CNOT_TARGET, gate_program, measurement_program, prep_sequence, program_unitary
from ..sequencer.execute import ExecutionContext, run_program
from ..tomography.dataset import N_INPUTS, N_MEAS, TomographyDataset
from ..tomography.measurements import MEASUREMENT_TABLE

GATES = ("identity", "cnot", "cnotx2")


def gate_target(gate: str) -> np.ndarray:
    """Ideal 4x4 unitary of a named gate program."""
    if gate == "identity":
        return np.eye(4, dtype=complex)
    if gate == "cnot":
        return CNOT_TARGET.copy()
    if gate == "cnotx2":
        return CNOT_TARGET @ CNOT_TARGET
    if gate in ("mcnot", "mcnotx2"):
        from ..frames import TrapLaserParams

        u = program_unitary(gate_program(gate, TrapLaserParams.reference()))
        return ql.restrict_computational(u)
    raise ValueError(f"unknown gate {gate!r}")


def cell_program(gate: str, i: int, j: int, context: ExecutionContext):
    """Preparation i (1..16), gate, and measurement j (1..15) as one program."""
    p = context.params
    spec = MEASUREMENT_TABLE[j - 1]
    return prep_sequence(i, p) + gate_program(gate, p) + measurement_program(spec.u_ops, spec.v_ops, p)


def _cell(args) -> float:
    gate, i, j, context, noise, n_traj, seed = args
    prog = cell_program(gate, i, j, context)
    res = run_program(prog, ql.ket("S0"), context, noise=noise, rng_seed=[seed, i, j],
                      n_trajectories=n_traj if noise is not None else 1)
    return res.success_probability()


def simulate_probabilities(gate: str, context: ExecutionContext, noise=None, n_trajectories: int = 100,
                           seed: int = 0, workers: int = 1) -> np.ndarray:
    """(16, 15) exact success probabilities averaged over noise trajectories.

    Every cell draws its noise from its own stream seeded by (seed, i, j), so
    the result does not depend on ``workers``.
    """
    jobs = [(gate, i, j, context, noise, int(n_trajectories), int(seed))
            for i in range(1, N_INPUTS + 1) for j in range(1, N_MEAS + 1)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            vals = list(ex.map(_cell, jobs, chunksize=8))
    else:
        vals = [_cell(a) for a in jobs]
    return np.clip(np.array(vals).reshape(N_INPUTS, N_MEAS), 0.0, 1.0)


def simulate_tomography(gate: str, context: ExecutionContext, noise=None, n_trajectories: int = 100,
                        seed: int = 0, shots: int | None = None, workers: int = 1) -> TomographyDataset:
    """Dataset of the 16 x 15 cells: exact probabilities, or binomial counts with ``shots``."""
    probs = simulate_probabilities(gate, context, noise, n_trajectories, seed, workers)
    if shots is None:
        return TomographyDataset(probs)
    rng = np.random.default_rng([int(seed), 1_000_003])
    return TomographyDataset(rng.binomial(int(shots), probs).astype(float), np.full(probs.shape, int(shots)))


def fit_gate_fidelity(fidelities) -> tuple[float, float]:
    """Fit F_n = F_i F_g^n to the 0, 1, 2 gate series (least squares in log space).

    Returns:
        (F_i, F_g).
    """
    f = np.asarray(fidelities, dtype=float)
    n = np.arange(len(f))
    slope, intercept = np.polyfit(n, np.log(f), 1)
    return float(np.exp(intercept)), float(np.exp(slope))
