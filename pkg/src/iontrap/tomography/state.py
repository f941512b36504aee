"""Two-qubit state tomography from the 15 conditional measurements."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import qlinalg as ql
from ..sequencer.compile import prep_target_state
from .measurements import MEASUREMENT_TABLE, measurement_operators
from .mle import clip_to_physical, mle_psd

PSD_TOL = 1e-12
MIN_SINGULAR = 1e-3


class SingularDesignError(ValueError):
    """The design matrix is singular (preparations or measurements are not complete)."""


def prep_states() -> np.ndarray:
    """The 16 ideal preparation states as 4x4 density matrices on {D0, D1, S0, S1}."""
    out = []
    for i in range(1, 17):
        v = prep_target_state(i)
        out.append(np.outer(v, v.conj()))
    return np.array(out)


def build_A(preps: np.ndarray | None = None, ops: np.ndarray | None = None) -> np.ndarray:
    """Design matrix A_ij = Tr(M_j rho_i), with a 16th all-ones column for the trace.

    Args:
        preps: (16, 4, 4) preparation density matrices.
        ops: (15, 4, 4) measurement operators.

    Raises:
        SingularDesignError: If A is numerically singular.
    """
    preps = prep_states() if preps is None else np.asarray(preps)
    ops = measurement_operators(MEASUREMENT_TABLE) if ops is None else np.asarray(ops)
    a = np.real(np.einsum("jab,iba->ij", ops, preps))
    a = np.hstack([a, np.ones((len(preps), 1))])
    if a.shape[0] != a.shape[1]:
        raise SingularDesignError(f"design matrix must be square, got {a.shape}")
    smin = np.linalg.svd(a, compute_uv=False)[-1]
    if smin < MIN_SINGULAR:
        raise SingularDesignError(f"design matrix is singular (smallest singular value {smin:.2e})")
    return a


@dataclass(frozen=True)
class StateEstimate:
    """A reconstructed 4x4 density matrix.

    Attributes:
        rho: Estimate on {D0, D1, S0, S1}.
        min_eigenvalue: Smallest eigenvalue.
        physical: True when positive semidefinite within tolerance.
        method: ``"linear"`` or ``"mle"``.
    """

    rho: np.ndarray
    min_eigenvalue: float
    physical: bool
    method: str


def _estimate(rho: np.ndarray, method: str) -> StateEstimate:
    rho = 0.5 * (rho + rho.conj().T)
    w = float(np.linalg.eigvalsh(rho)[0])
    return StateEstimate(rho=rho, min_eigenvalue=w, physical=w >= -PSD_TOL, method=method)


def _with_trace(m) -> np.ndarray:
    m = np.asarray(m, dtype=float).ravel()
    if len(m) == 15:
        m = np.append(m, 1.0)
    if len(m) != 16:
        raise ValueError("need 15 measurement values (or 16 including the trace entry)")
    return m


def reconstruct_rho(m, preps: np.ndarray | None = None, a: np.ndarray | None = None) -> StateEstimate:
    """Linear inversion in the preparation-projector basis.

    Solves sum_i c_i A_ij = m_j for the coefficients of rho = sum_i c_i rho_i.

    Args:
        m: 15 measurement values (the trace entry 1 is appended) or all 16.
        preps: Preparation projectors; the table states by default.
        a: Precomputed design matrix matching ``preps``.
    """
    preps = prep_states() if preps is None else np.asarray(preps)
    a = build_A(preps) if a is None else a
    c = np.linalg.solve(a.T, _with_trace(m))
    return _estimate(np.einsum("i,iab->ab", c, preps), "linear")


def measurement_probabilities(rho: np.ndarray, ops: np.ndarray | None = None) -> np.ndarray:
    """Exact success probabilities Tr(M_j rho) of the 15 measurements for a 4x4 state."""
    ops = measurement_operators(MEASUREMENT_TABLE) if ops is None else ops
    return np.real(np.einsum("jab,ba->j", ops, rho))


def mle_density(successes, shots, ops: np.ndarray | None = None, gtol: float = 1e-6) -> StateEstimate:
    """Binomial maximum-likelihood state estimate.

    Args:
        successes: 15 success counts (or exact probabilities with ``shots`` = 1).
        shots: Trials per measurement (scalar or 15 values), positive.
        ops: Measurement operators; the table by default.
        gtol: Gradient tolerance of the optimizer.
    """
    ops = measurement_operators(MEASUREMENT_TABLE) if ops is None else ops
    s = np.asarray(successes, dtype=float).ravel()
    n = np.broadcast_to(np.asarray(shots, dtype=float), s.shape).copy()
    if np.any(n <= 0):
        raise ValueError("shot counts must be positive")
    lin = reconstruct_rho(s / n).rho
    res = mle_psd(ops, s, n, clip_to_physical(lin), gtol=gtol)
    return _estimate(res.estimate, "mle")
