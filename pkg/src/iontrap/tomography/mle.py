"""Binomial maximum-likelihood estimation over positive semidefinite matrices.

The estimate is X = T^dag T / Tr(T^dag T) with T lower triangular, so it is
positive semidefinite and trace one by construction. Cell c has success
probability Tr(H_c X) (H_c Hermitian), n_c trials and s_c successes; exact
probabilities are handled as n_c = 1 with fractional s_c, which turns the
objective into a cross entropy with the same maximizer.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

PROB_FLOOR = 1e-12


class MLEConvergenceError(RuntimeError):
    """Raised when the optimizer fails to reach the gradient tolerance."""


@dataclass(frozen=True)
class MLEResult:
    estimate: np.ndarray
    neg_log_likelihood: float
    grad_norm: float
    iterations: int


def clip_to_physical(x: np.ndarray) -> np.ndarray:
    """Floor negative eigenvalues at zero and renormalize the trace to one."""
    h = 0.5 * (x + x.conj().T)
    w, v = np.linalg.eigh(h)
    w = np.clip(w, 0.0, None)
    if w.sum() <= 0:
        return np.eye(len(x), dtype=complex) / len(x)
    return (v * (w / w.sum())) @ v.conj().T


def lower_factor(x: np.ndarray) -> np.ndarray:
    """Lower-triangular T with T^dag T = x for positive semidefinite (possibly singular) x."""
    w, v = np.linalg.eigh(0.5 * (x + x.conj().T))
    b = np.sqrt(np.clip(w, 0.0, None))[:, None] * v.conj().T
    j = np.eye(len(x))[::-1]
    _, r = np.linalg.qr(j @ b @ j)
    return j @ r @ j


def _pack(t: np.ndarray) -> np.ndarray:
    il = np.tril_indices(len(t))
    off = np.tril_indices(len(t), -1)
    return np.concatenate([np.real(t[il]), np.imag(t[off])])


def _unpack(x: np.ndarray, d: int) -> np.ndarray:
    il = np.tril_indices(d)
    off = np.tril_indices(d, -1)
    n_re = len(il[0])
    t = np.zeros((d, d), dtype=complex)
    t[il] = x[:n_re]
    t[off] += 1j * x[n_re:]
    return t


def _probabilities(x: np.ndarray, h: np.ndarray, norm: np.ndarray | None) -> np.ndarray:
    p = np.real(np.einsum("cij,ji->c", h, x))
    if norm is not None:
        p = p / np.real(np.einsum("cij,ji->c", norm, x))
    return p


def neg_log_likelihood(x: np.ndarray, h: np.ndarray, successes: np.ndarray, trials: np.ndarray,
                       norm: np.ndarray | None = None) -> float:
    """Binomial negative log-likelihood of estimate ``x`` (no combinatorial constant)."""
    p = np.clip(_probabilities(x, h, norm), PROB_FLOOR, 1 - PROB_FLOOR)
    return float(-np.sum(successes * np.log(p) + (trials - successes) * np.log1p(-p)))


def mle_psd(h: np.ndarray, successes, trials, init: np.ndarray, norm: np.ndarray | None = None,
            gtol: float = 1e-6, max_iter: int = 20000) -> MLEResult:
    """Maximize the binomial likelihood over trace-one PSD matrices.

    Cell probabilities are p_c = Tr(H_c X) / Tr(N_c X). With N_c = I this is the
    plain trace-one model; per-cell normalizers keep ratios of positive maps
    inside [0, 1] when X itself is not trace preserving.

    Args:
        h: (c, d, d) Hermitian cell operators.
        successes: (c,) success counts (or probabilities when ``trials`` is 1).
        trials: (c,) trial counts.
        init: Starting estimate; clipped to a physical matrix first.
        norm: Optional (c, d, d) Hermitian positive normalizers N_c.
        gtol: Required gradient norm (per-trial normalized objective, unit-norm T).
        max_iter: Iteration cap.

    Raises:
        MLEConvergenceError: If the gradient tolerance is not met.
    """
    h = np.asarray(h, dtype=complex)
    s = np.asarray(successes, dtype=float).ravel()
    n = np.asarray(trials, dtype=float).ravel()
    d = h.shape[-1]
    nrm = np.broadcast_to(np.eye(d, dtype=complex), h.shape) if norm is None else np.asarray(norm, dtype=complex)
    weight = 1.0 / max(n.sum(), 1.0)
    il, off = np.tril_indices(d), np.tril_indices(d, -1)

    def fun(params):
        t = _unpack(params, d)
        a = t.conj().T @ t
        num = np.real(np.einsum("cij,ji->c", h, a))
        den = np.real(np.einsum("cij,ji->c", nrm, a))
        p = np.clip(num / den, PROB_FLOOR, 1 - PROB_FLOOR)
        f = -np.sum(s * np.log(p) + (n - s) * np.log1p(-p)) * weight
        g = -(s / p - (n - s) / (1 - p)) * weight / den
        gam = np.einsum("c,cij->ij", g, h) - np.einsum("c,cij->ij", g * p, nrm)
        gm = 2.0 * t @ gam
        grad = np.concatenate([np.real(gm[il]), np.imag(gm[off])])
        # The likelihood is invariant under T -> cT; pin the scale to the unit sphere.
        r = params @ params - 1.0
        return f + r * r, grad + 4.0 * r * params

    x0 = _pack(lower_factor(clip_to_physical(init)))
    x0 = x0 / np.linalg.norm(x0)
    res = minimize(fun, x0, jac=True, method="L-BFGS-B",
                   options={"maxiter": max_iter, "gtol": gtol * 1e-2, "ftol": 1e-16, "maxcor": 30})
    t = _unpack(res.x, d)
    t = t / np.linalg.norm(t)
    _, g = fun(_pack(t))
    gnorm = float(np.linalg.norm(g))
    a = t.conj().T @ t
    est = a / np.real(np.trace(a))
    est = 0.5 * (est + est.conj().T)
    if not np.isfinite(res.fun) or gnorm > gtol:
        raise MLEConvergenceError(f"MLE did not converge: |grad| = {gnorm:.3e} after {res.nit} iterations "
                                  f"({res.message})")
    return MLEResult(estimate=est, neg_log_likelihood=neg_log_likelihood(est, h, s, n, norm),
                     grad_norm=gnorm, iterations=int(res.nit))
