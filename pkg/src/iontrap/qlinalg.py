"""Dense linear algebra on the six-dimensional ion simulation space.

The simulation space is {|D>, |S>} x {|0>, |1>, |2>} with basis order
|D0, D1, D2, S0, S1, S2> (atomic index major). |D> is the +1/2 eigenstate of
the half-spin operator ``SZ``. The computational subspace is {D0, D1, S0, S1}.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

BASIS_LABELS = ("D0", "D1", "D2", "S0", "S1", "S2")
COMPUTATIONAL_LABELS = ("D0", "D1", "S0", "S1")
COMPUTATIONAL_INDICES = (0, 1, 3, 4)
LEAKAGE_INDICES = (2, 5)

HERMITIAN_TOL = 1e-12

# Half-spin operators (eigenvalues +-1/2) on the atomic qubit (D, S).
SX = np.array([[0, 0.5], [0.5, 0]], dtype=complex)
SY = np.array([[0, -0.5j], [0.5j, 0]], dtype=complex)
SZ = np.array([[0.5, 0], [0, -0.5]], dtype=complex)
SPLUS = np.array([[0, 1], [0, 0]], dtype=complex)  # |D><S|
SMINUS = SPLUS.T.copy()
PROJ_D2 = np.array([[1, 0], [0, 0]], dtype=complex)
PROJ_S2 = np.array([[0, 0], [0, 1]], dtype=complex)

# Truncated motional ladder (3 levels); ADAG|2> = 0.
A = np.diag([1.0, np.sqrt(2.0)], k=1).astype(complex)
ADAG = A.conj().T.copy()
NUM = ADAG @ A

I2 = np.eye(2, dtype=complex)
I3 = np.eye(3, dtype=complex)
I6 = np.eye(6, dtype=complex)

# Pauli matrices in the (D, S) / (0, 1) computational bases.
PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


class NotHermitianError(ValueError):
    """Raised when a generator handed to the exponential is not Hermitian."""


def kron(atomic: np.ndarray, motional: np.ndarray) -> np.ndarray:
    """Tensor product of a 2x2 atomic and a 3x3 motional operator."""
    atomic = np.asarray(atomic, dtype=complex)
    motional = np.asarray(motional, dtype=complex)
    if atomic.shape != (2, 2) or motional.shape != (3, 3):
        raise ValueError(f"expected 2x2 and 3x3 factors, got {atomic.shape} and {motional.shape}")
    return np.kron(atomic, motional)


# Projectors onto the bright (S) and dark (D) manifolds.
P_S = kron(PROJ_S2, I3)
P_D = kron(PROJ_D2, I3)


def basis_index(label: str) -> int:
    """Index of a basis label such as ``"S0"`` in the six-dimensional basis."""
    try:
        return BASIS_LABELS.index(label)
    except ValueError:
        raise ValueError(f"unknown basis label {label!r}") from None


def ket(label: str) -> np.ndarray:
    """Basis state vector for a label such as ``"D1"``."""
    v = np.zeros(6, dtype=complex)
    v[basis_index(label)] = 1.0
    return v


def state_from_amplitudes(amplitudes: dict[str, complex]) -> np.ndarray:
    """Normalized state vector from a ``{label: amplitude}`` mapping."""
    v = sum((amp * ket(lab) for lab, amp in amplitudes.items()), np.zeros(6, dtype=complex))
    norm = np.linalg.norm(v)
    if norm == 0:
        raise ValueError("zero state")
    return v / norm


def dm(psi: np.ndarray) -> np.ndarray:
    """Density matrix |psi><psi|."""
    psi = np.asarray(psi, dtype=complex)
    return np.outer(psi, psi.conj())


def is_hermitian(h: np.ndarray, tol: float = HERMITIAN_TOL) -> bool:
    return bool(np.max(np.abs(h - h.conj().T), initial=0.0) <= tol * max(1.0, np.max(np.abs(h), initial=0.0)))


def unitarity_error(u: np.ndarray) -> float:
    """Frobenius norm of U^dag U - I."""
    return float(np.linalg.norm(u.conj().T @ u - np.eye(u.shape[0])))


def expm_hermitian(h: np.ndarray, t: float) -> np.ndarray:
    """Return exp(-i H t) for Hermitian H via eigendecomposition.

    Args:
        h: Hermitian generator (rad/s when ``t`` is in seconds).
        t: Evolution time.

    Raises:
        NotHermitianError: If ``h`` deviates from Hermitian by more than 1e-12
            (relative to its largest entry).
    """
    h = np.asarray(h, dtype=complex)
    if not is_hermitian(h):
        raise NotHermitianError("generator is not Hermitian")
    h = 0.5 * (h + h.conj().T)
    w, v = np.linalg.eigh(h)
    return (v * np.exp(-1j * w * t)) @ v.conj().T


def expm_hermitian_batch(h: np.ndarray, t: np.ndarray) -> np.ndarray:
    """Batched exp(-i H_k t_k) for a stack of Hermitian generators.

    Args:
        h: Array of shape (n, d, d), assumed Hermitian (symmetrized here).
        t: Times, shape (n,) or scalar.
    """
    h = np.asarray(h, dtype=complex)
    h = 0.5 * (h + np.conj(np.swapaxes(h, -1, -2)))
    w, v = np.linalg.eigh(h)
    t = np.broadcast_to(np.asarray(t, dtype=float), w.shape[:-1])
    phases = np.exp(-1j * w * t[..., None])
    return (v * phases[..., None, :]) @ np.conj(np.swapaxes(v, -1, -2))


@dataclass(frozen=True)
class ComputationalBlock:
    """Result of restricting a 6x6 density matrix to the computational subspace.

    Attributes:
        rho: 4x4 block in the order (D0, D1, S0, S1).
        p_leak: Population outside the subspace, 1 - Tr(block).
        renormalized: Whether ``rho`` was divided by its trace.
    """

    rho: np.ndarray
    p_leak: float
    renormalized: bool = False


def project_computational(rho: np.ndarray, renormalize: bool = False) -> ComputationalBlock:
    """Extract the {D0, D1, S0, S1} block of a 6x6 density matrix."""
    rho = np.asarray(rho, dtype=complex)
    idx = np.array(COMPUTATIONAL_INDICES)
    block = rho[np.ix_(idx, idx)].copy()
    tr = float(np.real(np.trace(block)))
    p_leak = float(np.real(np.trace(rho))) - tr
    if renormalize and tr > 0:
        block = block / tr
    return ComputationalBlock(rho=block, p_leak=p_leak, renormalized=renormalize and tr > 0)


def embed_computational(op4: np.ndarray) -> np.ndarray:
    """Embed a 4x4 operator on {D0, D1, S0, S1} into the 6x6 space (zero elsewhere)."""
    out = np.zeros((6, 6), dtype=complex)
    idx = np.array(COMPUTATIONAL_INDICES)
    out[np.ix_(idx, idx)] = op4
    return out


def restrict_computational(op6: np.ndarray) -> np.ndarray:
    """The {D0, D1, S0, S1} block of a 6x6 operator."""
    idx = np.array(COMPUTATIONAL_INDICES)
    return np.asarray(op6)[np.ix_(idx, idx)].copy()


def trace_distance(rho: np.ndarray, sigma: np.ndarray) -> float:
    """Half the trace norm of the difference of two Hermitian matrices."""
    w = np.linalg.eigvalsh(np.asarray(rho) - np.asarray(sigma))
    return 0.5 * float(np.sum(np.abs(w)))


def align_global_phase(u: np.ndarray, target: np.ndarray) -> np.ndarray:
    """Multiply ``u`` by the global phase that best matches ``target``."""
    ov = np.trace(target.conj().T @ u)
    if abs(ov) == 0:
        return u
    return u * np.conj(ov) / abs(ov)


def phase_aligned_distance(u: np.ndarray, target: np.ndarray) -> float:
    """Operator-norm distance between ``u`` and ``target`` after global-phase alignment."""
    return float(np.linalg.norm(align_global_phase(u, target) - target, ord=2))
