"""Process matrix (chi) in the two-qubit Pauli basis and fidelity measures.

Basis E_m = P_a (x) P_b with P in (I, X, Y, Z), atomic qubit first, ordered
II, IX, IY, IZ, XI, ..., ZZ. The Paulis are unnormalized, so a trace-preserving
map has Tr chi = 1 and a unitary U = sum_m u_m E_m has chi = |u><u|.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import product

import numpy as np

from .. import qlinalg as ql
from .measurements import MEASUREMENT_TABLE, measurement_operators
from .mle import clip_to_physical, mle_psd
from .state import PSD_TOL, prep_states

D = 4
PAULI_LABELS = tuple(a + b for a, b in product("IXYZ", repeat=2))


@lru_cache(maxsize=1)
def pauli_basis() -> np.ndarray:
    """(16, 4, 4) operators E_m in the documented order."""
    return np.array([np.kron(ql.PAULI[a], ql.PAULI[b]) for a, b in PAULI_LABELS])


def pauli_coefficients(op: np.ndarray) -> np.ndarray:
    """Coefficients u_m with op = sum_m u_m E_m."""
    return np.einsum("mab,ab->m", pauli_basis().conj(), op) / D


def pauli_expand(coeffs: np.ndarray) -> np.ndarray:
    """Inverse of ``pauli_coefficients``."""
    return np.einsum("m,mab->ab", coeffs, pauli_basis())


def chi_from_unitary(u: np.ndarray) -> np.ndarray:
    """chi = |u><u| for a 4x4 unitary; invariant under the global phase of u."""
    c = pauli_coefficients(u)
    return np.outer(c, c.conj())


def apply_chi(chi: np.ndarray, rho: np.ndarray) -> np.ndarray:
    """E(rho) = sum_mn chi_mn E_m rho E_n^dag."""
    e = pauli_basis()
    return np.einsum("mn,mab,bc,ndc->ad", chi, e, rho, e.conj())


def chi_from_kraus(kraus) -> np.ndarray:
    """chi of a channel given by Kraus operators."""
    return sum(chi_from_unitary(k) for k in kraus)


@lru_cache(maxsize=1)
def _chi_design() -> np.ndarray:
    """Matrix B with vec(S) = B vec(chi) for the column-stacked superoperator S."""
    e = pauli_basis()
    cols = [np.kron(e[n].conj(), e[m]).ravel(order="F") for m in range(16) for n in range(16)]
    return np.array(cols).T


def _vec(x: np.ndarray) -> np.ndarray:
    return x.ravel(order="F")


def superoperator_from_io(inputs: np.ndarray, outputs: np.ndarray) -> np.ndarray:
    """Linear map S with vec(out_i) = S vec(in_i), from 16 spanning input/output pairs.

    Raises:
        ValueError: If the inputs do not span the operator space.
    """
    r_in = np.array([_vec(x) for x in inputs]).T
    r_out = np.array([_vec(x) for x in outputs]).T
    if np.linalg.matrix_rank(r_in, tol=1e-9) < D * D:
        raise ValueError("input states do not span the operator space")
    return r_out @ np.linalg.inv(r_in)


def chi_from_superoperator(s: np.ndarray) -> np.ndarray:
    chi = np.linalg.solve(_chi_design(), s.ravel(order="F")).reshape(16, 16)
    return 0.5 * (chi + chi.conj().T)


@lru_cache(maxsize=1)
def _cell_tensor() -> np.ndarray:
    """K[i, j, m, n] = Tr(M_j E_m rho_i E_n^dag) for the table preparations and measurements."""
    e = pauli_basis()
    ops = measurement_operators(MEASUREMENT_TABLE)
    preps = prep_states()
    left = np.einsum("jab,mbc->jmac", ops, e)
    right = np.einsum("icd,nda->inca", preps, e.conj().transpose(0, 2, 1))
    return np.einsum("jmac,inca->ijmn", left, right)


@lru_cache(maxsize=1)
def _trace_tensor() -> np.ndarray:
    """T[i, m, n] = Tr(E_m rho_i E_n^dag)."""
    e = pauli_basis()
    return np.einsum("mab,ibc,nac->imn", e, prep_states(), e.conj())


def _hermitian_cells(k: np.ndarray) -> np.ndarray:
    h = k.transpose(0, 2, 1)
    return 0.5 * (h + h.conj().transpose(0, 2, 1))


def cell_operators() -> tuple[np.ndarray, np.ndarray]:
    """Cell operators for the chi likelihood, cells ordered (input, measurement).

    Returns:
        (H, N), each (240, 16, 16) Hermitian, with Tr(H_c chi) the unnormalized
        success probability and Tr(N_c chi) the trace of the corresponding output.
    """
    h = _hermitian_cells(_cell_tensor().reshape(16 * 15, 16, 16))
    n = _hermitian_cells(np.repeat(_trace_tensor(), 15, axis=0))
    return h, n


def predicted_probabilities(chi: np.ndarray) -> np.ndarray:
    """(16, 15) success probabilities implied by chi for the table preparations."""
    return np.real(np.einsum("ijmn,mn->ij", _cell_tensor(), chi))


@dataclass(frozen=True)
class ChiMatrix:
    """Process matrix with its provenance flags.

    Attributes:
        chi: 16x16 Hermitian matrix.
        cp_enforced: True when positivity holds by construction (MLE).
        trace_normalized: True when Tr chi = 1 is imposed.
        method: ``"linear"`` or ``"mle"``.
    """

    chi: np.ndarray
    cp_enforced: bool
    trace_normalized: bool
    method: str

    @property
    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.chi)[0])

    @property
    def tp_violation(self) -> float:
        """Operator norm of sum_mn chi_mn E_n^dag E_m - I."""
        return tp_violation(self.chi)


def tp_violation(chi: np.ndarray) -> float:
    e = pauli_basis()
    s = np.einsum("mn,nba,mbc->ac", chi, e.conj(), e)
    return float(np.linalg.norm(s - np.eye(D), 2))


def chi_from_io(inputs: np.ndarray, outputs: np.ndarray, method: str = "linear",
                successes=None, shots=None, gtol: float = 1e-6) -> ChiMatrix:
    """Process matrix from input states and reconstructed outputs.

    Args:
        inputs: (16, 4, 4) prepared states (the table states for ``"mle"``).
        outputs: (16, 4, 4) output states.
        method: ``"linear"`` solves the linear system exactly; ``"mle"`` maximizes
            the binomial likelihood of all 16 x 15 cells with chi = T^dag T / Tr.
        successes: (16, 15) counts (or probabilities with shots = 1), MLE only;
            derived from ``outputs`` when omitted.
        shots: Trials per cell, MLE only.
        gtol: MLE gradient tolerance.
    """
    lin = chi_from_superoperator(superoperator_from_io(inputs, outputs))
    if method == "linear":
        return ChiMatrix(lin, cp_enforced=False, trace_normalized=False, method="linear")
    if method != "mle":
        raise ValueError("method must be 'linear' or 'mle'")
    if successes is None:
        ops = measurement_operators(MEASUREMENT_TABLE)
        successes = np.real(np.einsum("jab,iba->ij", ops, outputs))
        shots = 1.0
    s = np.asarray(successes, dtype=float).reshape(16, 15)
    n = np.broadcast_to(np.asarray(1.0 if shots is None else shots, dtype=float), s.shape)
    h, norm = cell_operators()
    res = mle_psd(h, s.ravel(), n.ravel(), clip_to_physical(lin), norm=norm, gtol=gtol)
    return ChiMatrix(res.estimate, cp_enforced=True, trace_normalized=True, method="mle")


def process_fidelity(chi_expt, chi_id) -> float:
    """F_p = Tr(chi_id chi_expt)."""
    a = chi_expt.chi if isinstance(chi_expt, ChiMatrix) else chi_expt
    b = chi_id.chi if isinstance(chi_id, ChiMatrix) else chi_id
    return float(np.real(np.trace(b @ a)))


def haar_mean_fidelity(f_p: float, d: int = D) -> float:
    """Average state fidelity implied by the process fidelity, (d F_p + 1) / (d + 1)."""
    return (d * f_p + 1.0) / (d + 1.0)


def mean_fidelity(outputs: np.ndarray, target: np.ndarray, inputs: np.ndarray | None = None) -> float:
    """Mean of Tr(rho_id rho_out) over the inputs, with rho_id = U rho_in U^dag."""
    inputs = prep_states() if inputs is None else inputs
    return float(np.mean(per_state_fidelities(outputs, target, inputs)))


def per_state_fidelities(outputs: np.ndarray, target: np.ndarray, inputs: np.ndarray | None = None) -> np.ndarray:
    inputs = prep_states() if inputs is None else inputs
    ideal = np.einsum("ab,ibc,dc->iad", target, inputs, target.conj())
    return np.real(np.einsum("iab,iba->i", ideal, outputs))


def haar_average_fidelity_mc(chi: np.ndarray, target: np.ndarray, n_states: int = 10000,
                             rng_seed=0) -> float:
    """Monte-Carlo average of <psi|U^dag E(psi) U|psi> over Haar-random pure states."""
    rng = np.random.default_rng(rng_seed)
    z = rng.standard_normal((n_states, D)) + 1j * rng.standard_normal((n_states, D))
    z /= np.linalg.norm(z, axis=1, keepdims=True)
    e = pauli_basis()
    ez = np.einsum("mab,kb->kma", e, z)
    uz = z @ target.T
    amp = np.einsum("ka,kma->km", uz.conj(), ez)
    f = np.real(np.einsum("km,mn,kn->k", amp, chi, amp.conj()))
    return float(f.mean())


def is_physical(chi: np.ndarray, tol: float = PSD_TOL) -> bool:
    return float(np.linalg.eigvalsh(chi)[0]) >= -tol
