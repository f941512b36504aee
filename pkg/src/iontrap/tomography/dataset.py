"""Tomography datasets, their text format and the full analysis pipeline."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .measurements import MEASUREMENT_TABLE, measurement_operators
from .mle import clip_to_physical, mle_psd
from .process import (
    PAULI_LABELS,
    ChiMatrix,
    chi_from_io,
    chi_from_unitary,
    haar_mean_fidelity,
    per_state_fidelities,
    predicted_probabilities,
    process_fidelity,
)
from .state import prep_states, reconstruct_rho

N_INPUTS = 16
N_MEAS = 15


@dataclass(frozen=True)
class TomographyDataset:
    """Outcomes of the 16 x 15 tomography cells.

    Attributes:
        successes: (16, 15) success counts; exact probabilities when ``shots`` is None.
        shots: (16, 15) trials per cell, or None for exact probabilities.
    """

    successes: np.ndarray
    shots: np.ndarray | None = None

    def __post_init__(self):
        s = np.asarray(self.successes, dtype=float)
        if s.shape != (N_INPUTS, N_MEAS):
            raise ValueError(f"successes must have shape {(N_INPUTS, N_MEAS)}")
        object.__setattr__(self, "successes", s)
        if self.shots is not None:
            n = np.broadcast_to(np.asarray(self.shots, dtype=int), s.shape).copy()
            if np.any(n <= 0) or np.any(s < 0) or np.any(s > n):
                raise ValueError("need 0 <= successes <= shots and shots > 0")
            object.__setattr__(self, "shots", n)
        elif np.any(s < -1e-12) or np.any(s > 1 + 1e-12):
            raise ValueError("exact probabilities must lie in [0, 1]")

    @property
    def exact(self) -> bool:
        return self.shots is None

    @property
    def frequencies(self) -> np.ndarray:
        return self.successes if self.shots is None else self.successes / self.shots

    @property
    def trials(self) -> np.ndarray:
        return np.ones_like(self.successes) if self.shots is None else self.shots.astype(float)

    @classmethod
    def from_probabilities(cls, probs: np.ndarray, shots: int | None = None, rng_seed=None) -> "TomographyDataset":
        """Exact dataset, or binomial samples with ``shots`` trials per cell."""
        probs = np.clip(np.asarray(probs, dtype=float), 0.0, 1.0)
        if shots is None:
            return cls(probs)
        rng = np.random.default_rng(rng_seed)
        return cls(rng.binomial(int(shots), probs).astype(float), np.full(probs.shape, int(shots)))

    def to_text(self, header: str = "") -> str:
        """Records ``input_index,measurement_index,shots,successes`` (1-based; shots 0 means exact)."""
        lines = [f"# {h}" for h in header.splitlines()] if header else []
        lines.append("input_index,measurement_index,shots,successes")
        for i in range(N_INPUTS):
            for j in range(N_MEAS):
                if self.shots is None:
                    lines.append(f"{i + 1},{j + 1},0,{float(self.successes[i, j])!r}")
                else:
                    lines.append(f"{i + 1},{j + 1},{self.shots[i, j]},{int(self.successes[i, j])}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "TomographyDataset":
        s = np.full((N_INPUTS, N_MEAS), np.nan)
        n = np.zeros((N_INPUTS, N_MEAS), dtype=int)
        for line in text.splitlines():
            line = line.strip()
            if not line or line.startswith("#") or line.startswith("input_index"):
                continue
            i, j, shots, succ = line.split(",")
            s[int(i) - 1, int(j) - 1] = float(succ)
            n[int(i) - 1, int(j) - 1] = int(shots)
        if np.isnan(s).any():
            raise ValueError("dataset is missing cells")
        if np.all(n == 0):
            return cls(s)
        if np.any(n == 0):
            raise ValueError("mixed exact and sampled cells")
        return cls(s, n)


@dataclass(frozen=True)
class TomographyResult:
    """Reconstruction of one dataset against a target unitary.

    Attributes:
        chi: Process matrix.
        outputs: (16, 4, 4) reconstructed output states.
        f_process: F_p = Tr(chi_id chi).
        f_mean: Mean overlap with the ideal outputs over the 16 inputs.
        f_haar: (4 F_p + 1) / 5.
        state_fidelities: Per-input overlaps.
        tp_violation: Trace-preservation defect of chi.
    """

    chi: ChiMatrix
    outputs: np.ndarray
    f_process: float
    f_mean: float
    f_haar: float
    state_fidelities: np.ndarray
    tp_violation: float


def reconstruct_outputs(dataset: TomographyDataset, method: str = "mle") -> np.ndarray:
    """Per-input output states: linear inversion, or MLE when ``method`` is ``"mle"``."""
    ops = measurement_operators(MEASUREMENT_TABLE)
    outs = []
    for i in range(N_INPUTS):
        lin = reconstruct_rho(dataset.frequencies[i]).rho
        if method == "mle" and np.linalg.eigvalsh(lin)[0] < 0:
            lin = mle_psd(ops, dataset.successes[i], dataset.trials[i], clip_to_physical(lin)).estimate
        outs.append(lin)
    return np.array(outs)


def analyze(dataset: TomographyDataset, target: np.ndarray, method: str = "mle") -> TomographyResult:
    """Reconstruct chi and output states and score them against ``target`` (4x4).

    Args:
        dataset: Cell outcomes.
        target: Ideal unitary on {D0, D1, S0, S1}.
        method: ``"linear"`` or ``"mle"`` for both the states and chi.
    """
    outputs = reconstruct_outputs(dataset, method)
    lin_outputs = reconstruct_outputs(dataset, "linear")
    chi = chi_from_io(prep_states(), lin_outputs, method=method, successes=dataset.successes,
                      shots=dataset.trials)
    f_p = process_fidelity(chi, chi_from_unitary(target))
    fs = per_state_fidelities(outputs, target)
    return TomographyResult(chi=chi, outputs=outputs, f_process=f_p, f_mean=float(fs.mean()),
                            f_haar=haar_mean_fidelity(f_p), state_fidelities=fs,
                            tp_violation=chi.tp_violation)


def projection_noise_errorbars(dataset: TomographyDataset, target: np.ndarray, n_resamples: int = 50,
                               rng_seed=0, method: str = "mle") -> dict:
    """Parametric bootstrap of F_p and F_mean.

    Counts are redrawn from the probabilities of the fitted chi, each resample is
    reconstructed in full, and the standard deviations are reported. Exact
    datasets have zero error bars.
    """
    base = analyze(dataset, target, method)
    if dataset.exact:
        return {"f_process": base.f_process, "f_process_std": 0.0, "f_mean": base.f_mean, "f_mean_std": 0.0}
    probs = np.clip(predicted_probabilities(base.chi.chi), 0.0, 1.0)
    fp, fm = [], []
    for k in range(n_resamples):
        rng = np.random.default_rng([int(rng_seed), k])
        counts = rng.binomial(dataset.shots, probs).astype(float)
        r = analyze(TomographyDataset(counts, dataset.shots), target, method)
        fp.append(r.f_process)
        fm.append(r.f_mean)
    return {"f_process": base.f_process, "f_process_std": float(np.std(fp, ddof=1)),
            "f_mean": base.f_mean, "f_mean_std": float(np.std(fm, ddof=1))}


def chi_to_text(chi: ChiMatrix, summary: dict | None = None, header: str = "") -> str:
    """16x16 real and imaginary parts (rows in Pauli order) plus a summary block."""
    lines = [f"# {h}" for h in header.splitlines()] if header else []
    lines.append(f"# basis: {' '.join(PAULI_LABELS)}")
    lines.append(f"# method: {chi.method}; cp_enforced: {chi.cp_enforced}; trace_normalized: {chi.trace_normalized}")
    lines.append("[real]")
    lines += [",".join(f"{x:.12e}" for x in row) for row in np.real(chi.chi)]
    lines.append("[imag]")
    lines += [",".join(f"{x:.12e}" for x in row) for row in np.imag(chi.chi)]
    lines.append("[summary]")
    summary = dict(summary or {})
    summary.setdefault("tp_violation", chi.tp_violation)
    summary.setdefault("min_eigenvalue", chi.min_eigenvalue)
    for k, v in summary.items():
        lines.append(f"{k} = {v:.12g}" if isinstance(v, float) else f"{k} = {v}")
    return "\n".join(lines) + "\n"


def chi_from_text(text: str) -> np.ndarray:
    """Parse the matrix part of ``chi_to_text`` output."""
    block, re_rows, im_rows = None, [], []
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("["):
            block = line
            continue
        if block == "[real]":
            re_rows.append([float(x) for x in line.split(",")])
        elif block == "[imag]":
            im_rows.append([float(x) for x in line.split(",")])
    return np.array(re_rows) + 1j * np.array(im_rows)


def ideal_dataset(target: np.ndarray) -> TomographyDataset:
    """Exact probabilities of a unitary process on the table inputs."""
    probs = predicted_probabilities(chi_from_unitary(target))
    return TomographyDataset(np.clip(probs, 0.0, 1.0))


__all__ = ["TomographyDataset", "TomographyResult", "analyze", "reconstruct_outputs",
           "projection_noise_errorbars", "chi_to_text", "chi_from_text", "ideal_dataset"]
