"""Least-squares fits used by the calibration experiments.

All fits are unweighted unless a sigma is given. Frequencies are seeded from
the FFT peak of the zero-padded, mean-subtracted data and contrasts from the
data range.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import curve_fit


class FitError(RuntimeError):
    """A fit failed or the data cannot constrain the model."""


@dataclass
class ExperimentResult:
    """Scan data plus fit parameters.

    Attributes:
        name: Experiment name.
        x: Scan variable values.
        y: Observable values.
        stderr: Standard errors of ``y`` (zeros for exact probabilities).
        params: Fitted parameter values.
        errors: One-sigma uncertainties of ``params``.
        residuals: Fit residuals (data minus model).
        columns: Names of (x, y, stderr) for CSV output.
        meta: Free-form extra information.
    """

    name: str
    x: np.ndarray
    y: np.ndarray
    stderr: np.ndarray | None = None
    params: dict = field(default_factory=dict)
    errors: dict = field(default_factory=dict)
    residuals: np.ndarray | None = None
    columns: tuple[str, str, str] = ("scan_value", "observable", "stderr")
    meta: dict = field(default_factory=dict)

    def to_csv(self, header: str = "") -> str:
        """CSV with comment header lines, a column row and a trailing fit summary block."""
        lines = [f"# {h}" for h in header.splitlines()] if header else []
        lines.append(",".join(self.columns))
        se = np.zeros_like(self.y, dtype=float) if self.stderr is None else self.stderr
        for a, b, c in zip(self.x, self.y, se):
            lines.append(f"{a:.12g},{b:.12g},{c:.6g}")
        lines.append("# [fit]")
        for k, v in self.params.items():
            err = self.errors.get(k)
            lines.append(f"# {k} = {v:.12g}" + ("" if err is None else f" +- {err:.6g}"))
        if self.residuals is not None and len(self.residuals):
            lines.append(f"# rms_residual = {float(np.sqrt(np.mean(self.residuals**2))):.6g}")
        return "\n".join(lines) + "\n"


def _errors(cov: np.ndarray) -> np.ndarray:
    d = np.diag(cov)
    return np.sqrt(np.where(np.isfinite(d) & (d > 0), d, np.inf))


def fft_frequency_guess(x: np.ndarray, y: np.ndarray, pad: int = 16) -> float:
    """Dominant frequency (cycles per unit of x) of uniformly sampled data."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float) - np.mean(y)
    if len(x) < 3:
        raise FitError("need at least three points")
    dx = (x[-1] - x[0]) / (len(x) - 1)
    n = pad * len(x)
    spec = np.abs(np.fft.rfft(y, n=n))
    freqs = np.fft.rfftfreq(n, dx)
    k = int(np.argmax(spec[1:]) + 1)
    return float(freqs[k])


def fit_sinusoid(x, y, sigma=None, f_guess: float | None = None) -> tuple[dict, dict, np.ndarray]:
    """Fit y = c + a cos(2 pi f x + phase) with a >= 0, f >= 0."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    f0 = fft_frequency_guess(x, y) if f_guess is None else f_guess
    best = None
    # A short record holds less than a period; scan the frequency seed.
    seeds = [f0] + [f0 * s for s in (0.5, 0.75, 1.5, 2.0)]
    span = x[-1] - x[0]
    seeds += [k / span for k in (0.25, 0.5, 1.0)]
    for fs in seeds:
        for ph in (0.0, np.pi / 2, np.pi, -np.pi / 2):
            p0 = [np.mean(y), 0.5 * (np.max(y) - np.min(y)) + 1e-12, fs, ph]
            try:
                popt, pcov = curve_fit(lambda t, c, a, f, p: c + a * np.cos(2 * np.pi * f * t + p), x, y, p0=p0,
                                       sigma=sigma, maxfev=20000)
            except RuntimeError:
                continue
            r = y - (popt[0] + popt[1] * np.cos(2 * np.pi * popt[2] * x + popt[3]))
            cost = float(np.sum(r**2))
            if best is None or cost < best[0] - 1e-15:
                best = (cost, popt, pcov, r)
    if best is None:
        raise FitError("sinusoid fit failed")
    _, popt, pcov, r = best
    c, a, f, p = popt
    if a < 0:
        a, p = -a, p + np.pi
    if f < 0:
        f, p = -f, -p
    err = _errors(pcov)
    names = ("offset", "amplitude", "frequency", "phase")
    vals = (c, a, f, float(np.angle(np.exp(1j * p))))
    return dict(zip(names, map(float, vals))), dict(zip(names, map(float, err))), r


def fit_rabi(t, y) -> tuple[dict, dict, np.ndarray]:
    """Fit P(t) = (C / 2) (1 - exp(-gamma t) cos(2 pi f t)) starting from the dark state."""
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)

    def model(tt, c, f, g):
        return 0.5 * c * (1 - np.exp(-g * tt) * np.cos(2 * np.pi * f * tt))

    f0 = fft_frequency_guess(t, y)
    c0 = max(np.max(y) - np.min(y), 1e-3)
    try:
        popt, pcov = curve_fit(model, t, y, p0=[c0, f0, 1.0 / (t[-1] + 1e-30)],
                               bounds=([0, 0, 0], [2.0, np.inf, np.inf]), maxfev=20000)
    except RuntimeError as exc:
        raise FitError(f"Rabi fit failed: {exc}") from exc
    r = y - model(t, *popt)
    names = ("contrast", "frequency", "decay_rate")
    return dict(zip(names, map(float, popt))), dict(zip(names, map(float, _errors(pcov)))), r


def fit_gaussian_envelope(t, c) -> tuple[dict, dict, np.ndarray]:
    """Fit c(t) = A exp(-(t / T2)^2); T2 is reported as inf when no decay is resolved.

    The decay is fitted through k = 1 / T2^2 >= 0, so a flat envelope returns
    k = 0 instead of failing.
    """
    t = np.asarray(t, dtype=float)
    c = np.asarray(c, dtype=float)

    def model(tt, a, k):
        return a * np.exp(-k * tt**2)

    span = max(t[-1], 1e-30)
    if np.all(c > 0) and len(t) > 2:
        # Linear fit of ln c against t^2 detects envelopes with no resolved decay.
        k_lin = -np.polyfit(t**2, np.log(c), 1)[0]
        if k_lin * span**2 < 1e-9:
            a = float(np.mean(c))
            ea = float(np.std(c, ddof=1) / np.sqrt(len(c)))
            return {"amplitude": a, "T2": float("inf")}, {"amplitude": ea, "T2": float("inf")}, c - a
    try:
        popt, pcov = curve_fit(model, t, c, p0=[max(c[0], 1e-3), 1.0 / span**2],
                               bounds=([0, 0], [np.inf, np.inf]), maxfev=20000)
    except RuntimeError as exc:
        raise FitError(f"Gaussian envelope fit failed: {exc}") from exc
    a, k = popt
    ea, ek = _errors(pcov)
    r = c - model(t, *popt)
    if k * span**2 < 1e-9:
        return {"amplitude": float(a), "T2": float("inf")}, {"amplitude": float(ea), "T2": float("inf")}, r
    t2 = 1.0 / np.sqrt(k)
    return {"amplitude": float(a), "T2": float(t2)}, {"amplitude": float(ea), "T2": float(0.5 * t2 * ek / k)}, r


def fit_offset(x, y, a_fixed: float, sigma=None) -> tuple[float, float, np.ndarray]:
    """One-parameter fit of y = a_fixed / x + b.

    Returns:
        (b, sigma_b, residuals). Without ``sigma`` the uncertainty comes from
        the residual scatter; with ``sigma`` it is the weighted standard error.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    d = y - a_fixed / x
    if sigma is None:
        b = float(np.mean(d))
        r = d - b
        dof = max(len(d) - 1, 1)
        return b, float(np.sqrt(np.sum(r**2) / dof / len(d))), r
    w = 1.0 / np.asarray(sigma, dtype=float) ** 2
    b = float(np.sum(w * d) / np.sum(w))
    return b, float(np.sqrt(1.0 / np.sum(w))), d - b


def fit_line(x, y) -> tuple[dict, dict, np.ndarray]:
    """Ordinary least-squares line y = intercept + slope x."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if len(x) < 3:
        coef = np.polyfit(x, y, 1)
        return {"slope": float(coef[0]), "intercept": float(coef[1])}, {"slope": 0.0, "intercept": 0.0}, \
            y - np.polyval(coef, x)
    coef, cov = np.polyfit(x, y, 1, cov="unscaled")
    r = y - np.polyval(coef, x)
    s2 = float(np.sum(r**2) / (len(x) - 2))
    err = np.sqrt(np.clip(np.diag(cov) * s2, 0, None))
    return {"slope": float(coef[0]), "intercept": float(coef[1])}, \
        {"slope": float(err[0]), "intercept": float(err[1])}, r
