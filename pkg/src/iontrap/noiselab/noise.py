"""Laser noise model and trajectory sampling.

Frequency noise: the laser frequency offset eps(t) performs a Wiener random
walk that starts at zero at the beginning of each program, Var eps(t) = D t.
Its integral Phi(t) has Var Phi(t) = D t^3 / 3, so a Ramsey experiment with
delay t loses contrast as exp(-D t^3 / 6). D is anchored to a reference pair
(300 Hz linewidth equivalent, 660 us coherence time), D = 6 / T^3, and scales
as the square of the linewidth equivalent.

Intensity noise: a slow per-run offset uniform in +-slow_pp/2 plus a fast
per-pulse component uniform in +-fast_pp/2. The Rabi frequency scales with
the square root of the intensity.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * np.pi
REFERENCE_LINEWIDTH = TWO_PI * 300.0
REFERENCE_T2 = 660e-6


@dataclass(frozen=True)
class PulseNoiseSample:
    """Per-pulse errors for n trajectories and k pulses (arrays of shape (n, k)).

    Attributes:
        detuning: Laser frequency offset during each pulse (rad/s).
        phase: Laser phase offset -Phi(t_k) + eps_k t_k (rad).
        scale: Rabi-frequency multiplier.
    """

    detuning: np.ndarray
    phase: np.ndarray
    scale: np.ndarray


@dataclass(frozen=True)
class NoiseTrajectory:
    """Time-resolved noise realization on a grid (arrays of shape (n, len(times)))."""

    times: np.ndarray
    detuning: np.ndarray
    phase: np.ndarray
    intensity: np.ndarray


@dataclass(frozen=True)
class NoiseModel:
    """Technical noise magnitudes.

    Attributes:
        laser_linewidth_equiv: Frequency-noise scale (rad/s); 2 pi x 300 Hz maps to
            a 660 us Ramsey coherence time.
        intensity_fast_pp: Peak-to-peak fractional intensity noise per pulse.
        intensity_slow_pp: Peak-to-peak fractional intensity drift per run.
        heating_rate: Motional heating rate (quanta/s), applied during waits.
        rng_seed: Optional default seed.
    """

    laser_linewidth_equiv: float = 0.0
    intensity_fast_pp: float = 0.0
    intensity_slow_pp: float = 0.0
    heating_rate: float = 0.0
    rng_seed: int | None = None

    def __post_init__(self):
        for name in ("laser_linewidth_equiv", "intensity_fast_pp", "intensity_slow_pp", "heating_rate"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")

    @classmethod
    def reference(cls, **overrides) -> "NoiseModel":
        """Reference magnitudes: 300 Hz linewidth, 0.1% fast and 1% slow intensity noise."""
        base = dict(laser_linewidth_equiv=REFERENCE_LINEWIDTH, intensity_fast_pp=1e-3, intensity_slow_pp=1e-2)
        base.update(overrides)
        return cls(**base)

    @property
    def diffusion(self) -> float:
        """Frequency diffusion constant D (rad^2/s^3)."""
        return 6.0 / REFERENCE_T2**3 * (self.laser_linewidth_equiv / REFERENCE_LINEWIDTH) ** 2

    @property
    def coherence_time(self) -> float:
        """1/e time of the Ramsey contrast exp(-D t^3/6) (s); inf without frequency noise."""
        d = self.diffusion
        return float("inf") if d == 0 else (6.0 / d) ** (1.0 / 3.0)

    @property
    def is_null(self) -> bool:
        return self.diffusion == 0 and self.intensity_fast_pp == 0 and self.intensity_slow_pp == 0

    def ramsey_contrast(self, t) -> np.ndarray:
        """Ensemble Ramsey contrast after free evolution ``t`` starting at the program start."""
        return np.exp(-self.diffusion * np.asarray(t, dtype=float) ** 3 / 6.0)

    def _walk(self, times: np.ndarray, n: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
        """Exact joint samples of (eps, Phi) at sorted ``times``, both zero at t = 0."""
        times = np.asarray(times, dtype=float)
        k = len(times)
        z = rng.standard_normal((n, k, 2))
        d = self.diffusion
        eps = np.zeros((n, k))
        phi = np.zeros((n, k))
        e_prev = np.zeros(n)
        p_prev = np.zeros(n)
        t_prev = 0.0
        for j in range(k):
            h = times[j] - t_prev
            if h < 0:
                raise ValueError("times must be non-decreasing")
            de = np.sqrt(d * h) * z[:, j, 0]
            dp = np.sqrt(d * h**3) * (0.5 * z[:, j, 0] + z[:, j, 1] / (2.0 * np.sqrt(3.0)))
            p_prev = p_prev + e_prev * h + dp
            e_prev = e_prev + de
            eps[:, j] = e_prev
            phi[:, j] = p_prev
            t_prev = times[j]
        return eps, phi

    def sample_pulses(self, starts: np.ndarray, durations: np.ndarray, n: int,
                      rng: np.random.Generator) -> PulseNoiseSample:
        """Per-pulse errors for pulses starting at ``starts`` (program clock)."""
        starts = np.asarray(starts, dtype=float)
        k = len(starts)
        slow = rng.uniform(-0.5, 0.5, size=(n, 1)) * self.intensity_slow_pp
        fast = rng.uniform(-0.5, 0.5, size=(n, k)) * self.intensity_fast_pp
        eps, phi = self._walk(starts, n, rng)
        scale = np.sqrt(1.0 + slow + fast)
        return PulseNoiseSample(detuning=eps, phase=-phi + eps * starts[None, :], scale=scale)


def sample_noise_trajectory(model: NoiseModel, duration: float, n_points: int = 1001,
                            n: int = 1, rng_seed=None) -> NoiseTrajectory:
    """Time-resolved realization of the frequency offset, its phase and the intensity factor.

    Args:
        model: Noise magnitudes.
        duration: Length of the record (s), must be positive.
        n_points: Grid points including t = 0.
        n: Number of independent realizations.
        rng_seed: Seed; defaults to ``model.rng_seed``.
    """
    if not duration > 0:
        raise ValueError("duration must be positive")
    rng = np.random.default_rng(model.rng_seed if rng_seed is None else rng_seed)
    times = np.linspace(0.0, duration, n_points)
    slow = rng.uniform(-0.5, 0.5, size=(n, 1)) * model.intensity_slow_pp
    fast = rng.uniform(-0.5, 0.5, size=(n, n_points)) * model.intensity_fast_pp
    eps, phi = model._walk(times, n, rng)
    return NoiseTrajectory(times=times, detuning=eps, phase=phi, intensity=1.0 + slow + fast)
