"""AC Stark shifts and the per-gate phase bookkeeping that cancels them.

A blue-sideband pulse driven at the Stark-shifted resonance
delta = omega_sec + Delta acts in the QC frame as Z(Delta t) R(phi - Delta t0),
with Z(x) = exp(-i x SZ) and R the ideal rotation. The n-th pulse of a
sequence therefore needs the laser phase

    phi_n + Delta_n t0_n - sum_{i<n} Delta_i t_i

and the running sum is kept in a ``StarkLedger``, like the global time and
global phase registers of the pulse sequencer hardware.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from . import qlinalg as ql
from .frames import PulseParams, TrapLaserParams, laser_frame_hamiltonian


def stark_delta(delta: float, Omega: float, Delta0: float) -> float:
    """Scalar Stark shift Delta = [delta - sqrt(delta^2 + Omega^2)] + Delta0 (rad/s)."""
    return (delta - np.hypot(delta, Omega)) + Delta0


def first_order_shift(delta: float, Omega: float, omega_sec: float) -> float:
    """First-order detuning-dependent shift -A/x with A = Omega^2 / (2 omega_sec), x = delta/omega_sec."""
    return -(Omega**2 / (2.0 * omega_sec)) / (delta / omega_sec)


def generalized_shift_operator(delta: float, Omega: float, t: float) -> tuple[np.ndarray, np.ndarray, float]:
    """Two-level generalized Stark operator R = e^{i delta SZ t} e^{-i (delta SZ + Omega SX) t}.

    Returns:
        (R, axis, angle): the 2x2 operator, the unit rotation axis (x, y, z)
        of the second factor and the scalar correction angle
        [delta - sqrt(delta^2 + Omega^2)] t.

    Raises:
        ValueError: If ``delta`` is zero (axis undefined).
    """
    if delta == 0:
        raise ValueError("rotation axis undefined for zero detuning")
    r = ql.expm_hermitian(-delta * ql.SZ, t) @ ql.expm_hermitian(delta * ql.SZ + Omega * ql.SX, t)
    ratio = Omega / delta
    axis = np.array([ratio, 0.0, 1.0]) / np.sqrt(1.0 + ratio**2)
    angle = (delta - np.hypot(delta, Omega)) * t
    return r, axis, angle


def corrections_for_sideband_gate(delta: float, Omega: float, Delta0: float, t: float, t0: float) -> tuple[float, float]:
    """Phase corrections (phi_s, phi_f) for one sideband gate.

    ``phi_s = -Delta t`` is the Z rotation that follows the gate and
    ``phi_f = Delta t0`` the laser-phase offset of the gate itself, with
    ``Delta = stark_delta(delta, Omega, Delta0)``.
    """
    d = stark_delta(delta, Omega, Delta0)
    return -d * t, d * t0


def phase_rotation(x: float) -> np.ndarray:
    """U_phi(x): phase e^{-i x} on every |D n> state, identity on |S n>."""
    return np.diag(np.exp(-1j * x * np.array([1, 1, 1, 0, 0, 0], dtype=float))).astype(complex)


@dataclass
class StarkLedger:
    """Global-time and global-phase registers.

    Attributes:
        global_time: Time elapsed since the start of the program (s).
        global_phase: Accumulated sum of Delta_i t_i over past pulses (rad).
    """

    global_time: float = 0.0
    global_phase: float = 0.0

    def snapshot(self) -> "StarkLedger":
        return StarkLedger(self.global_time, self.global_phase)

    def wait(self, duration: float) -> None:
        """Advance the clock without drive (no phase accrues)."""
        if duration < 0:
            raise ValueError("negative wait")
        self.global_time += duration


def nth_gate_phase(ledger: StarkLedger, phi: float, t: float, Delta: float, t0: float | None = None) -> float:
    """Corrected laser phase of the next gate; updates ``ledger`` in place.

    Args:
        ledger: Registers reflecting all previous gates.
        phi: Uncorrected (logical) laser phase.
        t: Gate duration (s).
        Delta: Stark shift during this gate (0 for gates that are not corrected).
        t0: Start time; defaults to ``ledger.global_time``. A later start is
            treated as a wait.

    Returns:
        phi + Delta t0 - sum_{i<n} Delta_i t_i.
    """
    if t0 is None:
        t0 = ledger.global_time
    if t0 < ledger.global_time - 1e-15:
        raise ValueError("gate starts before the end of the previous one")
    corrected = phi + Delta * t0 - ledger.global_phase
    ledger.global_phase += Delta * t
    ledger.global_time = t0 + t
    return corrected


def resonant_sideband_detuning(p: TrapLaserParams, order: int = 1, window: float | None = None) -> float:
    """Laser detuning of the Stark-shifted blue-sideband resonance of the full model.

    The resonance is where the dressed |S0> / |D1> pair of the laser-frame
    Hamiltonian has minimal splitting, which is how a spectrum locates it.

    Args:
        p: Trap and laser constants.
        order: Motional manifold: 1 for {S0, D1}, 2 for {S1, D2}.
        window: Half-width of the search bracket (rad/s); defaults to Omega/4.
    """
    s_idx, d_idx = (3, 1) if order == 1 else (4, 2)
    guess = p.omega_sec + stark_delta(p.omega_sec, p.Omega, p.Delta0)
    if window is None:
        window = max(p.Omega / 4.0, 2 * np.pi * 100.0)

    def gap(d):
        w, v = np.linalg.eigh(laser_frame_hamiltonian(p, PulseParams(d, 0.0, 0.0)))
        weight = np.abs(v[s_idx]) ** 2 + np.abs(v[d_idx]) ** 2
        i, j = np.argsort(weight)[-2:]
        return abs(w[i] - w[j])

    res = minimize_scalar(gap, bounds=(guess - window, guess + window), method="bounded",
                          options={"xatol": 1e-3})
    return float(res.x)


def stark_model_residual(p: TrapLaserParams) -> float:
    """Difference between the true sideband shift and ``stark_delta`` at resonance (rad/s).

    Adding this to the Delta0 used by the corrections is the calibration the
    experiment performs by tuning Delta0 until sideband Ramsey stays flat.
    """
    d = resonant_sideband_detuning(p)
    return (d - p.omega_sec) - stark_delta(d, p.Omega, p.Delta0)
