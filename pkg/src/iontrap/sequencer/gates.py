"""Ideal rotation operators and operation strings.

Rotations (half-spin convention)::

    Rx(t)  = exp(-i t SX (x) I)          Ry(t)  = exp(-i t SY (x) I)
    Rx+(t) = exp(t (S+ a^dag - S- a)/2)  Ry+(t) = exp(-i t (S+ a^dag + S- a)/2)

Both families are instances of exp(-i theta/2 (e^{i p} G + h.c.)) with
G = S+ (x) I (carrier) or G = S+ (x) a^dag (blue sideband) and an effective
phase p. Operation strings such as ``"Ry(-pi) Rx+(pi/2)"`` are written like
operator products: the rightmost operation acts first.
"""

from __future__ import annotations

import re
from functools import lru_cache

import numpy as np

from .. import qlinalg as ql

CARRIER_GENERATOR = ql.kron(ql.SPLUS, ql.I3)
SIDEBAND_GENERATOR = ql.kron(ql.SPLUS, ql.ADAG)

# Effective coupling phase of each named rotation.
ROTATION_PHASES = {"Rx": 0.0, "Ry": -np.pi / 2, "Rx+": np.pi / 2, "Ry+": 0.0}
ROTATION_TRANSITIONS = {"Rx": "carrier", "Ry": "carrier", "Rx+": "blue_sideband", "Ry+": "blue_sideband"}
# The sideband coupling <1|E(eta)|0> carries a factor i, so the laser phase is
# the effective phase minus pi/2 on the sideband.
LASER_PHASE_OFFSET = {"carrier": 0.0, "blue_sideband": -np.pi / 2}


def generator(transition: str) -> np.ndarray:
    if transition == "carrier":
        return CARRIER_GENERATOR
    if transition == "blue_sideband":
        return SIDEBAND_GENERATOR
    raise ValueError(f"unknown transition {transition!r}")


def coupling_rotation(transition: str, theta: float, phase: float) -> np.ndarray:
    """exp(-i theta/2 (e^{i phase} G + h.c.)) for the given transition."""
    g = np.exp(1j * phase) * generator(transition)
    return ql.expm_hermitian(0.5 * (g + g.conj().T), theta)


def rotation_operator(name: str, theta: float) -> np.ndarray:
    """Ideal 6x6 operator of a named rotation (``Rx``, ``Ry``, ``Rx+``, ``Ry+``)."""
    if name not in ROTATION_PHASES:
        raise ValueError(f"unknown rotation {name!r}")
    return coupling_rotation(ROTATION_TRANSITIONS[name], theta, ROTATION_PHASES[name])


def laser_phase(name: str, theta: float) -> tuple[float, float]:
    """(|theta|, laser phase) realizing a named rotation; negative angles flip the phase by pi."""
    transition = ROTATION_TRANSITIONS[name]
    phase = ROTATION_PHASES[name] + LASER_PHASE_OFFSET[transition]
    if theta < 0:
        phase += np.pi
    return abs(theta), float(np.mod(phase, 2 * np.pi))


_TOKEN = re.compile(r"(R[xy]\+?)\(([^()]*)\)")
_ANGLE = re.compile(r"^\s*([+-]?)\s*(\d*\.?\d*)\s*\*?\s*(pi)?\s*(?:/\s*(\d*\.?\d+))?\s*$")


def parse_angle(text: str) -> float:
    """Parse angles such as ``pi``, ``-pi/2``, ``3*pi/4`` or ``0.25``."""
    m = _ANGLE.match(text)
    if not m or (not m.group(2) and not m.group(3)):
        raise ValueError(f"cannot parse angle {text!r}")
    sign, coeff, has_pi, denom = m.groups()
    value = float(coeff) if coeff else 1.0
    if has_pi:
        value *= np.pi
    if denom:
        value /= float(denom)
    return -value if sign == "-" else value


@lru_cache(maxsize=None)
def parse_operations(text: str) -> tuple[tuple[str, float], ...]:
    """Parse an operation string into (name, angle) pairs in application order.

    ``"I"`` or ``""`` denotes the identity (no operations).
    """
    stripped = text.replace(" ", "")
    if stripped in ("", "I"):
        return ()
    ops = _TOKEN.findall(stripped)
    if "".join(f"{n}({a})" for n, a in ops) != stripped:
        raise ValueError(f"cannot parse operation string {text!r}")
    return tuple((name, parse_angle(arg)) for name, arg in reversed(ops))


def operation_unitary(text: str) -> np.ndarray:
    """Ideal 6x6 unitary of an operation string."""
    u = np.eye(6, dtype=complex)
    for name, theta in parse_operations(text):
        u = rotation_operator(name, theta) @ u
    return u
