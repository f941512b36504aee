"""Compilation of named rotations, state preparations, measurements and the CNOT.

Pulses carry logical laser phases. Stark phase corrections are applied either
by the executor at run time (mirroring the sequencer's global time and global
phase registers) or ahead of time with ``apply_stark_corrections``.
"""

from __future__ import annotations

import numpy as np

from ..frames import TrapLaserParams
from ..stark import StarkLedger, nth_gate_phase
from . import gates
from .ir import ConditionalBranch, FluorescenceMeasure, Pulse, PulseProgram, Wait

DETECTION_TIME = 250e-6

# Preparation operations from |S0> and the states they produce, keyed 1..16.
# Amplitudes are over (D0, D1, S0, S1). Entry 10 uses Ry+(pi/2); the variant
# with Rx+(pi/2) produces (|D0> - |S1>)/sqrt2 instead of the listed state.
PREP_TABLE: dict[int, tuple[str, dict[str, complex]]] = {
    1: ("Ry(-pi)", {"D0": 1}),
    2: ("Rx+(-pi)", {"D1": 1}),
    3: ("I", {"S0": 1}),
    4: ("Ry(pi) Rx+(pi)", {"S1": 1}),
    5: ("Rx+(pi) Ry(-pi/2)", {"D0": 1, "D1": 1}),
    6: ("Ry+(-pi) Ry(-pi/2)", {"D0": 1, "D1": 1j}),
    7: ("Ry(-pi/2)", {"D0": 1, "S0": 1}),
    8: ("Rx(pi/2)", {"D0": 1, "S0": 1j}),
    9: ("Ry(-pi) Rx+(-pi/2)", {"D0": 1, "S1": 1}),
    10: ("Ry(-pi) Ry+(pi/2)", {"D0": 1, "S1": 1j}),
    11: ("Rx+(pi/2)", {"D1": 1, "S0": 1}),
    12: ("Ry+(pi/2)", {"D1": 1, "S0": 1j}),
    13: ("Ry(pi/2) Rx+(pi)", {"D1": 1, "S1": 1}),
    14: ("Rx(-pi/2) Rx+(-pi)", {"D1": 1, "S1": 1j}),
    15: ("Ry(-pi) Rx+(-pi) Ry(pi/2)", {"S0": 1, "S1": 1}),
    16: ("Ry(-pi) Ry+(pi) Ry(pi/2)", {"S0": 1, "S1": 1j}),
}
PREP_TABLE_AS_PRINTED_10 = "Ry(-pi) Rx+(pi/2)"

# Target of the CNOT on (D0, D1, S0, S1): the atom controls a motional flip.
CNOT_TARGET = np.array(
    [[1, 0, 0, 0], [0, -1, 0, 0], [0, 0, 0, 1], [0, 0, -1, 0]], dtype=complex
)


def _cnot_pulses() -> tuple[tuple[str, float, float], ...]:
    """CNOT as (transition, theta, effective phase) in application order.

    Built as K^-1 . C . P . C . K where
      * K = B(pi/r2, 0) B(r2 pi, p) B(pi/r2, 0), cos p = cot^2(pi/r2), swaps
        |S0> and |D1> with a relative phase and returns |S1> to itself (the
        {S1, D2} manifold sees rotations pi, 2 pi, pi);
      * P = B(pi, pi/2) B(pi/r2, 0) B(pi, pi/2) B(pi/r2, 0) is the composite
        sideband phase gate diag(1, -1, -1, -1);
      * C are carrier pi/2 pulses whose phase pi/2 + a absorbs the swap phase
        a = arcsin(-cot(pi/r2)).
    Conjugating the carrier-phase-carrier block by the swap turns a
    motion-controlled atomic flip into the atom-controlled motional flip.
    """
    r2 = np.sqrt(2.0)
    cot = 1.0 / np.tan(np.pi / r2)
    p = np.arccos(cot**2)
    a = np.arcsin(-cot)
    q = np.pi / 2 + a
    b = "blue_sideband"
    k_inv = [(b, np.pi / r2, np.pi), (b, r2 * np.pi, p + np.pi), (b, np.pi / r2, np.pi)]
    k_fwd = [(b, np.pi / r2, 0.0), (b, r2 * np.pi, p), (b, np.pi / r2, 0.0)]
    phase_gate = [(b, np.pi / r2, 0.0), (b, np.pi, np.pi / 2), (b, np.pi / r2, 0.0), (b, np.pi, np.pi / 2)]
    carrier = [("carrier", np.pi / 2, q)]
    # Application order: rightmost factor of K^-1 C P C K... acts first, i.e. K^-1 is applied first here.
    return tuple(k_inv + carrier + phase_gate + carrier + k_fwd)


CNOT_PULSES = _cnot_pulses()

# Motion-controlled CNOT (atomic flip conditioned on the motional state): carrier
# pi/2, the composite sideband phase gate, carrier pi/2 with phase pi. It is
# 2.6 times shorter than CNOT_PULSES but implements a different unitary;
# kept as a timing reference for the noise studies.
MCNOT_PULSES = tuple(
    [("carrier", np.pi / 2, 0.0)]
    + [("blue_sideband", np.pi / np.sqrt(2.0), 0.0), ("blue_sideband", np.pi, np.pi / 2)] * 2
    + [("carrier", np.pi / 2, np.pi)]
)


def pulse_duration(p: TrapLaserParams, transition: str, theta: float) -> float:
    """Square-pulse length: theta / Omega on the carrier, theta / (eta Omega) on the sideband."""
    rate = p.Omega if transition == "carrier" else p.eta * p.Omega
    if rate <= 0:
        raise ValueError("Rabi rate must be positive")
    return abs(theta) / rate


def effective_to_laser_phase(transition: str, phase: float) -> float:
    return float(np.mod(phase + gates.LASER_PHASE_OFFSET[transition], 2 * np.pi))


def laser_to_effective_phase(transition: str, phi: float) -> float:
    return float(phi - gates.LASER_PHASE_OFFSET[transition])


def make_pulse(p: TrapLaserParams, transition: str, theta: float, effective_phase: float) -> Pulse:
    """Pulse realizing exp(-i theta/2 (e^{i phase} G + h.c.)) on ``transition``."""
    if theta < 0:
        theta, effective_phase = -theta, effective_phase + np.pi
    return Pulse(transition, float(theta), effective_to_laser_phase(transition, effective_phase),
                 pulse_duration(p, transition, theta))


def compile_rotation(
    name: str,
    theta: float,
    p: TrapLaserParams,
    ledger: StarkLedger | None = None,
    sideband_shift: float = 0.0,
) -> list[Pulse]:
    """Compile a named rotation (``Rx``, ``Ry``, ``Rx+``, ``Ry+``) into one pulse.

    Args:
        name: Rotation name.
        theta: Rotation angle (rad); negative angles become a phase flip.
        p: Trap and laser constants setting the Rabi rates.
        ledger: If given, the pulse phase is Stark corrected and the ledger
            advanced (use for hardware-ready programs).
        sideband_shift: Stark shift Delta of sideband pulses (rad/s).
    """
    if name not in gates.ROTATION_PHASES:
        raise ValueError(f"unknown rotation {name!r}")
    transition = gates.ROTATION_TRANSITIONS[name]
    pulse = make_pulse(p, transition, theta, gates.ROTATION_PHASES[name])
    if ledger is not None:
        shift = sideband_shift if transition == "blue_sideband" else 0.0
        phi = nth_gate_phase(ledger, pulse.phi, pulse.duration, shift)
        pulse = Pulse(pulse.transition, pulse.theta, float(np.mod(phi, 2 * np.pi)), pulse.duration)
    return [pulse]


def operations_program(ops: str, p: TrapLaserParams, name: str = "") -> PulseProgram:
    """Program for an operation string (rightmost operation first)."""
    pulses: list[Pulse] = []
    for rot, theta in gates.parse_operations(ops):
        pulses.extend(compile_rotation(rot, theta, p))
    return PulseProgram(tuple(pulses), name=name or ops)


def prep_sequence(i: int, p: TrapLaserParams) -> PulseProgram:
    """Preparation program for input state ``i`` (1..16) starting from |S0>."""
    if i not in PREP_TABLE:
        raise ValueError(f"preparation index must be in 1..16, got {i}")
    return operations_program(PREP_TABLE[i][0], p, name=f"prep{i}")


def prep_target_state(i: int) -> np.ndarray:
    """Normalized 4-vector over (D0, D1, S0, S1) of the listed preparation state."""
    if i not in PREP_TABLE:
        raise ValueError(f"preparation index must be in 1..16, got {i}")
    order = ("D0", "D1", "S0", "S1")
    amps = PREP_TABLE[i][1]
    v = np.array([amps.get(k, 0) for k in order], dtype=complex)
    return v / np.linalg.norm(v)


def cnot_sequence(p: TrapLaserParams) -> PulseProgram:
    """Composite carrier / blue-sideband program realizing ``CNOT_TARGET``."""
    pulses = tuple(make_pulse(p, tr, th, ph) for tr, th, ph in CNOT_PULSES)
    return PulseProgram(pulses, name="cnot")


def mcnot_sequence(p: TrapLaserParams) -> PulseProgram:
    """Compiled motion-controlled CNOT (see MCNOT_PULSES)."""
    return PulseProgram(tuple(make_pulse(p, *x) for x in MCNOT_PULSES), name="mcnot")


GATE_NAMES = ("identity", "cnot", "cnotx2", "mcnot", "mcnotx2")


def gate_program(gate: str, p: TrapLaserParams) -> PulseProgram:
    """Program for ``identity``, ``cnot``, ``cnotx2``, ``mcnot`` or ``mcnotx2``."""
    if gate == "identity":
        return PulseProgram((), name="identity")
    if gate in ("cnot", "cnotx2"):
        c = cnot_sequence(p)
    elif gate in ("mcnot", "mcnotx2"):
        c = mcnot_sequence(p)
    else:
        raise ValueError(f"unknown gate {gate!r}")
    return PulseProgram(c.instructions * (2 if gate.endswith("x2") else 1), name=gate)


def program_unitary(prog: PulseProgram) -> np.ndarray:
    """Idealized 6x6 propagator of a program's pulses (measurements and waits ignored)."""
    u = np.eye(6, dtype=complex)
    for pu in prog.pulses():
        phase = pu.phi - gates.LASER_PHASE_OFFSET[pu.transition]
        u = gates.coupling_rotation(pu.transition, pu.theta, phase) @ u
    return u


def measurement_program(u_ops: str, v_ops: str | None, p: TrapLaserParams,
                        detection_time: float = DETECTION_TIME, name: str = "") -> PulseProgram:
    """Measurement program: M_U when ``v_ops`` is None, otherwise the conditional M_UV.

    Each fluorescence detection is followed by a wait of ``detection_time``.
    """
    first = operations_program(u_ops, p).instructions
    detect = (FluorescenceMeasure("m1"), Wait(detection_time))
    if v_ops is None:
        return PulseProgram(first + detect, name=name)
    second = operations_program(v_ops, p).instructions
    body = second + (FluorescenceMeasure("m2"), Wait(detection_time))
    return PulseProgram(first + detect + (ConditionalBranch(body),), name=name)


def apply_stark_corrections(prog: PulseProgram, sideband_shift: float,
                            ledger: StarkLedger | None = None,
                            correct_carrier_shift: float = 0.0) -> PulseProgram:
    """Rewrite logical phases into Stark-corrected laser phases.

    Args:
        prog: Program with logical phases.
        sideband_shift: Stark shift Delta during sideband pulses (rad/s).
        ledger: Registers to continue from (a fresh ledger by default); advanced in place.
        correct_carrier_shift: Shift attributed to carrier pulses (0 by default).
    """
    ledger = StarkLedger() if ledger is None else ledger

    def walk(instructions):
        out = []
        for ins in instructions:
            if isinstance(ins, Pulse):
                shift = sideband_shift if ins.transition == "blue_sideband" else correct_carrier_shift
                phi = nth_gate_phase(ledger, ins.phi, ins.duration, shift)
                out.append(Pulse(ins.transition, ins.theta, float(np.mod(phi, 2 * np.pi)), ins.duration))
            elif isinstance(ins, Wait):
                ledger.wait(ins.duration)
                out.append(ins)
            elif isinstance(ins, ConditionalBranch):
                out.append(ConditionalBranch(tuple(walk(ins.body))))
            else:
                out.append(ins)
        return out

    return PulseProgram(tuple(walk(prog.instructions)), name=prog.name)
