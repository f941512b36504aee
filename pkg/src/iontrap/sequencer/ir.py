"""Pulse-program intermediate representation and its text dump format.

Dump format, one instruction per line (nesting indented by two spaces)::

    PULSE <transition> theta=<rad> phi=<rad> dur=<s> [det=<rad/s>]
    WAIT <s>
    MEASURE <label>
    COND {
      ...
    }
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Union

TRANSITIONS = ("carrier", "blue_sideband")


@dataclass(frozen=True)
class Pulse:
    """Square laser pulse.

    Attributes:
        transition: ``"carrier"`` or ``"blue_sideband"``.
        theta: Rotation angle on the addressed manifold (rad, >= 0).
        phi: Logical laser phase before Stark correction (rad).
        duration: Pulse length (s).
        detuning: Extra laser detuning from the transition's resonance (rad/s);
            nonzero only for deliberately off-resonant (Stark) pulses.
    """

    transition: str
    theta: float
    phi: float
    duration: float
    detuning: float = 0.0

    def __post_init__(self):
        for name in ("theta", "phi", "duration", "detuning"):
            object.__setattr__(self, name, float(getattr(self, name)))
        if self.transition not in TRANSITIONS:
            raise ValueError(f"unknown transition {self.transition!r}")
        if self.duration < 0 or self.theta < 0:
            raise ValueError("pulse angle and duration must be non-negative")


@dataclass(frozen=True)
class Wait:
    duration: float

    def __post_init__(self):
        if self.duration < 0:
            raise ValueError("wait duration must be non-negative")


@dataclass(frozen=True)
class FluorescenceMeasure:
    """Projective fluorescence detection (bright = S, dark = D)."""

    label: str


@dataclass(frozen=True)
class ConditionalBranch:
    """Instructions executed only if the preceding measurement was dark."""

    body: tuple
    on: str = "no_fluorescence"

    def __post_init__(self):
        if self.on != "no_fluorescence":
            raise ValueError("only no-fluorescence branches are supported")
        for ins in self.body:
            if isinstance(ins, ConditionalBranch):
                raise ValueError("conditional branches nest at most one level")


Instruction = Union[Pulse, Wait, FluorescenceMeasure, ConditionalBranch]


def _duration(ins: Instruction) -> float:
    if isinstance(ins, (Pulse, Wait)):
        return ins.duration
    if isinstance(ins, ConditionalBranch):
        return sum(_duration(b) for b in ins.body)
    return 0.0


@dataclass(frozen=True)
class PulseProgram:
    """Ordered instruction list.

    Attributes:
        instructions: Tuple of instructions executed in order.
        name: Optional label used in dumps and reports.
    """

    instructions: tuple = ()
    name: str = field(default="", compare=False)

    def __post_init__(self):
        object.__setattr__(self, "instructions", tuple(self.instructions))

    @property
    def total_duration(self) -> float:
        """Duration along the longest path (conditional bodies included)."""
        return sum(_duration(i) for i in self.instructions)

    def __add__(self, other: "PulseProgram") -> "PulseProgram":
        name = "+".join(n for n in (self.name, other.name) if n)
        return PulseProgram(self.instructions + other.instructions, name=name)

    def __len__(self) -> int:
        return len(self.instructions)

    def pulses(self) -> Iterator[Pulse]:
        """All pulses in program order, including those in conditional bodies."""
        for ins in self.instructions:
            if isinstance(ins, Pulse):
                yield ins
            elif isinstance(ins, ConditionalBranch):
                yield from (b for b in ins.body if isinstance(b, Pulse))

    @property
    def n_measurements(self) -> int:
        n = 0
        for ins in self.instructions:
            if isinstance(ins, FluorescenceMeasure):
                n += 1
            elif isinstance(ins, ConditionalBranch):
                n += sum(isinstance(b, FluorescenceMeasure) for b in ins.body)
        return n

    def dump(self) -> str:
        """Text form of the program (round-trips through ``parse``)."""
        lines: list[str] = []
        _dump_into(self.instructions, lines, "")
        return "\n".join(lines) + ("\n" if lines else "")

    @classmethod
    def parse(cls, text: str, name: str = "") -> "PulseProgram":
        stack: list[list] = [[]]
        for raw in text.splitlines():
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            head, _, rest = line.partition(" ")
            if head == "PULSE":
                parts = rest.split()
                kv = dict(p.split("=", 1) for p in parts[1:])
                stack[-1].append(Pulse(parts[0], float(kv["theta"]), float(kv["phi"]), float(kv["dur"]),
                                       float(kv.get("det", 0.0))))
            elif head == "WAIT":
                stack[-1].append(Wait(float(rest)))
            elif head == "MEASURE":
                stack[-1].append(FluorescenceMeasure(rest.strip()))
            elif line == "COND {":
                if len(stack) > 1:
                    raise ValueError("nested COND blocks are not allowed")
                stack.append([])
            elif line == "}":
                if len(stack) < 2:
                    raise ValueError("unbalanced '}'")
                body = stack.pop()
                stack[-1].append(ConditionalBranch(tuple(body)))
            else:
                raise ValueError(f"cannot parse line {raw!r}")
        if len(stack) != 1:
            raise ValueError("unterminated COND block")
        return cls(tuple(stack[0]), name=name)


def _dump_into(instructions, lines: list[str], indent: str) -> None:
    for ins in instructions:
        if isinstance(ins, Pulse):
            det = f" det={ins.detuning!r}" if ins.detuning else ""
            lines.append(f"{indent}PULSE {ins.transition} theta={ins.theta!r} phi={ins.phi!r} dur={ins.duration!r}{det}")
        elif isinstance(ins, Wait):
            lines.append(f"{indent}WAIT {ins.duration!r}")
        elif isinstance(ins, FluorescenceMeasure):
            lines.append(f"{indent}MEASURE {ins.label}")
        elif isinstance(ins, ConditionalBranch):
            lines.append(f"{indent}COND {{")
            _dump_into(ins.body, lines, indent + "  ")
            lines.append(f"{indent}}}")
        else:
            raise TypeError(f"not an instruction: {ins!r}")
