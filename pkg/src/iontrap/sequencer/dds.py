"""Phase-coherent frequency switching of a direct digital synthesizer.

Every frequency keeps a virtual phase accumulator referenced to a common epoch
t = 0, phi_0(t) = f t (mod 2 pi). Switching to frequency f at time T sets the
output phase to phi_0(T) + phi, so each frequency's phase evolves as if the
synthesizer had never left it.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

TWO_PI = 2.0 * np.pi


def dds_phase(f: float, t: float, phi: float = 0.0) -> float:
    """Output phase (f t mod 2 pi) + phi, normalized to [0, 2 pi).

    Args:
        f: Angular frequency (rad/s).
        t: Time since the reference epoch (s).
        phi: Programmed phase offset (rad).
    """
    return float(np.mod(np.mod(f * t, TWO_PI) + phi, TWO_PI))


@dataclass
class DDSPhaseModel:
    """Phase-coherent DDS with exact (rational) time and frequency bookkeeping.

    Frequencies are given in Hz as rationals so that f t mod 1 is exact; the
    phase in cycles is converted to radians only at readout.
    """

    frequency_hz: Fraction = Fraction(0)
    offset: float = 0.0
    switch_time: Fraction = Fraction(0)
    history: list = field(default_factory=list)

    def set(self, frequency_hz, t, phi: float = 0.0) -> None:
        """Switch to ``frequency_hz`` at time ``t`` with programmed phase ``phi``."""
        self.frequency_hz = Fraction(frequency_hz)
        self.switch_time = Fraction(t)
        self.offset = float(phi)
        self.history.append((self.switch_time, self.frequency_hz, self.offset))

    def phase(self, t) -> float:
        """Output phase (rad, in [0, 2 pi)) at time ``t`` after the last switch."""
        t = Fraction(t)
        if t < self.switch_time:
            raise ValueError("phase requested before the last switch")
        cycles = (self.frequency_hz * t) % 1
        return float(np.mod(TWO_PI * float(cycles) + self.offset, TWO_PI))
