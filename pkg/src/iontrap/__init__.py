"""Single-ion quantum control simulator: frames, Stark corrections, pulse
sequencing, conditional-measurement process tomography and noise studies."""

__version__ = "0.1.0"
