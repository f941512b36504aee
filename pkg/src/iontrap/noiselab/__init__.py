"""Noise models, Monte-Carlo tomography and the calibration experiments."""

from .analysis import (
    SOURCES,
    ErrorBudget,
    error_budget,
    heating_budget,
    nbar_to_ratio,
    sideband_pi_probabilities,
    simulated_fidelity,
    thermometry,
)
from .experiments import (
    T_FIXED,
    rabi_experiment,
    ramsey_experiment,
    residual_stark_check,
    sideband_clear,
    sideband_ramsey_oscillation,
    stark_pulse_program,
    stark_scan,
    thermal_state,
)
from .fitting import ExperimentResult, FitError, fit_gaussian_envelope, fit_offset, fit_rabi, fit_sinusoid
from .noise import NoiseModel, NoiseTrajectory, PulseNoiseSample, sample_noise_trajectory
from .qpt import GATES, fit_gate_fidelity, gate_target, simulate_probabilities, simulate_tomography
