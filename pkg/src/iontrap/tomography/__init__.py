"""State and process tomography with conditional fluorescence measurements."""

from .dataset import (
    TomographyDataset,
    TomographyResult,
    analyze,
    chi_from_text,
    chi_to_text,
    ideal_dataset,
    projection_noise_errorbars,
    reconstruct_outputs,
)
from .measurements import (
    MEASUREMENT_TABLE,
    MeasurementSpec,
    measurement_basis,
    measurement_operator,
    measurement_operators,
)
from .mle import MLEConvergenceError, clip_to_physical, lower_factor, mle_psd
from .process import (
    PAULI_LABELS,
    ChiMatrix,
    apply_chi,
    cell_operators,
    chi_from_io,
    chi_from_kraus,
    chi_from_superoperator,
    chi_from_unitary,
    haar_average_fidelity_mc,
    haar_mean_fidelity,
    is_physical,
    mean_fidelity,
    pauli_basis,
    pauli_coefficients,
    pauli_expand,
    per_state_fidelities,
    predicted_probabilities,
    process_fidelity,
    superoperator_from_io,
    tp_violation,
)
from .state import (
    SingularDesignError,
    StateEstimate,
    build_A,
    measurement_probabilities,
    mle_density,
    prep_states,
    reconstruct_rho,
)
