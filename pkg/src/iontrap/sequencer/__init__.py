"""Pulse programs: IR, DDS phase model, compilation and execution."""

from .compile import (
    CNOT_PULSES,
    CNOT_TARGET,
    GATE_NAMES,
    MCNOT_PULSES,
    mcnot_sequence,
    program_unitary,
    DETECTION_TIME,
    PREP_TABLE,
    apply_stark_corrections,
    cnot_sequence,
    compile_rotation,
    gate_program,
    make_pulse,
    measurement_program,
    operations_program,
    prep_sequence,
    prep_target_state,
    pulse_duration,
)
from .dds import DDSPhaseModel, dds_phase
from .execute import ExecutionContext, RunResult, run_program
from .gates import operation_unitary, parse_operations, rotation_operator
from .ir import ConditionalBranch, FluorescenceMeasure, Pulse, PulseProgram, Wait

__all__ = [
    "CNOT_PULSES", "CNOT_TARGET", "GATE_NAMES", "MCNOT_PULSES", "mcnot_sequence", "program_unitary",
    "DETECTION_TIME", "PREP_TABLE", "apply_stark_corrections",
    "cnot_sequence", "compile_rotation", "gate_program", "make_pulse", "measurement_program",
    "operations_program", "prep_sequence", "prep_target_state", "pulse_duration", "DDSPhaseModel",
    "dds_phase", "ExecutionContext", "RunResult", "run_program", "operation_unitary",
    "parse_operations", "rotation_operator", "ConditionalBranch", "FluorescenceMeasure", "Pulse",
    "PulseProgram", "Wait",
]
