"""Conditional fluorescence measurements M_U and M_UV and the 15-element basis."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import qlinalg as ql
from ..sequencer.gates import operation_unitary


@dataclass(frozen=True)
class MeasurementSpec:
    """One tomography measurement.

    Attributes:
        index: 1-based label M_j.
        u_ops: Operations applied before the first detection ("I" for none).
        v_ops: Operations applied after a dark first detection; None for M_U.
    """

    index: int
    u_ops: str
    v_ops: str | None = None

    @property
    def kind(self) -> str:
        return "M_U" if self.v_ops is None else "M_UV"

    def __str__(self) -> str:
        if self.v_ops is None:
            return f"M{self.index} = M_U({self.u_ops})"
        return f"M{self.index} = M_UV({self.u_ops}, {self.v_ops})"


MEASUREMENT_TABLE = (
    MeasurementSpec(1, "I"),
    MeasurementSpec(2, "I", "Ry+(pi)"),
    MeasurementSpec(3, "Ry(pi)", "Ry+(pi)"),
    MeasurementSpec(4, "Ry(pi/2)"),
    MeasurementSpec(5, "Rx(pi/2)"),
    MeasurementSpec(6, "I", "Ry(pi/2) Ry+(pi/2)"),
    MeasurementSpec(7, "Ry(pi)", "Ry(pi/2) Ry+(pi/2)"),
    MeasurementSpec(8, "Ry(pi/2)", "Ry(pi/2) Ry+(pi/2)"),
    MeasurementSpec(9, "Ry(pi/2)", "Rx(pi/2) Ry+(pi/2)"),
    MeasurementSpec(10, "I", "Rx(pi/2) Ry+(pi/2)"),
    MeasurementSpec(11, "Rx(pi)", "Rx(pi/2) Ry+(pi/2)"),
    MeasurementSpec(12, "Rx(pi/2)", "Rx(pi/2) Ry+(pi/2)"),
    MeasurementSpec(13, "Rx(pi/2)", "Ry(pi/2) Ry+(pi/2)"),
    MeasurementSpec(14, "Ry(pi/2)", "Ry+(pi/2)"),
    MeasurementSpec(15, "Rx(pi/2)", "Ry+(pi/2)"),
)


def measurement_basis() -> tuple[MeasurementSpec, ...]:
    """The 15 measurement settings in table order."""
    return MEASUREMENT_TABLE


def _ops(text: str) -> np.ndarray:
    return ql.I6 if text.strip() in ("", "I") else operation_unitary(text)


def measurement_operator(spec: MeasurementSpec) -> np.ndarray:
    """6x6 POVM element of the success event (bright last, dark before).

    M_U = U^dag P_S U and M_UV = U^dag P_D V^dag P_S V P_D U.
    """
    u = _ops(spec.u_ops)
    if spec.v_ops is None:
        return u.conj().T @ ql.P_S @ u
    v = _ops(spec.v_ops)
    inner = ql.P_D @ v.conj().T @ ql.P_S @ v @ ql.P_D
    return u.conj().T @ inner @ u


def measurement_operators(specs=MEASUREMENT_TABLE, computational: bool = True) -> np.ndarray:
    """Stack of measurement operators, restricted to the computational block by default."""
    ops = [measurement_operator(s) for s in specs]
    if computational:
        ops = [ql.restrict_computational(m) for m in ops]
    return np.array(ops)
