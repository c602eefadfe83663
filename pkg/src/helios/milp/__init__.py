"""Solver-agnostic MILP representation and MPS export."""

from .model import (Evaluation, LinearConstraint, MilpModel, ModelArrays, ModelStats, Sense,
                    Variable, VarId, VarKind, as_vector, evaluate)
from .mps import MpsWriteError, export_mps, mps_lines

__all__ = [
    "Evaluation", "LinearConstraint", "MilpModel", "ModelArrays", "ModelStats", "MpsWriteError",
    "Sense", "VarId", "VarKind", "Variable", "as_vector", "evaluate", "export_mps", "mps_lines",
]
