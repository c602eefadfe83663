"""LP relaxation engine, branch and bound, and a constructive seed heuristic."""

from .bnb import (
    BBResult,
    Incumbent,
    SolverOptions,
    bb_solve,
    polish,
    relative_gap,
    warm_start,
)
from .simplex import Basis, LpEngine, LpResult, lp_solve

__all__ = [
    "BBResult", "Basis", "Incumbent", "LpEngine", "LpResult", "SolverOptions", "bb_solve",
    "lp_solve", "polish", "relative_gap", "warm_start",
]
