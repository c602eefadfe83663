"""Sizing-and-scheduling problem: domain types, MILP encoding and solve drivers."""

from .encode import Encoding, Phase, encode, min_battery_for
from .solve import seed_incumbent, solve, solve_two_phase
from .types import (
    SOLUTION_SCHEMA,
    ProblemSpec,
    Schedule,
    Solution,
    Storage,
    Strategy,
    build_solution,
    dumps_solution,
    efficiency_of,
    pad_units,
    read_solution,
    solution_from_dict,
    solution_to_dict,
    write_solution,
)

__all__ = [
    "SOLUTION_SCHEMA", "Encoding", "Phase", "ProblemSpec", "Schedule", "Solution", "Storage",
    "Strategy", "build_solution", "dumps_solution", "efficiency_of", "encode", "min_battery_for",
    "pad_units", "read_solution", "seed_incumbent", "solution_from_dict", "solution_to_dict",
    "solve", "solve_two_phase", "write_solution",
]
