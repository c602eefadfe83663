"""Independent checks: exhaustive small-instance solver and a rule-level validator."""

from .automaton import Automaton, admissible_rows, rule_ok, runs, short_runs
from .brute import QUASI_GUARD, STATIC_GUARD, brute_force
from .metrics import COMPARE_TOL, Comparison, compare, compute_efficiency
from .validate import (FAMILIES, PASS_TOL, VALIDATION_SCHEMA, FamilyResult, ValidationReport,
                       validate)

__all__ = [
    "Automaton", "COMPARE_TOL", "Comparison", "FAMILIES", "FamilyResult", "PASS_TOL",
    "QUASI_GUARD", "STATIC_GUARD", "VALIDATION_SCHEMA", "ValidationReport", "admissible_rows",
    "brute_force", "compare", "compute_efficiency", "rule_ok", "runs", "short_runs", "validate",
]
