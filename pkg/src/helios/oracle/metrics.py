"""Efficiency and solution comparison."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DegenerateError, DomainError
from ..profile import SolarProfile
from ..sizing.types import Solution

COMPARE_TOL = 1e-6


def compute_efficiency(sol: Solution, profile: SolarProfile) -> float:
    """Matched energy over available solar energy."""
    total = float(np.sum(profile.array))
    if total <= 0:
        raise DegenerateError("efficiency is undefined without solar energy")
    return float(np.sum(sol.Y)) / total


@dataclass(frozen=True)
class Comparison:
    spill_delta: float
    battery_delta: float

    @property
    def objective_delta(self) -> float:
        """First nonzero (beyond tolerance) lexicographic difference, b minus a."""
        if abs(self.spill_delta) > COMPARE_TOL:
            return self.spill_delta
        return self.battery_delta if abs(self.battery_delta) > COMPARE_TOL else self.spill_delta

    def same_within(self, tol: float = COMPARE_TOL) -> bool:
        return abs(self.spill_delta) <= tol and abs(self.battery_delta) <= tol


def compare(a: Solution, b: Solution) -> Comparison:
    """Compare (spill, battery size) of two solutions of the same instance."""
    if a.X.shape != b.X.shape or a.Y.shape != b.Y.shape:
        raise DomainError("solutions come from instances of different shape")
    return Comparison(float(b.spill - a.spill), float(b.battery_size - a.battery_size))
