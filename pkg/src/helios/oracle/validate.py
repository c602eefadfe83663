"""Re-check a Solution against the problem rules using only domain arrays.

Nothing here looks at encoded rows: each family is recomputed from X, U, Y,
Ps, the battery rating and the profile.  Witnesses are 1-based
``(unit, step)`` pairs, or a bare step for per-step families.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from ..errors import DomainError
from ..profile import SolarProfile
from ..sizing.types import ProblemSpec, Solution
from .automaton import Automaton, short_runs

VALIDATION_SCHEMA = "helios-validation/1"
PASS_TOL = 1e-6
FAMILIES = ("adequacy", "linking", "dynamics", "min_up_down", "startup_shutdown", "battery",
            "bounds")


@dataclass
class FamilyResult:
    name: str
    worst_violation: float = 0.0
    witness: tuple[int, ...] | None = None

    @property
    def passed(self) -> bool:
        return self.worst_violation <= PASS_TOL

    def note(self, amount: float, witness: tuple[int, ...]) -> None:
        if amount > self.worst_violation:
            self.worst_violation = float(amount)
            self.witness = witness

    def to_dict(self) -> dict:
        return {"name": self.name, "pass": self.passed, "worst_violation": self.worst_violation,
                "witness": list(self.witness) if self.witness is not None else None}


@dataclass
class ValidationReport:
    families: list[FamilyResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(f.passed for f in self.families)

    def __getitem__(self, name: str) -> FamilyResult:
        for f in self.families:
            if f.name == name:
                return f
        raise KeyError(name)

    def failures(self) -> list[str]:
        return [f.name for f in self.families if not f.passed]

    def to_dict(self) -> dict:
        return {"schema": VALIDATION_SCHEMA, "pass": self.passed,
                "families": [f.to_dict() for f in self.families]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1, sort_keys=True) + "\n"

    def lines(self) -> list[str]:
        out = []
        for f in self.families:
            where = "" if f.witness is None else f" at {','.join(map(str, f.witness))}"
            out.append(f"{f.name:17s} {'pass' if f.passed else 'FAIL'}  "
                       f"worst={f.worst_violation:.3g}{where}")
        return out


def _nearest_level(u: float, quasi: bool) -> float:
    levels = (0.0, 0.5, 1.0) if quasi else (0.0, 1.0)
    return min(levels, key=lambda v: abs(u - v))


def validate(sol: Solution, spec: ProblemSpec, profile: SolarProfile) -> ValidationReport:
    S = profile.array
    n, T = spec.n_units, profile.steps
    X, U, Y, Ps = (np.asarray(a, dtype=float) for a in (sol.X, sol.U, sol.Y, sol.Ps))
    if X.shape != (n,) or U.shape != (n, T) or Y.shape != (n, T) or Ps.shape != (T,):
        raise DomainError(f"solution shapes {X.shape}, {U.shape}, {Y.shape}, {Ps.shape} "
                          f"do not match n={n}, T={T}")
    fam = {name: FamilyResult(name) for name in FAMILIES}
    Pb = float(sol.battery_size)

    # adequacy: load never exceeds solar plus battery discharge
    excess = Y.sum(axis=0) - S - Ps
    for t in range(T):
        fam["adequacy"].note(excess[t], (t + 1,))

    # bounds on sizes, powers and the rating
    for i in range(n):
        fam["bounds"].note(max(-X[i], X[i] - spec.x_max), (i + 1,))
        for t in range(T):
            fam["bounds"].note(max(-Y[i, t], Y[i, t] - X[i], Y[i, t] - spec.x_max), (i + 1, t + 1))
    fam["bounds"].note(-Pb, ())

    # linking: states on the allowed grid and Y equal to size times state
    snapped = np.vectorize(lambda u: _nearest_level(u, spec.quasi))(U) if U.size else U
    for i in range(n):
        for t in range(T):
            fam["linking"].note(abs(U[i, t] - snapped[i, t]), (i + 1, t + 1))
            fam["linking"].note(abs(Y[i, t] - X[i] * U[i, t]), (i + 1, t + 1))

    # dynamics: static allows no half state; quasi rows must walk the automaton
    auto = Automaton()
    for i in range(n):
        row = snapped[i]
        if not spec.quasi:
            for t in range(T):
                if abs(U[i, t] - 0.5) < 0.25:
                    fam["dynamics"].note(0.5 - abs(U[i, t] - 0.5), (i + 1, t + 1))
            continue
        state = auto.OFF
        for t in range(T):
            nxt = auto.EDGES[state].get(float(row[t]))
            if nxt is None:
                allowed = list(auto.EDGES[state])
                fam["dynamics"].note(min(abs(row[t] - a) for a in allowed), (i + 1, t + 1))
                # resynchronize on the observed level so later steps still get checked
                nxt = {0.0: auto.OFF, 1.0: auto.ON}.get(float(row[t]),
                                                        auto.HALF_UP if state != auto.ON
                                                        else auto.HALF_DOWN)
            state = nxt

    # minimum up/down times on the committed pattern
    for i in range(n):
        for start, missing in short_runs(snapped[i], spec.min_up[i], spec.min_down[i]):
            fam["min_up_down"].note(float(missing), (i + 1, start + 1))

    # start-up/shut-down indicators and the R/Q encoding of U
    sch = sol.schedule
    R, Q, V, W = (np.asarray(a, dtype=float) for a in (sch.R, sch.Q, sch.V, sch.W))
    for i in range(n):
        for t in range(T):
            tag = (i + 1, t + 1)
            fs = fam["startup_shutdown"]
            fs.note(abs((R[i, t] + Q[i, t]) / 2 - snapped[i, t]), tag)
            fs.note(Q[i, t] - R[i, t], tag)
            if not spec.quasi:
                fs.note(abs(R[i, t] - Q[i, t]), tag)
            if t == 0:
                fs.note(max(abs(V[i, 0]), abs(W[i, 0])), tag)
            else:
                fs.note(abs(V[i, t] - W[i, t] - (R[i, t] - R[i, t - 1])), tag)
                fs.note(V[i, t] + W[i, t] - 1.0, tag)

    # battery: power limit, daily balance and state of charge
    fb = fam["battery"]
    if spec.has_storage:
        for t in range(T):
            fb.note(abs(Ps[t]) - Pb, (t + 1,))
        fb.note(abs(Ps.sum()), ())
        cap = spec.battery_hours_ratio * Pb
        soc = cap / 2 - profile.dt_hours * np.cumsum(Ps)
        for t in range(T):
            fb.note(max(-soc[t], soc[t] - cap), (t + 1,))
    else:
        for t in range(T):
            fb.note(abs(Ps[t]), (t + 1,))
        fb.note(abs(Pb), ())

    return ValidationReport([fam[name] for name in FAMILIES])
