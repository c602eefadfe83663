"""Exhaustive ground truth for small instances.

Every admissible state matrix U is enumerated.  With U fixed the problem is
linear in the sizes, the battery trace and the rating, so each pattern gets
its own small LP, built here from the problem rules rather than taken from
the encoder.  The winner is lexicographic: least spill, then (with storage)
least rating under the spill cap, then least total size.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from ..errors import DomainError, SolverError
from ..milp import MilpModel, VarKind
from ..profile import SolarProfile
from ..sizing.types import ProblemSpec, Solution, build_solution
from ..solver.simplex import LpEngine
from .automaton import admissible_rows

STATIC_GUARD = 12
QUASI_GUARD = 8
TIE_TOL = 1e-9


@dataclass(frozen=True)
class _Inner:
    X: np.ndarray
    Ps: np.ndarray
    Pb: float
    spill: float
    objective: float


class _PatternLP:
    """The continuous completion of a fixed pattern, as one reusable LP.

    Per unit and step there is a full-power column ``f = X`` and a half-power
    column ``h = X/2``, each tied to the size by a row with its own slack
    (``f - X + a = 0``, ``2h - X + b = 0``).  A pattern is imposed purely
    through bounds: the selected column is free and its slack pinned to zero,
    the others are pinned to zero and their slack absorbs X.  Load at a step
    is the sum of the selected columns, so ``Y = X * u`` holds exactly.
    """

    def __init__(self, spec: ProblemSpec, profile: SolarProfile, goal: str,
                 spill_cap: float | None = None, rating_cap: float | None = None):
        S = profile.array
        n, T = spec.n_units, profile.steps
        xm = spec.x_max
        lp = MilpModel("pattern")
        cont = VarKind.CONTINUOUS
        X = [lp.add_variable(cont, 0.0, xm, f"x{i}") for i in range(n)]
        self.f = np.zeros((n, T), dtype=int)
        self.h = np.zeros((n, T), dtype=int)
        self.a = np.zeros((n, T), dtype=int)
        self.b = np.zeros((n, T), dtype=int)
        for i in range(n):
            for t in range(T):
                f = self.f[i, t] = lp.add_variable(cont, 0.0, xm, f"f{i}_{t}")
                a = self.a[i, t] = lp.add_variable(cont, 0.0, xm, f"a{i}_{t}")
                h = self.h[i, t] = lp.add_variable(cont, 0.0, xm / 2, f"h{i}_{t}")
                b = self.b[i, t] = lp.add_variable(cont, 0.0, xm, f"b{i}_{t}")
                lp.add_constraint([(f, 1.0), (X[i], -1.0), (a, 1.0)], "=", 0.0, f"tf{i}_{t}")
                lp.add_constraint([(h, 2.0), (X[i], -1.0), (b, 1.0)], "=", 0.0, f"th{i}_{t}")
        Ps: list[int] = []
        Pb = None
        if spec.has_storage:
            cap = spec.battery_cap(profile)
            Ps = [lp.add_variable(cont, -cap, cap, f"p{t}") for t in range(T)]
            Pb = lp.add_variable(cont, 0.0, cap, "pb")
        for t in range(T):
            terms = [(int(self.f[i, t]), 1.0) for i in range(n)]
            terms += [(int(self.h[i, t]), 1.0) for i in range(n)]
            terms += [(Ps[t], -1.0)] if Ps else []
            lp.add_constraint(terms, "<=", float(S[t]), f"ad{t}")
        if Ps:
            c, dt = spec.battery_hours_ratio, profile.dt_hours
            for t in range(T):
                lp.add_constraint([(Ps[t], 1.0), (Pb, -1.0)], "<=", 0.0, f"pu{t}")
                lp.add_constraint([(Ps[t], 1.0), (Pb, 1.0)], ">=", 0.0, f"pl{t}")
            lp.add_constraint([(p, 1.0) for p in Ps], "=", 0.0, "bal")
            for t in range(T):
                # stored energy c*Pb/2 - dt*sum(Ps) stays within [0, c*Pb]
                drawn = [(Ps[h], dt) for h in range(t + 1)]
                lp.add_constraint(drawn + [(Pb, -c / 2)], "<=", 0.0, f"e{t}")
                lp.add_constraint(drawn + [(Pb, c / 2)], ">=", 0.0, f"g{t}")
        total = float(S.sum())
        # spill = sum(S) + sum(Ps) - total load
        spill_terms = [(int(v), -1.0) for v in np.concatenate([self.f.ravel(), self.h.ravel()])]
        spill_terms += [(p, 1.0) for p in Ps]
        if spill_cap is not None:
            lp.add_constraint(spill_terms, "<=", spill_cap - total, "cap")
        if rating_cap is not None and Pb is not None:
            lp.add_constraint([(Pb, 1.0)], "<=", rating_cap, "rcap")
        if goal == "spill":
            lp.set_objective(spill_terms, offset=total)
        elif goal == "rating":
            lp.set_objective([(Pb, 1.0)])
        else:
            lp.set_objective([(x, 1.0) for x in X])
        lp.seal()
        self.model = lp
        self.engine = LpEngine(lp)
        self.X, self.Ps, self.Pb = X, Ps, Pb
        self.total, self.xm, self.T = total, xm, T
        self.basis = None

    def solve(self, U: np.ndarray) -> _Inner | None:
        lo = self.engine.var_lower.copy()
        hi = self.engine.var_upper.copy()
        full, half = U == 1.0, U == 0.5
        hi[self.f[~full]] = 0.0
        hi[self.a[full]] = 0.0
        hi[self.h[~half]] = 0.0
        hi[self.b[half]] = 0.0
        res = self.engine.solve(lo, hi, self.basis)
        if res.status == "infeasible":
            return None
        if res.status != "optimal":
            raise SolverError(f"pattern LP ended {res.status}")
        self.basis = res.basis
        v = res.values
        xs = v[self.X]
        ps = v[self.Ps] if self.Ps else np.zeros(self.T)
        pb = float(v[self.Pb]) if self.Pb is not None else 0.0
        load = float(v[self.f].sum() + v[self.h].sum())
        return _Inner(xs, ps, pb, self.total + float(ps.sum()) - load, res.objective)


def _patterns(spec: ProblemSpec, T: int):
    rows = [list(admissible_rows(T, spec.min_up[i], spec.min_down[i], spec.quasi))
            for i in range(spec.n_units)]
    kinds = set(zip(spec.min_up, spec.min_down))
    if len(kinds) == 1:
        # identical units: each multiset of rows once (relabeling changes nothing)
        combos = itertools.combinations_with_replacement(range(len(rows[0])), spec.n_units)
        for idx in combos:
            yield np.array([rows[0][k] for k in idx])
    else:
        for combo in itertools.product(*rows):
            yield np.array(combo)


def _spill_floor(U: np.ndarray, S: np.ndarray, x_max: float, storage: bool) -> float:
    """Cheap lower bound on a pattern's spill, used only to skip hopeless patterns."""
    reach = x_max * U.sum(axis=0)
    if storage:
        return max(0.0, float(S.sum() - reach.sum()))
    return float(np.maximum(S - reach, 0.0).sum())


def brute_force(spec: ProblemSpec, profile: SolarProfile, epsilon: float | None = None) -> Solution:
    """Lexicographically best solution over every admissible pattern."""
    n, T = spec.n_units, profile.steps
    guard = QUASI_GUARD if spec.quasi else STATIC_GUARD
    if n * T > guard:
        raise DomainError(f"n*T = {n * T} exceeds the enumeration guard {guard}")
    if max(spec.min_up + spec.min_down) > T:
        raise DomainError("profile shorter than a minimum up/down time")
    S = profile.array
    total = float(S.sum())
    eps = (1e-6 * total if epsilon is None else float(epsilon)) if spec.has_storage else 0.0
    margin = eps + TIE_TOL

    lps: dict[tuple, _PatternLP] = {}

    def inner(U, goal, spill_cap=None, rating_cap=None):
        key = (goal, spill_cap, rating_cap)
        if key not in lps:
            lps[key] = _PatternLP(spec, profile, goal, spill_cap, rating_cap)
        return lps[key].solve(U)

    best = np.inf
    scored: list[tuple[float, np.ndarray]] = []
    count = 0
    for U in _patterns(spec, T):
        count += 1
        if _spill_floor(U, S, spec.x_max, spec.has_storage) > best + margin:
            continue
        res = inner(U, "spill")
        if res is None:
            continue
        scored.append((res.objective, U))
        best = min(best, res.objective)
    if not scored:
        raise DomainError("no admissible pattern")  # all-off always is, so unreachable
    cap = best + eps
    # (pattern, spill it must keep) for the size tie-break
    finalists = [(U, sp) for sp, U in scored if sp <= cap + TIE_TOL]

    rating_cap = None
    if spec.has_storage:
        rated = []
        for U, _ in finalists:
            res = inner(U, "rating", spill_cap=cap)
            if res is not None:
                rated.append((res.objective, U))
        rating = min(r for r, _ in rated)
        rating_cap = rating + TIE_TOL
        finalists = []
        for r, U in rated:
            if r <= rating_cap:
                # least spill reachable at that rating, so the size step cannot trade spill away
                low = inner(U, "spill", spill_cap=cap, rating_cap=rating_cap)
                finalists.append((U, low.objective))

    chosen = None
    for U, keep in finalists:
        # hold the spill where it was; the tolerance is only a numerical fallback
        res = inner(U, "size", spill_cap=keep, rating_cap=rating_cap)
        if res is None:
            res = inner(U, "size", spill_cap=keep + TIE_TOL, rating_cap=rating_cap)
        if res is not None and (chosen is None or res.objective < chosen[0].objective - TIE_TOL):
            chosen = (res, U)
    res, U = chosen
    X = res.X
    if len(set(zip(spec.min_up, spec.min_down))) == 1:
        order = np.argsort(-X, kind="stable")
        X, U = X[order], U[order]
    Y = X[:, None] * U
    sol = build_solution(X, U, Y, res.Ps, res.Pb, profile, status="optimal", gap=0.0)
    sol.extra.update(patterns=count, spill_star=best)
    return sol
