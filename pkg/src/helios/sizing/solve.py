"""Solve the sizing problem: spill minimization, and lexicographic battery sizing."""

from __future__ import annotations

import logging
from collections.abc import Iterable
from dataclasses import replace

import numpy as np

from ..errors import SeedRejected, StateError
from ..profile import SolarProfile
from ..solver.bnb import BBResult, Incumbent, SolverOptions, bb_solve, polish, warm_start
from ..solver.heuristic import best_unit_row, fit_schedule, quantile_sizes
from ..solver.simplex import LpEngine
from .encode import Encoding, Phase, encode
from .types import ProblemSpec, Schedule, Solution

log = logging.getLogger(__name__)

_STATUS_RANK = {"optimal": 0, "feasible_gap": 1, "time_limit": 2, "infeasible": 3}


def _worse(a: str, b: str) -> str:
    return a if _STATUS_RANK.get(a, 9) >= _STATUS_RANK.get(b, 9) else b


def _start_sizes(enc: Encoding) -> list[np.ndarray]:
    """A few size vectors to start the schedule search from."""
    spec, S = enc.spec, enc.profile.array
    base = quantile_sizes(S, spec.n_units, spec.x_max)
    peak = min(float(S.max()), spec.n_units * spec.x_max) if len(S) else 0.0
    even = np.full(spec.n_units, min(spec.x_max, peak / spec.n_units))
    return [base, 0.8 * base, even]


def seed_incumbent(enc: Encoding, seeds: Iterable[Solution] = (),
                   engine: LpEngine | None = None, rounds: int = 6) -> Incumbent | None:
    """Best feasible starting point among user seeds and local-search schedules.

    Each start alternates between re-timing every unit for the current sizes
    and re-optimizing the continuous part (sizes, battery) for the timing.
    """
    model, spec, S = enc.model, enc.spec, enc.profile.array
    engine = engine or LpEngine(model)
    best: Incumbent | None = None

    def consider(cand: Incumbent | None) -> bool:
        nonlocal best
        if cand is not None and (best is None or cand.objective < best.objective - 1e-12):
            best = cand
            return True
        return False

    for sol in seeds:
        try:
            consider(warm_start(model, enc.from_solution(sol)))
        except SeedRejected as exc:
            log.info("seed rejected: %s (%s ...)", exc, exc.violations[:3])
        consider(polish(model, enc.from_solution(sol), engine))

    on = np.ones((spec.n_units, len(S)))
    if spec.quasi:
        on[:, 0] = 0.5
    consider(polish(model, enc.assignment(np.full(spec.n_units, spec.x_max), on), engine))

    for X in _start_sizes(enc):
        U = None
        for _ in range(rounds):
            U = fit_schedule(S, X, spec, U)
            cand = polish(model, enc.assignment(X, U), engine)
            if cand is None:
                break
            improved = consider(cand)
            X_new = cand.values[enc.X]
            if not improved and np.allclose(X_new, X, atol=1e-9):
                break
            X = X_new

    for X, U in _beam_starts(enc):
        for _ in range(rounds):
            cand = polish(model, enc.assignment(X, U), engine)
            if cand is None or not consider(cand):
                break
            X = cand.values[enc.X]
            U = fit_schedule(S, X, spec, _states(enc, cand.values))
    return best


def _beam_starts(enc: Encoding, width: int = 3) -> list[tuple[np.ndarray, np.ndarray]]:
    """Size units one at a time from solar and residual levels, keeping a small beam.

    Each partial plan is scored by the energy its units absorb when each new
    unit is timed optimally against the load already placed.
    """
    spec, S = enc.spec, enc.profile.array
    n, T = spec.n_units, len(S)
    beam = [(0.0, np.zeros(0), np.zeros((0, T)))]
    for i in range(n):
        grown = []
        for _, X, U in beam:
            placed = X @ U if len(X) else np.zeros(T)
            resid = S - placed
            levels = np.unique(np.concatenate([S, resid]).round(12))
            cap = spec.x_max if i == 0 else min(spec.x_max, X[-1])
            levels = levels[(levels > 1e-9) & (levels <= cap + 1e-12)]
            for lvl in levels:
                row = best_unit_row(resid, lvl, spec.min_up[i], spec.min_down[i], spec.quasi)
                U2 = np.vstack([U, row])
                X2 = np.append(X, lvl)
                grown.append((float(X2 @ U2.sum(axis=1)), X2, U2))
        if not grown:
            break
        grown.sort(key=lambda g: (-g[0], tuple(-g[1])))
        beam = grown[:width]
    out = []
    for _, X, U in beam:
        if len(X) < n:
            X = np.append(X, np.zeros(n - len(X)))
            U = np.vstack([U, np.zeros((n - len(U), T))])
        out.append((X, U))
    return out


def _states(enc: Encoding, values: np.ndarray) -> np.ndarray:
    return (np.round(values[enc.R]) + np.round(values[enc.Q])) / 2


def _run(enc: Encoding, options: SolverOptions | None, seeds: Iterable[Solution]) -> BBResult:
    inc = seed_incumbent(enc, seeds)
    return bb_solve(enc.model, options, inc, enc.priority)


def _decode(enc: Encoding, res: BBResult, objective: float | None = None, **extra) -> Solution:
    if res.values is None:
        T, n = enc.profile.steps, enc.spec.n_units
        sol = Solution(X=np.zeros(n), schedule=Schedule.from_states(np.zeros((n, T))),
                       Y=np.zeros((n, T)),
                       Ps=np.zeros(T), battery_size=0.0, spill=np.inf, efficiency=0.0,
                       objective=np.inf, gap=np.inf, status=res.status,
                       node_count=res.node_count)
    else:
        sol = enc.decode(res.values, gap=res.gap, status=res.status, node_count=res.node_count,
                         objective=objective)
    sol.extra.update(extra)
    return sol


def default_options() -> SolverOptions:
    """Options used when none are given: pseudo-cost branching suits these models."""
    return SolverOptions(branching="pseudo_cost")


def solve(spec: ProblemSpec, profile: SolarProfile, options: SolverOptions | None = None,
          seeds: Iterable[Solution] = (), epsilon: float | None = None) -> Solution:
    """Minimize spill; with storage the two-phase battery sizing is run instead."""
    options = options or default_options()
    if spec.has_storage:
        return solve_two_phase(spec, profile, options, seeds, epsilon)
    enc = encode(spec, profile, Phase.MIN_SPILL)
    res = _run(enc, options, seeds)
    return _decode(enc, res, bound=res.bound)


def solve_two_phase(spec: ProblemSpec, profile: SolarProfile,
                    options: SolverOptions | None = None,
                    seeds: Iterable[Solution] = (), epsilon: float | None = None) -> Solution:
    """Minimize spill, then the battery rating subject to spill <= spill* + eps.

    ``epsilon`` defaults to ``1e-6 * sum(S)``.  When phase 1 stops at a limit
    the incumbent spill serves as spill*.
    """
    options = options or default_options()
    if not spec.has_storage:
        raise StateError("two-phase sizing requires storage='sized'")
    seeds = list(seeds)
    enc1 = encode(spec, profile, Phase.MIN_SPILL)
    res1 = _run(enc1, options, seeds)
    if res1.values is None:
        return _decode(enc1, res1)
    first = enc1.decode(res1.values)
    enc2 = encode(spec, profile, Phase.MIN_BATTERY, spill_star=res1.objective, epsilon=epsilon)
    res2 = _run(enc2, options, [first, *seeds])
    status = _worse(res1.status, res2.status)
    sol = _decode(enc2, res2, objective=None, spill_star=res1.objective,
                  phase1_gap=res1.gap, phase1_status=res1.status, phase1_nodes=res1.node_count,
                  bound=res2.bound)
    if res2.values is None:
        return sol
    # report the spill objective; the battery objective lives in ``extra``
    sol = replace(sol, objective=sol.spill, status=status,
                  node_count=res1.node_count + res2.node_count)
    sol.extra["battery_objective"] = float(res2.objective)
    return sol
