"""Constructive static schedule used to seed branch and bound."""

from __future__ import annotations

import numpy as np

from ..errors import DomainError
from ..profile import SolarProfile
from ..sizing.types import ProblemSpec, Solution, build_solution

_EPS = 1e-12


def quantile_sizes(S: np.ndarray, n: int, x_max: float) -> np.ndarray:
    """Split the positive solar levels into ``n`` stacked bands, largest first."""
    pos = np.sort(S[S > _EPS])
    if len(pos) == 0:
        return np.zeros(n)
    levels = np.quantile(pos, [(n - k) / n for k in range(n)], method="lower")
    levels = np.minimum(levels, x_max * np.arange(n, 0, -1))
    bands = levels - np.append(levels[1:], 0.0)
    return np.clip(np.sort(bands)[::-1], 0.0, x_max)


def schedule_units(S: np.ndarray, X: np.ndarray, min_up, min_down) -> np.ndarray:
    """Commit units one by one (largest first) where the residual solar covers them.

    A unit is only started when the residual covers it for its whole minimum
    up time, so the schedule never overloads a step; minimum down time is
    honoured after every shut-down.
    """
    n, T = len(X), len(S)
    resid = S.astype(float).copy()
    U = np.zeros((n, T))
    for i in np.argsort(-X, kind="stable"):
        size = X[i]
        if size <= _EPS:
            continue
        on, since_off = False, None
        t = 0
        while t < T:
            if on:
                if resid[t] + _EPS >= size:
                    U[i, t] = 1.0
                    t += 1
                    continue
                on, since_off = False, t
            blocked = since_off is not None and t - since_off < min_down[i]
            window = slice(t, min(t + min_up[i], T))
            if not blocked and np.all(resid[window] + _EPS >= size):
                on = True
                U[i, window] = 1.0
                t = window.stop
                continue
            t += 1
        resid -= size * U[i]
    return U


# commitment automaton; the r-value of each state decides run membership
OFF, HALF_UP, ON, HALF_DOWN = 0, 1, 2, 3
_LEVEL = {OFF: 0.0, HALF_UP: 0.5, ON: 1.0, HALF_DOWN: 0.5}
_NEXT_STATIC = {OFF: (OFF, ON), ON: (ON, OFF)}
_NEXT_QUASI = {OFF: (OFF, HALF_UP), HALF_UP: (ON,), ON: (ON, HALF_DOWN), HALF_DOWN: (OFF,)}


def best_unit_row(resid: np.ndarray, size: float, min_up: int, min_down: int,
                  quasi: bool = False) -> np.ndarray:
    """States of one unit maximizing its energy without exceeding ``resid``.

    Dynamic program over (automaton state, run length capped at the minimum
    time, whether the run began at the first step and is thus exempt).  Runs
    cut by the horizon end need not reach their minimum length.
    """
    T = len(resid)
    nxt = _NEXT_QUASI if quasi else _NEXT_STATIC
    starts = (OFF, HALF_UP) if quasi else (OFF, ON)
    cap = max(min_up, min_down)

    def fits(state, t):
        return state == OFF or _LEVEL[state] * size <= resid[t] + _EPS

    # key: (state, run length, exempt) -> (energy, back-pointer key)
    layer = {}
    for st in starts:
        if fits(st, 0):
            layer[(st, 1, True)] = (_LEVEL[st], None)
    history = [layer]
    for t in range(1, T):
        new: dict = {}
        for (st, k, exempt), (val, _) in sorted(layer.items()):
            on = st != OFF
            for nx in nxt[st]:
                if not fits(nx, t):
                    continue
                if (nx != OFF) != on:
                    need = min_up if on else min_down
                    if not exempt and k < need:
                        continue
                    key = (nx, 1, False)
                else:
                    key = (nx, min(k + 1, cap), exempt)
                cand = val + _LEVEL[nx]
                if key not in new or cand > new[key][0] + _EPS:
                    new[key] = (cand, (st, k, exempt))
        layer = new
        history.append(layer)
    row = np.zeros(T)
    if not layer:
        return row  # unreachable: the all-off path always fits
    key = max(sorted(layer), key=lambda k: layer[k][0])
    for t in range(T - 1, -1, -1):
        row[t] = _LEVEL[key[0]]
        key = history[t][key][1]
    return row


def fit_schedule(S: np.ndarray, X: np.ndarray, spec: ProblemSpec,
                 U: np.ndarray | None = None, rounds: int = 4) -> np.ndarray:
    """Coordinate ascent: re-time each unit optimally against the others' load."""
    n, T = len(X), len(S)
    U = np.zeros((n, T)) if U is None else U.copy()
    order = np.argsort(-X, kind="stable")
    for _ in range(rounds):
        changed = False
        for i in order:
            if X[i] <= _EPS:
                continue
            resid = S - X @ U + X[i] * U[i]
            row = best_unit_row(resid, X[i], spec.min_up[i], spec.min_down[i], spec.quasi)
            if row.sum() > U[i].sum() + _EPS:
                U[i] = row
                changed = True
        if not changed:
            break
    return U


def greedy_heuristic(spec: ProblemSpec, profile: SolarProfile) -> Solution:
    """A feasible static schedule with sizes from solar quantiles and no battery use.

    Sizes come out in descending order, so symmetry-breaking rows hold.  With
    no positive solar every size is zero and every unit off.
    """
    if spec.quasi:
        raise DomainError("the greedy heuristic builds static schedules only")
    S = profile.array
    T = profile.steps
    X = quantile_sizes(S, spec.n_units, spec.x_max)
    U = schedule_units(S, X, spec.min_up, spec.min_down)
    Y = X[:, None] * U
    return build_solution(X, U, Y, np.zeros(T), 0.0, profile, status="heuristic")
