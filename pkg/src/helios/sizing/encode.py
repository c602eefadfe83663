"""Translate a sizing problem into a MilpModel and solver output back into a Solution.

Naming scheme (1-based unit ``i`` and step ``t``): variables ``X_i``,
``Y_i_t``, ``R_i_t``, ``Q_i_t``, ``V_i_t``, ``W_i_t``, ``Ps_t``, ``Pb``;
rows ``AD_t`` (adequacy), ``L1_i_t`` .. ``L6_i_t`` (scheduled-power
linearization), ``RQ_i_t`` (r >= q), ``ST_i_t`` (static r = q), ``DU``/``DD``
(no direct 0<->1 jump), ``C1``..``C4`` (half-state transitions), ``VW``/``VS``
(start-up/shut-down linking), ``V0_i``/``W0_i``, ``MU``/``MD`` (minimum up and
down time), ``PU_t``/``PL_t`` (battery power), ``BAL``, ``SL_t``/``SH_t``
(state of charge), ``SB_i`` (symmetry breaking) and ``SPILL``.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from ..errors import DomainError, IntegralityError, StateError
from ..milp import MilpModel, VarKind
from ..profile import SolarProfile
from .types import ProblemSpec, Solution, build_solution

INT_TOL = 1e-6
EPS_GUARD = 1e-6  # fraction of the spill slack held back from phase 2


class Phase(str, Enum):
    MIN_SPILL = "min_spill"
    MIN_BATTERY = "min_battery_given_spill"


@dataclass
class Encoding:
    """A sealed model plus the index maps needed to decode it."""

    model: MilpModel
    spec: ProblemSpec
    profile: SolarProfile
    phase: Phase
    X: np.ndarray
    Y: np.ndarray
    R: np.ndarray
    Q: np.ndarray
    V: np.ndarray
    W: np.ndarray
    Ps: np.ndarray | None
    Pb: int | None
    spill_cap: float | None = None

    @property
    def binaries(self) -> np.ndarray:
        return np.concatenate([self.R.ravel(), self.Q.ravel(), self.V.ravel(), self.W.ravel()])

    @property
    def priority(self) -> np.ndarray:
        """Branching rank per variable: states R/Q first, start-up/shut-down V/W after."""
        rank = np.zeros(len(self.model.variables), dtype=int)
        rank[self.V.ravel()] = 1
        rank[self.W.ravel()] = 1
        return rank

    def decode(self, values, *, gap: float = 0.0, status: str = "optimal",
               node_count: int = 0, objective: float | None = None) -> Solution:
        x = np.asarray(values, dtype=float)
        binv = x[self.binaries]
        rounded = np.round(binv)
        bad = np.abs(binv - rounded) > INT_TOL
        if bad.any() or np.any((rounded < 0) | (rounded > 1)):
            names = [self.model.variables[v].name for v in self.binaries[bad]][:5]
            raise IntegralityError(f"binary values not within {INT_TOL} of 0/1: {names}")
        r = np.round(x[self.R])
        q = np.round(x[self.Q])
        U = (r + q) / 2
        Ps = x[self.Ps] if self.Ps is not None else np.zeros(self.profile.steps)
        Pb = float(x[self.Pb]) if self.Pb is not None else 0.0
        obj = objective
        if obj is None:
            from ..milp import evaluate
            obj = evaluate(self.model, x).objective
        return build_solution(x[self.X], U, x[self.Y], Ps, Pb, self.profile, objective=float(obj),
                              gap=gap, status=status, node_count=node_count)

    def assignment(self, X, U, Ps=None, battery_size: float | None = None) -> np.ndarray:
        """Full variable vector for sizes ``X`` and states ``U`` (Y = X*U, V/W derived).

        Without an explicit ``battery_size`` the smallest rating compatible with
        ``Ps`` (power and state-of-charge limits) is used.
        """
        spec, prof = self.spec, self.profile
        X = np.asarray(X, dtype=float)
        U = np.asarray(U, dtype=float)
        R = (U > 0.25).astype(float)
        Q = (U > 0.75).astype(float)
        x = np.zeros(len(self.model.variables))
        x[self.X] = X
        x[self.Y] = X[:, None] * (R + Q) / 2
        x[self.R] = R
        x[self.Q] = Q
        dr = np.diff(R, axis=1)
        x[self.V[:, 1:]] = dr > 0
        x[self.W[:, 1:]] = dr < 0
        if self.Ps is not None:
            Ps = np.zeros(prof.steps) if Ps is None else np.asarray(Ps, dtype=float)
            x[self.Ps] = Ps
            if battery_size is None:
                battery_size = min_battery_for(Ps, prof.dt_hours, spec.battery_hours_ratio)
            x[self.Pb] = battery_size
        return x

    def from_solution(self, sol: Solution) -> np.ndarray:
        return self.assignment(sol.X, sol.U, sol.Ps if self.Ps is not None else None,
                               sol.battery_size if self.Pb is not None else None)


def symmetric_pairs(spec: ProblemSpec) -> list[tuple[int, int]]:
    """(i, j) with j the next unit after i sharing i's minimum up and down times."""
    kinds = list(zip(spec.min_up, spec.min_down))
    pairs = []
    for i, k in enumerate(kinds):
        j = next((j for j in range(i + 1, spec.n_units) if kinds[j] == k), None)
        if j is not None:
            pairs.append((i, j))
    return pairs


def min_battery_for(Ps: np.ndarray, dt_hours: float, hours_ratio: float) -> float:
    """Smallest rating whose power and energy limits admit the net discharge ``Ps``."""
    Ps = np.asarray(Ps, dtype=float)
    if len(Ps) == 0:
        return 0.0
    cum = dt_hours * np.cumsum(Ps)
    return float(max(np.abs(Ps).max(), 2.0 * np.abs(cum).max() / hours_ratio))


def encode(spec: ProblemSpec, profile: SolarProfile, phase: Phase | str = Phase.MIN_SPILL,
           spill_star: float | None = None, epsilon: float | None = None) -> Encoding:
    """Build the sealed MILP for ``spec`` on ``profile``.

    ``phase=MIN_BATTERY`` needs ``spill_star``; the spill row is capped at
    ``spill_star + epsilon`` (default ``1e-6 * sum(S)``) and the battery rating
    becomes the objective.
    """
    phase = Phase(phase)
    S = profile.array
    T, n = profile.steps, spec.n_units
    if max(spec.min_up + spec.min_down) > T:
        raise DomainError(f"profile has {T} steps, shorter than a minimum up/down time")
    if phase is Phase.MIN_BATTERY:
        if not spec.has_storage:
            raise StateError("battery minimization requires storage='sized'")
        if spill_star is None:
            raise DomainError("battery minimization needs the phase-1 spill")
    M = spec.big_m
    xmax = spec.x_max
    mdl = MilpModel(f"helios{n}")
    add_var, add_row = mdl.add_variable, mdl.add_constraint

    X = np.array([add_var(VarKind.CONTINUOUS, 0.0, xmax, f"X_{i+1}") for i in range(n)])

    def grid(sym: str, kind: VarKind, lo: float, hi: float) -> np.ndarray:
        return np.array([[add_var(kind, lo, hi, f"{sym}_{i+1}_{t+1}") for t in range(T)]
                         for i in range(n)])

    Y = grid("Y", VarKind.CONTINUOUS, 0.0, xmax)
    R = grid("R", VarKind.BINARY, 0.0, 1.0)
    Q = grid("Q", VarKind.BINARY, 0.0, 1.0)
    V = grid("V", VarKind.BINARY, 0.0, 1.0)
    W = grid("W", VarKind.BINARY, 0.0, 1.0)
    Ps = Pb = None
    if spec.has_storage:
        cap = spec.battery_cap(profile)
        Ps = np.array([add_var(VarKind.CONTINUOUS, -cap, cap, f"Ps_{t+1}") for t in range(T)])
        Pb = add_var(VarKind.CONTINUOUS, 0.0, cap, "Pb")

    # resource adequacy
    for t in range(T):
        terms = [(Y[i, t], 1.0) for i in range(n)]
        if Ps is not None:
            terms.append((Ps[t], -1.0))
        add_row(terms, "<=", S[t], f"AD_{t+1}")

    for i in range(n):
        for t in range(T):
            y, x, r, q = Y[i, t], X[i], R[i, t], Q[i, t]
            tag = f"{i+1}_{t+1}"
            # Y = X*(r+q)/2; the half-state pair is relaxed by M*(1 - r + q),
            # the full-state lower row by M*(1 - (r+q)/2)
            add_row([(y, -1.0)], "<=", 0.0, f"L1_{tag}")
            add_row([(y, 1.0), (r, -M / 2), (q, -M / 2)], "<=", 0.0, f"L2_{tag}")
            add_row([(y, 1.0), (x, -0.5), (r, M), (q, -M)], "<=", M, f"L3_{tag}")
            add_row([(y, -1.0), (x, 0.5), (r, M), (q, -M)], "<=", M, f"L4_{tag}")
            add_row([(y, 1.0), (x, -1.0)], "<=", 0.0, f"L5_{tag}")
            add_row([(y, -1.0), (x, 1.0), (r, M / 2), (q, M / 2)], "<=", M, f"L6_{tag}")
            if Ps is None and S[t] < M:
                # valid without storage: a committed unit (r = 1) carries at most S;
                # redundant for integral r, it only tightens the relaxation
                add_row([(y, 1.0), (r, -S[t])], "<=", 0.0, f"LS_{tag}")
            add_row([(q, 1.0), (r, -1.0)], "<=", 0.0, f"RQ_{tag}")
            if not spec.quasi:
                add_row([(r, 1.0), (q, -1.0)], "=", 0.0, f"ST_{tag}")

    if spec.quasi:
        for i in range(n):
            for t in range(T):
                tag = f"{i+1}_{t+1}"
                now = [(R[i, t], 1.0), (Q[i, t], 1.0)]
                prev = [(R[i, t - 1], -1.0), (Q[i, t - 1], -1.0)] if t > 0 else []
                # |u_t - u_{t-1}| <= 1/2, doubled; step 0 is preceded by "off"
                add_row(now + prev, "<=", 1.0, f"DU_{tag}")
                if t > 0:
                    add_row([(v, -c) for v, c in now + prev], "<=", 1.0, f"DD_{tag}")
                if t + 1 < T:
                    # a half state at t forces u_{t+1} = 1 - u_{t-1}; indicator is 1 - r_t + q_t
                    ind = [(R[i, t], -1.0), (Q[i, t], 1.0)]
                    for k, sym in enumerate((R, Q)):
                        nxt = (sym[i, t + 1], 1.0)
                        pre = [(sym[i, t - 1], 1.0)] if t > 0 else []
                        add_row([nxt, *pre] + [(v, -c) for v, c in ind], "<=", 2.0,
                                f"C{2*k+1}_{tag}")
                        add_row([nxt, *pre] + ind, ">=", 0.0, f"C{2*k+2}_{tag}")

    for i in range(n):
        add_row([(V[i, 0], 1.0)], "=", 0.0, f"V0_{i+1}")
        add_row([(W[i, 0], 1.0)], "=", 0.0, f"W0_{i+1}")
        for t in range(1, T):
            tag = f"{i+1}_{t+1}"
            add_row([(V[i, t], 1.0), (W[i, t], -1.0), (R[i, t], -1.0), (R[i, t - 1], 1.0)],
                    "=", 0.0, f"VW_{tag}")
            add_row([(V[i, t], 1.0), (W[i, t], 1.0)], "<=", 1.0, f"VS_{tag}")
        up, down = spec.min_up[i], spec.min_down[i]
        for t in range(up - 1, T):
            add_row([(V[i, h], 1.0) for h in range(t - up + 1, t + 1)] + [(R[i, t], -1.0)],
                    "<=", 0.0, f"MU_{i+1}_{t+1}")
        for t in range(down - 1, T):
            add_row([(W[i, h], 1.0) for h in range(t - down + 1, t + 1)] + [(R[i, t], 1.0)],
                    "<=", 1.0, f"MD_{i+1}_{t+1}")

    if Ps is not None:
        c = spec.battery_hours_ratio
        dt = profile.dt_hours
        for t in range(T):
            add_row([(Ps[t], 1.0), (Pb, -1.0)], "<=", 0.0, f"PU_{t+1}")
            add_row([(Ps[t], -1.0), (Pb, -1.0)], "<=", 0.0, f"PL_{t+1}")
        add_row([(Ps[t], 1.0) for t in range(T)], "=", 0.0, "BAL")
        for t in range(T):
            cum = [(Ps[h], -dt) for h in range(t + 1)]
            # E0 = c*Pb/2, capacity c*Pb
            add_row(cum + [(Pb, c / 2)], ">=", 0.0, f"SL_{t+1}")
            add_row(cum + [(Pb, -c / 2)], "<=", 0.0, f"SH_{t+1}")

    if spec.symmetry_breaking:
        # only units with equal minimum times are interchangeable; order each
        # against the next unit of its own kind
        for i, j in symmetric_pairs(spec):
            add_row([(X[i], 1.0), (X[j], -1.0)], ">=", 0.0, f"SB_{i+1}")

    total = float(S.sum())
    spill_terms = [(int(v), -1.0) for v in Y.ravel()]
    if Ps is not None:
        spill_terms += [(int(v), 1.0) for v in Ps]
    cap_value = None
    if phase is Phase.MIN_SPILL:
        mdl.set_objective(spill_terms, offset=total)
    else:
        eps = 1e-6 * total if epsilon is None else float(epsilon)
        # a sliver of eps absorbs rounding so the solved spill stays within spill* + eps
        cap_value = float(spill_star) + eps * (1.0 - EPS_GUARD)
        add_row(spill_terms, "<=", cap_value - total, "SPILL")
        mdl.set_objective([(Pb, 1.0)])
    mdl.seal()
    return Encoding(mdl, spec, profile, phase, X, Y, R, Q, V, W, Ps, Pb, cap_value)
