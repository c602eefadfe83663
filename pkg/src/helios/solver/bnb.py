"""Best-first branch and bound over binary variables.

Open nodes are ordered by ``(parent bound, -depth, child rank, sequence)``.
Ties on the bound therefore plunge depth-first into the rounded-nearest child,
which finds incumbents early on plateaus of equal relaxation value while the
queue as a whole stays best-first, so the reported dual bound never
decreases.  Child nodes restart the simplex from the parent's final basis.
"""

from __future__ import annotations

import heapq
import itertools
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import TextIO

import numpy as np

from ..errors import DomainError, SeedRejected
from ..milp import MilpModel, as_vector, evaluate
from .simplex import Basis, LpEngine, LpResult

INT_TOL = 1e-6
ROW_TOL = 1e-7


@dataclass
class SolverOptions:
    rel_gap: float = 1e-6
    abs_gap: float = 1e-9
    node_limit: int | None = None
    time_limit_seconds: float | None = None
    branching: str = "most_fractional"  # or "pseudo_cost"
    parallel_nodes: bool = False
    workers: int = 4
    node_log: TextIO | None = None

    def __post_init__(self):
        if self.rel_gap < 0 or self.abs_gap < 0:
            raise DomainError("gap tolerances must be nonnegative")
        if self.branching not in ("most_fractional", "pseudo_cost"):
            raise DomainError(f"unknown branching rule {self.branching!r}")


@dataclass(frozen=True)
class Incumbent:
    values: np.ndarray
    objective: float


@dataclass(frozen=True)
class BBResult:
    values: np.ndarray | None
    objective: float
    bound: float
    gap: float
    status: str  # optimal | feasible_gap | infeasible | time_limit
    node_count: int
    bound_history: tuple[float, ...] = ()


@dataclass(frozen=True)
class _Fix:
    var: int
    value: float
    prev: "_Fix | None"


@dataclass(order=True)
class _Node:
    key: tuple
    depth: int = field(compare=False)
    fixes: _Fix | None = field(compare=False)
    basis: Basis | None = field(compare=False)
    parent_obj: float = field(compare=False, default=-np.inf)
    branch: tuple[int, float, int] | None = field(compare=False, default=None)


def relative_gap(incumbent: float, bound: float) -> float:
    if not np.isfinite(incumbent):
        return np.inf
    return max(0.0, (incumbent - bound) / max(abs(incumbent), 1.0))


def warm_start(model: MilpModel, assignment) -> Incumbent:
    """Validate a full assignment and return it as an incumbent.

    Infeasible seeds are rejected, never repaired: :class:`SeedRejected`
    carries the names of the violated rows (and of out-of-bound variables).
    """
    x = as_vector(model, assignment).copy()
    arr = model.arrays()
    problems = []
    for v in model.variables:
        val = x[v.id]
        if val < v.lower - ROW_TOL or val > v.upper + ROW_TOL:
            problems.append(f"bound:{v.name}")
    binv = arr.is_binary
    frac = np.abs(x[binv] - np.round(x[binv])) > INT_TOL
    problems += [f"integrality:{model.variables[i].name}" for i in np.flatnonzero(binv)[frac]]
    ev = evaluate(model, x)
    problems += ev.violations(model, ROW_TOL)
    if problems:
        raise SeedRejected(f"seed violates {len(problems)} constraint(s)", problems)
    x[binv] = np.round(x[binv])
    return Incumbent(x, evaluate(model, x).objective)


def polish(model: MilpModel, values, engine: LpEngine | None = None) -> Incumbent | None:
    """Fix every binary at its rounded value and re-optimize the continuous part."""
    engine = engine or LpEngine(model)
    x = as_vector(model, values)
    arr = model.arrays()
    lo = arr.lower.copy()
    hi = arr.upper.copy()
    b = np.flatnonzero(arr.is_binary)
    lo[b] = hi[b] = np.clip(np.round(x[b]), 0, 1)
    res = engine.solve(lo, hi)
    if res.status != "optimal":
        return None
    vals = res.values.copy()
    vals[b] = lo[b]
    return Incumbent(vals, res.objective)


class _Search:
    def __init__(self, model: MilpModel, options: SolverOptions, incumbent: Incumbent | None,
                 priority: np.ndarray | None = None):
        self.model = model
        self.opt = options
        self.arr = model.arrays()
        self.engine = LpEngine(model)
        self.bin = np.flatnonzero(self.arr.is_binary)
        prio = np.zeros(len(self.arr.c), dtype=int) if priority is None else np.asarray(priority)
        self.prio = prio[self.bin]
        lo = np.maximum(self.arr.lower, self.engine.row_lower)
        hi = np.minimum(self.arr.upper, self.engine.row_upper)
        # integer rounding of binary bounds implied by singleton rows
        lo[self.bin] = np.ceil(lo[self.bin] - INT_TOL)
        hi[self.bin] = np.floor(hi[self.bin] + INT_TOL)
        self.base_lo, self.base_hi = lo, hi
        self.inc = incumbent
        self.node_count = 0
        self.bound = -np.inf
        self.history: list[float] = []
        self.seq = itertools.count()
        self.pc_sum = np.zeros((len(self.arr.c), 2))
        self.pc_cnt = np.zeros((len(self.arr.c), 2))
        self.started = time.perf_counter()
        self._local = threading.local()

    # -- bookkeeping ------------------------------------------------------
    @property
    def inc_obj(self) -> float:
        return self.inc.objective if self.inc is not None else np.inf

    def cutoff(self) -> float:
        if self.inc is None:
            return np.inf
        tol = max(self.opt.abs_gap, self.opt.rel_gap * max(abs(self.inc.objective), 1.0))
        return self.inc.objective - tol

    def bounds_for(self, node: _Node) -> tuple[np.ndarray, np.ndarray]:
        lo, hi = self.base_lo.copy(), self.base_hi.copy()
        f = node.fixes
        while f is not None:
            lo[f.var] = hi[f.var] = f.value
            f = f.prev
        return lo, hi

    def out_of_limits(self) -> bool:
        if self.opt.node_limit is not None and self.node_count >= self.opt.node_limit:
            return True
        t = self.opt.time_limit_seconds
        return t is not None and time.perf_counter() - self.started >= t

    def log(self, node: _Node, bound: float) -> None:
        if self.opt.node_log is not None:
            inc = self.inc_obj
            self.opt.node_log.write(
                f"{self.node_count},{node.depth},{bound:.10g},{inc:.10g},"
                f"{relative_gap(inc, self.bound):.6g}\n")

    def _engine(self) -> LpEngine:
        eng = getattr(self._local, "engine", None)
        if eng is None:
            eng = self._local.engine = LpEngine(self.model)
        return eng

    # -- branching ------------------------------------------------------------
    def choose(self, values: np.ndarray) -> int | None:
        v = values[self.bin]
        frac = np.abs(v - np.round(v))
        mask = frac > INT_TOL
        if not mask.any():
            return None
        # only the most urgent priority class with fractional members competes
        mask &= self.prio == self.prio[mask].min()
        cand = self.bin[mask]
        f = v[mask] - np.floor(v[mask])
        if self.opt.branching == "pseudo_cost" and self.pc_cnt.sum() > 0:
            seen = self.pc_cnt[cand] > 0
            avg = np.where(self.pc_cnt.sum(0) > 0,
                           self.pc_sum.sum(0) / np.maximum(self.pc_cnt.sum(0), 1), 1.0)
            unit = np.where(seen, self.pc_sum[cand] / np.maximum(self.pc_cnt[cand], 1), avg)
            score = np.maximum(unit[:, 0] * f, 1e-9) * np.maximum(unit[:, 1] * (1 - f), 1e-9)
            return int(cand[np.argmax(score)])
        # most fractional; argmax returns the lowest id among ties
        closeness = np.abs(f - 0.5)
        return int(cand[np.argmin(closeness)])

    def record_pseudo_cost(self, node: _Node, obj: float) -> None:
        if node.branch is None or not np.isfinite(node.parent_obj):
            return
        var, frac, side = node.branch
        dist = frac if side == 0 else 1 - frac
        if dist > 0 and np.isfinite(obj):
            self.pc_sum[var, side] += max(obj - node.parent_obj, 0.0) / dist
            self.pc_cnt[var, side] += 1

    def children(self, node: _Node, lp: LpResult, var: int) -> list[_Node]:
        val = lp.values[var]
        up_first = val >= 0.5
        frac = val - np.floor(val)
        kids = []
        for rank, side in enumerate((1, 0) if up_first else (0, 1)):
            kids.append(_Node(
                key=(lp.objective, -(node.depth + 1), rank, next(self.seq)),
                depth=node.depth + 1,
                fixes=_Fix(var, float(side), node.fixes),
                basis=lp.basis,
                parent_obj=lp.objective,
                branch=(var, frac, side),
            ))
        return kids

    # -- main loop --------------------------------------------------------
    def process(self, node: _Node, lp: LpResult, heap: list) -> None:
        self.node_count += 1
        if self.opt.branching == "pseudo_cost":
            self.record_pseudo_cost(node, lp.objective if lp.status == "optimal" else np.inf)
        self.log(node, lp.objective if lp.status == "optimal" else np.inf)
        if lp.status == "unbounded":
            raise DomainError("LP relaxation is unbounded")
        if lp.status != "optimal" or lp.objective >= self.cutoff():
            return
        var = self.choose(lp.values)
        if var is None:
            cand = polish(self.model, lp.values, self._engine())
            if cand is None or cand.objective > lp.objective + 1e-7:
                vals = lp.values.copy()
                vals[self.bin] = np.round(vals[self.bin])
                cand = Incumbent(vals, lp.objective)
            if cand.objective < self.inc_obj:
                self.inc = cand
            return
        for kid in self.children(node, lp, var):
            heapq.heappush(heap, kid)

    def run(self) -> BBResult:
        root = _Node(key=(-np.inf, 0, 0, next(self.seq)), depth=0, fixes=None, basis=None)
        heap: list[_Node] = [root]
        limited = False
        pool = ThreadPoolExecutor(self.opt.workers) if self.opt.parallel_nodes else None
        try:
            while heap:
                # discard nodes that can no longer improve the incumbent
                while heap and heap[0].key[0] >= self.cutoff():
                    heapq.heappop(heap)
                if not heap:
                    break
                self.bound = max(self.bound, min(heap[0].key[0], self.inc_obj))
                self.history.append(self.bound)
                if self.out_of_limits():
                    limited = True
                    break
                if pool is None:
                    node = heapq.heappop(heap)
                    lo, hi = self.bounds_for(node)
                    lp = self.engine.solve(lo, hi, node.basis)
                    self.process(node, lp, heap)
                else:
                    batch = [heapq.heappop(heap) for _ in range(min(self.opt.workers, len(heap)))]
                    results = list(pool.map(self._solve_node, batch))
                    for node, lp in zip(batch, results):
                        self.process(node, lp, heap)
        finally:
            if pool is not None:
                pool.shutdown()
        if heap and not limited:
            limited = True
        if not heap:
            self.bound = max(self.bound, self.inc_obj) if self.inc is not None else self.bound
        else:
            self.bound = max(self.bound, min(min(n.key[0] for n in heap), self.inc_obj))
        self.history.append(self.bound)
        inc = self.inc
        if inc is None:
            status = "time_limit" if limited else "infeasible"
            return BBResult(None, np.inf, self.bound, np.inf, status, self.node_count,
                            tuple(self.history))
        gap = relative_gap(inc.objective, self.bound)
        tol = max(self.opt.abs_gap, self.opt.rel_gap * max(abs(inc.objective), 1.0))
        status = "optimal" if (not limited or inc.objective - self.bound <= tol) else "feasible_gap"
        return BBResult(inc.values, inc.objective, self.bound, gap, status, self.node_count,
                        tuple(self.history))

    def _solve_node(self, node: _Node) -> LpResult:
        lo, hi = self.bounds_for(node)
        return self._engine().solve(lo, hi, node.basis)


def bb_solve(model: MilpModel, options: SolverOptions | None = None,
             incumbent: Incumbent | None = None,
             priority: np.ndarray | None = None) -> BBResult:
    """Solve ``model`` to within the configured gap, or until a limit is hit.

    ``priority`` optionally ranks variables for branching (lower first); the
    branching rule then only chooses among fractional binaries of the lowest
    rank present.
    """
    search = _Search(model, options or SolverOptions(), incumbent, priority)
    return search.run()
