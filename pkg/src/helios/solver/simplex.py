"""Bounded-variable primal simplex for the continuous relaxation of a MilpModel.

Every row ``a x (<=,=,>=) b`` gets a slack ``s`` with ``a x + s = b`` and the
sign of ``s`` restricted by the sense.  Variables are kept at one of their
bounds unless basic.  A composite phase 1 minimizes the sum of bound
violations of the basic variables, so any starting basis can be used; branch
and bound exploits this to restart child nodes from the parent's final basis.

Pricing is Dantzig's rule with a two-pass Harris ratio test.  After
``STALL_LIMIT`` consecutive degenerate pivots the engine switches to Bland's
rule (lowest-index entering and leaving) until a pivot makes progress.

Singleton rows are folded into variable bounds before the simplex starts; that
is the only presolve performed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from ..errors import SolverError, StateError
from ..milp import MilpModel

FEAS_TOL = 1e-9
OPT_TOL = 1e-9
PIVOT_TOL = 1e-9
STALL_LIMIT = 40
REFACTOR_EVERY = 80
DENSE_LIMIT = 250

BASIC, AT_LOWER, AT_UPPER, FREE = 0, 1, 2, 3


@dataclass(frozen=True)
class Basis:
    """Snapshot of a simplex basis over structurals + slacks of one engine."""

    head: np.ndarray
    state: np.ndarray


@dataclass(frozen=True)
class LpResult:
    status: str  # "optimal" | "infeasible" | "unbounded"
    values: np.ndarray
    objective: float
    iterations: int = 0
    basis: Basis | None = None


class _DenseFactor:
    """Explicit basis inverse with product-form row updates; for small m."""

    def __init__(self, B: sp.csc_matrix):
        try:
            self.inv = scipy.linalg.inv(B.toarray(), check_finite=False)
        except (np.linalg.LinAlgError, ValueError) as exc:
            raise np.linalg.LinAlgError(str(exc)) from exc
        if not np.all(np.isfinite(self.inv)):
            raise np.linalg.LinAlgError("singular basis")
        self.updates = 0

    def ftran(self, idx: np.ndarray, vals: np.ndarray) -> np.ndarray:
        return self.inv[:, idx] @ vals

    def ftran_dense(self, rhs: np.ndarray) -> np.ndarray:
        return self.inv @ rhs

    def btran(self, c: np.ndarray) -> np.ndarray:
        nz = np.flatnonzero(c)
        if len(nz) == 0:
            return np.zeros(len(c))
        return c[nz] @ self.inv[nz]

    def update(self, p: int, alpha: np.ndarray) -> None:
        row = self.inv[p] / alpha[p]
        self.inv -= np.outer(alpha, row)
        self.inv[p] = row
        self.updates += 1


class _SparseFactor:
    """SuperLU factorization of the basis plus an eta file of column replacements."""

    def __init__(self, B: sp.csc_matrix):
        try:
            self.lu = spla.splu(B, permc_spec="COLAMD", options={"SymmetricMode": False})
        except RuntimeError as exc:
            raise np.linalg.LinAlgError(str(exc)) from exc
        self.m = B.shape[0]
        self.etas: list[tuple[int, np.ndarray]] = []
        self.updates = 0

    def ftran(self, idx: np.ndarray, vals: np.ndarray) -> np.ndarray:
        rhs = np.zeros(self.m)
        rhs[idx] = vals
        return self.ftran_dense(rhs)

    def ftran_dense(self, rhs: np.ndarray) -> np.ndarray:
        z = self.lu.solve(rhs)
        for p, d in self.etas:
            zp = z[p] / d[p]
            if zp != 0.0:
                z -= d * zp
            z[p] = zp
        return z

    def btran(self, c: np.ndarray) -> np.ndarray:
        w = c.copy()
        for p, d in reversed(self.etas):
            w[p] -= (w @ d - w[p]) / d[p]
        return self.lu.solve(w, trans="T")

    def update(self, p: int, alpha: np.ndarray) -> None:
        self.etas.append((p, alpha.copy()))
        self.updates += 1


class LpEngine:
    """Reusable simplex engine bound to one sealed model.

    ``solve`` may be called repeatedly with different variable bounds; the
    engine keeps its last factorization so that a solve starting from the
    basis it just finished with needs no refactorization.
    """

    def __init__(self, model: MilpModel):
        if not model.sealed:
            raise StateError("lp_solve requires a sealed model")
        arr = model.arrays()
        self.n = arr.A.shape[1]
        self.c_struct = arr.c
        self.offset = arr.offset
        self.var_lower = arr.lower
        self.var_upper = arr.upper
        self.trivially_infeasible = False
        self._presolve(arr)

    # -- presolve ---------------------------------------------------------
    def _presolve(self, arr) -> None:
        A = arr.A.tocsr()
        nnz = np.diff(A.indptr)
        rlo = np.full(self.n, -np.inf)
        rhi = np.full(self.n, np.inf)
        for i in np.flatnonzero(nnz == 0):
            s, b = arr.sense[i], arr.rhs[i]
            if (s <= 0 and b < -FEAS_TOL) or (s >= 0 and b > FEAS_TOL) or (s == 0 and abs(b) > FEAS_TOL):
                self.trivially_infeasible = True
        for i in np.flatnonzero(nnz == 1):
            k = A.indptr[i]
            j, a = A.indices[k], A.data[k]
            if a == 0:
                continue
            bound = arr.rhs[i] / a
            s = arr.sense[i] if a > 0 else -arr.sense[i]
            if s <= 0:
                rhi[j] = min(rhi[j], bound)
            if s >= 0:
                rlo[j] = max(rlo[j], bound)
        self.row_lower = rlo
        self.row_upper = rhi
        keep = np.flatnonzero(nnz >= 2)
        self.rows_kept = keep
        Ak = A[keep]
        self.m = m = len(keep)
        self.b = arr.rhs[keep].astype(float)
        sense = arr.sense[keep]
        self.K = sp.hstack([Ak, sp.identity(m, format="csr")], format="csc")
        self.KT = self.K.T.tocsr()
        self.N = self.n + m
        self.slack_lower = np.where(sense >= 0, np.where(sense == 0, 0.0, -np.inf), 0.0)
        self.slack_upper = np.where(sense <= 0, np.where(sense == 0, 0.0, np.inf), 0.0)
        self.cost = np.concatenate([self.c_struct, np.zeros(m)])
        self._factor = None
        self._factor_head: np.ndarray | None = None

    # -- helpers ----------------------------------------------------------
    def _factorize(self, head: np.ndarray):
        B = self.K[:, head]
        if self.m <= DENSE_LIMIT:
            return _DenseFactor(B.tocsc())
        return _SparseFactor(B.tocsc())

    def _column(self, j: int) -> tuple[np.ndarray, np.ndarray]:
        s, e = self.K.indptr[j], self.K.indptr[j + 1]
        return self.K.indices[s:e], self.K.data[s:e]

    def slack_basis(self) -> Basis:
        head = np.arange(self.n, self.N)
        state = np.empty(self.N, dtype=np.int8)
        state[self.n:] = BASIC
        state[:self.n] = AT_LOWER
        return Basis(head, state)

    # -- main entry -------------------------------------------------------
    def solve(self, lower: np.ndarray | None = None, upper: np.ndarray | None = None,
              basis: Basis | None = None, max_iter: int | None = None) -> LpResult:
        lo = np.empty(self.N)
        hi = np.empty(self.N)
        lo[: self.n] = np.maximum(self.var_lower if lower is None else lower, self.row_lower)
        hi[: self.n] = np.minimum(self.var_upper if upper is None else upper, self.row_upper)
        lo[self.n:] = self.slack_lower
        hi[self.n:] = self.slack_upper
        if self.trivially_infeasible or np.any(lo > hi + FEAS_TOL):
            return LpResult("infeasible", np.zeros(self.n), np.inf)
        hi = np.maximum(hi, lo)
        if basis is None:
            basis = self.slack_basis()
        head = basis.head.copy()
        state = basis.state.copy()
        try:
            return self._simplex(lo, hi, head, state, max_iter)
        except np.linalg.LinAlgError:
            # a warm basis went singular after bound changes; restart cold once
            self._factor = None
            sb = self.slack_basis()
            return self._simplex(lo, hi, sb.head.copy(), sb.state.copy(), max_iter)

    def _place_nonbasic(self, lo, hi, state, x) -> None:
        nb = state != BASIC
        fin_lo = np.isfinite(lo)
        fin_hi = np.isfinite(hi)
        st = state.copy()
        # keep the recorded side when it is finite, else fall back to the finite side
        want_hi = nb & (st == AT_UPPER) & fin_hi
        want_lo = nb & ~want_hi & fin_lo
        want_hi2 = nb & ~want_hi & ~want_lo & fin_hi
        free = nb & ~want_hi & ~want_lo & ~want_hi2
        state[want_lo] = AT_LOWER
        state[want_hi | want_hi2] = AT_UPPER
        state[free] = FREE
        x[want_lo] = lo[want_lo]
        x[want_hi | want_hi2] = hi[want_hi | want_hi2]
        x[free] = 0.0

    def _basic_values(self, factor, head, x) -> np.ndarray:
        xn = x.copy()
        xn[head] = 0.0
        rhs = self.b - self.K @ xn
        return factor.ftran_dense(rhs)

    def _drifted(self, x: np.ndarray) -> bool:
        scale = 1.0 + np.abs(self.b).max(initial=0.0)
        return bool(np.abs(self.K @ x - self.b).max(initial=0.0) > 1e-10 * scale)

    def _simplex(self, lo, hi, head, state, max_iter) -> LpResult:
        n, m = self.n, self.m
        x = np.zeros(self.N)
        self._place_nonbasic(lo, hi, state, x)
        if (self._factor is not None and self._factor_head is not None
                and np.array_equal(self._factor_head, head)):
            factor = self._factor
        else:
            factor = self._factorize(head)
        x[head] = self._basic_values(factor, head, x)
        fixed = lo == hi
        limit = max_iter if max_iter is not None else 50 * (m + n) + 1000
        iters = 0
        stall = 0
        bland = False
        verified = False
        cost = self.cost
        while True:
            if iters >= limit:
                raise SolverError(f"simplex iteration limit {limit} reached")
            xb = x[head]
            lb, ub = lo[head], hi[head]
            below = xb < lb - FEAS_TOL
            above = xb > ub + FEAS_TOL
            phase1 = bool(below.any() or above.any())
            if phase1:
                cb = np.where(below, -1.0, np.where(above, 1.0, 0.0))
                y = factor.btran(cb)
                d = -(self.KT @ y)
            else:
                y = factor.btran(cost[head])
                d = cost - self.KT @ y
            d[head] = 0.0
            elig = ((state == AT_LOWER) & (d < -OPT_TOL)) | ((state == AT_UPPER) & (d > OPT_TOL)) \
                | ((state == FREE) & (np.abs(d) > OPT_TOL))
            elig &= ~fixed
            cand = np.flatnonzero(elig)
            if len(cand) == 0:
                if not verified and factor.updates > 0 and self._drifted(x):
                    # the updated inverse lost accuracy: refactor and re-check
                    factor = self._factorize(head)
                    x[head] = self._basic_values(factor, head, x)
                    verified = True
                    continue
                break
            verified = False
            if bland:
                q = int(cand[0])
            else:
                q = int(cand[np.argmax(np.abs(d[cand]))])
            direction = 1.0 if d[q] < 0 else -1.0
            idx, vals = self._column(q)
            alpha = factor.ftran(idx, vals)
            delta = -direction * alpha
            theta, p, to_upper = self._ratio(xb, lb, ub, delta, bland, head)
            flip = hi[q] - lo[q]
            iters += 1
            if p < 0 and not np.isfinite(flip):
                if phase1:
                    raise SolverError("phase 1 ray without a breakpoint")
                self._factor, self._factor_head = factor, head.copy()
                return LpResult("unbounded", x[:n].copy(), -np.inf, iters, Basis(head.copy(), state.copy()))
            if p < 0 or flip <= theta:
                theta = flip
                x[head] += delta * theta
                x[q] = hi[q] if direction > 0 else lo[q]
                state[q] = AT_UPPER if direction > 0 else AT_LOWER
            else:
                x[head] += delta * theta
                x[q] += direction * theta
                leaving = head[p]
                x[leaving] = hi[leaving] if to_upper else lo[leaving]
                state[leaving] = AT_UPPER if to_upper else AT_LOWER
                head[p] = q
                state[q] = BASIC
                factor.update(p, alpha)
                if factor.updates >= REFACTOR_EVERY:
                    factor = self._factorize(head)
                    x[head] = self._basic_values(factor, head, x)
            if theta <= 1e-12:
                stall += 1
                if stall >= STALL_LIMIT:
                    bland = True
            else:
                stall = 0
                bland = False

        self._factor, self._factor_head = factor, head.copy()
        xb = x[head]
        if np.any(xb < lo[head] - FEAS_TOL) or np.any(xb > hi[head] + FEAS_TOL):
            return LpResult("infeasible", x[:n].copy(), np.inf, iters, Basis(head.copy(), state.copy()))
        vals = np.clip(x[:n], lo[:n], hi[:n])
        obj = float(self.c_struct @ vals) + self.offset
        return LpResult("optimal", vals, obj, iters, Basis(head.copy(), state.copy()))

    @staticmethod
    def _ratio(xb, lb, ub, delta, bland, head) -> tuple[float, int, bool]:
        """Return (step, leaving position or -1, leaving goes to upper)."""
        nz = np.flatnonzero(np.abs(delta) > PIVOT_TOL)
        if len(nz) == 0:
            return np.inf, -1, False
        d, x, lo, hi = delta[nz], xb[nz], lb[nz], ub[nz]
        dec = d < 0
        # distance to the blocking bound along the move; basics already outside
        # their box block at the violated bound (they may travel back to it)
        target = np.where(dec, np.where(x > hi + FEAS_TOL, hi, lo),
                          np.where(x < lo - FEAS_TOL, lo, hi))
        to_up = np.where(dec, x > hi + FEAS_TOL, ~(x < lo - FEAS_TOL))
        outside = np.where(dec, x > hi + FEAS_TOL, x < lo - FEAS_TOL)
        # a decreasing basic below its lower bound (or increasing above upper) never blocks
        stray = np.where(dec, x < lo - FEAS_TOL, x > hi + FEAS_TOL)
        with np.errstate(invalid="ignore", divide="ignore"):
            t_exact = (target - x) / d
            t_relax = np.where(outside, t_exact, (target - x + np.where(dec, -FEAS_TOL, FEAS_TOL)) / d)
        blocked = np.isfinite(target) & ~stray
        t_exact = np.where(blocked, t_exact, np.inf)
        t_relax = np.where(blocked, t_relax, np.inf)
        if not np.isfinite(t_relax).any():
            return np.inf, -1, False
        if bland:
            tmin = max(float(t_exact.min()), 0.0)
            ties = np.flatnonzero(t_exact <= tmin + 1e-12)
            k = ties[np.argmin(head[nz[ties]])]
            return tmin, int(nz[k]), bool(to_up[k])
        tmax = float(t_relax.min())
        ties = np.flatnonzero(t_exact <= tmax)
        k = ties[np.argmax(np.abs(d[ties]))]
        return max(float(t_exact[k]), 0.0), int(nz[k]), bool(to_up[k])


def lp_solve(model: MilpModel, extra_bounds: dict[int, tuple[float, float]] | None = None
             ) -> LpResult:
    """Solve the continuous relaxation of ``model`` under optional extra bounds.

    Extra bounds are intersected with the declared bounds of each variable.
    """
    engine = LpEngine(model)
    lower = engine.var_lower.copy()
    upper = engine.var_upper.copy()
    for vid, (lo, hi) in (extra_bounds or {}).items():
        lower[vid] = max(lower[vid], lo)
        upper[vid] = min(upper[vid], hi)
    return engine.solve(lower, upper)
