import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import linprog

from helios.milp import MilpModel, evaluate
from helios.solver import LpEngine, lp_solve


def _one(lo, hi, rows, obj):
    m = MilpModel()
    x = m.add_variable("continuous", lo, hi, "x")
    for sense, rhs in rows:
        m.add_constraint([(x, 1.0)], sense, rhs, f"r{rhs}")
    m.set_objective([(x, obj)])
    return m.seal()


def test_lp_examples():
    r = lp_solve(_one(0, 10, [(">=", 1.0)], 1.0))
    assert r.status == "optimal" and r.values[0] == pytest.approx(1) and r.objective == pytest.approx(1)
    r = lp_solve(_one(0, np.inf, [("<=", 3.0)], -1.0))
    assert r.status == "optimal" and r.values[0] == pytest.approx(3) and r.objective == pytest.approx(-3)
    assert lp_solve(_one(0, 10, [(">=", 2.0), ("<=", 1.0)], 1.0)).status == "infeasible"


def test_unbounded():
    assert lp_solve(_one(0, np.inf, [], -1.0)).status == "unbounded"


def test_extra_bounds_intersect():
    m = _one(0, 10, [(">=", 1.0)], 1.0)
    r = lp_solve(m, {0: (4.0, 20.0)})
    assert r.values[0] == pytest.approx(4.0)
    assert lp_solve(m, {0: (11.0, 12.0)}).status == "infeasible"


def _random_lp(seed):
    rng = np.random.default_rng(seed)
    n, k = int(rng.integers(2, 7)), int(rng.integers(1, 6))
    A = np.round(rng.uniform(-2, 2, (k, n)), 2) * (rng.uniform(size=(k, n)) < 0.7)
    x0 = rng.uniform(0, 1, n)
    senses = rng.choice(["<=", ">=", "="], size=k, p=[0.5, 0.3, 0.2])
    slack = rng.uniform(0, 1, k)
    b = A @ x0 + np.where(senses == "<=", slack, np.where(senses == ">=", -slack, 0.0))
    c = np.round(rng.uniform(-1, 1, n), 2)
    ub = np.round(rng.uniform(1, 3, n), 2)
    m = MilpModel()
    v = [m.add_variable("continuous", 0.0, float(ub[j]), f"x{j}") for j in range(n)]
    for i in range(k):
        m.add_constraint([(v[j], float(A[i, j])) for j in range(n)], str(senses[i]), float(b[i]),
                         f"r{i}")
    m.set_objective([(v[j], float(c[j])) for j in range(n)])
    return m.seal(), A, b, senses, c, ub


@settings(max_examples=80)
@given(st.integers(0, 10_000))
def test_matches_scipy_on_feasible_bounded_lps(seed):
    m, A, b, senses, c, ub = _random_lp(seed)
    le, ge, eq = senses == "<=", senses == ">=", senses == "="
    A_ub = np.vstack([A[le], -A[ge]])
    b_ub = np.concatenate([b[le], -b[ge]])
    ref = linprog(c, A_ub=A_ub if len(A_ub) else None, b_ub=b_ub if len(b_ub) else None,
                  A_eq=A[eq] if eq.any() else None, b_eq=b[eq] if eq.any() else None,
                  bounds=list(zip(np.zeros(len(c)), ub)), method="highs")
    assert ref.status == 0
    r = lp_solve(m)
    assert r.status == "optimal"
    assert r.objective == pytest.approx(ref.fun, abs=1e-7)
    assert np.all(r.values >= -1e-9) and np.all(r.values <= ub + 1e-9)
    assert evaluate(m, r.values).violations(m, 1e-7) == []


def test_deterministic():
    m, *_ = _random_lp(42)
    a, b = lp_solve(m), lp_solve(m)
    assert a.values.tobytes() == b.values.tobytes() and a.objective == b.objective


def test_engine_warm_start_agrees_with_cold():
    m, *_ = _random_lp(7)
    eng = LpEngine(m)
    cold = eng.solve()
    hi = eng.var_upper.copy()
    hi[0] = min(hi[0], 0.5)
    warm = eng.solve(None, hi, cold.basis)
    fresh = LpEngine(m).solve(None, hi)
    assert warm.status == fresh.status
    if warm.status == "optimal":
        assert warm.objective == pytest.approx(fresh.objective, abs=1e-9)
