"""End-to-end sizing checks against a plain enumeration that uses scipy for the inner LP."""

import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import linprog

from helios.oracle import validate
from helios.profile import SolarProfile
from helios.sizing import ProblemSpec, pad_units, solve, solve_two_phase
from helios.solver import SolverOptions


def _rows_ok(row, up, down):
    on = [u > 0 for u in row]
    changes = [t for t in range(1, len(on)) if on[t] != on[t - 1]]
    bounds = [0] + changes + [len(on)]
    for k in range(1, len(bounds) - 2):
        # interior runs only: the first began un-switched, the last is cut by the horizon
        length = bounds[k + 1] - bounds[k]
        if length < (up if on[bounds[k]] else down):
            return False
    return True


def _scipy_inner(U, S, dt, storage, c=1.0, xmax=1.0):
    """Max matched energy for fixed states; with storage also the battery it needs."""
    n, T = U.shape
    nv = n + (T + 1 if storage else 0)
    A, b = [], []
    for t in range(T):
        row = np.zeros(nv)
        row[:n] = U[:, t]
        if storage:
            row[n + t] = -1.0
        A.append(row)
        b.append(S[t])
    A_eq = b_eq = None
    bounds = [(0, xmax)] * n
    if storage:
        pb = n + T
        for t in range(T):
            for sign in (1, -1):
                row = np.zeros(nv)
                row[n + t], row[pb] = sign, -1.0
                A.append(row)
                b.append(0.0)
            for sign in (1, -1):
                # sign=+1: dt*cum - c*Pb/2 <= 0 ; sign=-1: -dt*cum - c*Pb/2 <= 0
                row = np.zeros(nv)
                row[n:n + t + 1] = sign * dt
                row[pb] = -c / 2
                A.append(row)
                b.append(0.0)
        A_eq = np.zeros((1, nv))
        A_eq[0, n:n + T] = 1.0
        b_eq = [0.0]
        bounds += [(None, None)] * T + [(0, None)]
    obj = np.zeros(nv)
    obj[:n] = -U.sum(axis=1)
    r = linprog(obj, A_ub=np.array(A), b_ub=b, A_eq=A_eq, b_eq=b_eq, bounds=bounds, method="highs")
    spill = float(S.sum() + r.fun)
    if not storage:
        return spill, 0.0
    # least rating that keeps this spill
    A2 = np.vstack([A, obj])
    b2 = b + [r.fun + 1e-9]
    rating = np.zeros(nv)
    rating[pb] = 1.0
    r2 = linprog(rating, A_ub=A2, b_ub=b2, A_eq=A_eq, b_eq=b_eq, bounds=bounds, method="highs")
    return spill, float(r2.fun)


def scipy_enumerate(S, n, up, down, storage=False, dt=1.0):
    T = len(S)
    rows = [r for r in itertools.product((0.0, 1.0), repeat=T) if _rows_ok(r, up, down)]
    results = [_scipy_inner(np.array(c), np.asarray(S, float), dt, storage)
               for c in itertools.product(rows, repeat=n)]
    spill = min(s for s, _ in results)
    battery = min(p for s, p in results if s <= spill + 1e-9)
    return spill, battery


def test_three_step_example():
    spec, prof = ProblemSpec(n_units=1), SolarProfile((0.5, 1.0, 0.5))
    assert scipy_enumerate(prof.values, 1, 1, 1)[0] == pytest.approx(0.5)
    sol = solve(spec, prof)
    assert sol.status == "optimal"
    assert sol.spill == pytest.approx(0.5, abs=1e-9)
    assert sol.X[0] == pytest.approx(0.5, abs=1e-9)
    assert list(sol.U[0]) == [1.0, 1.0, 1.0]
    assert sol.efficiency == pytest.approx(0.75, abs=1e-9)


def test_two_step_battery_example_exact():
    spec = ProblemSpec(n_units=1, storage="sized")
    prof = SolarProfile((1.0, 0.2), 60)
    spill, battery = scipy_enumerate(prof.values, 1, 1, 1, storage=True)
    assert spill == pytest.approx(0.0, abs=1e-9) and battery == pytest.approx(0.8, abs=1e-7)
    sol = solve_two_phase(spec, prof, epsilon=0.0)
    assert sol.battery_size == pytest.approx(0.8, abs=1e-9)
    assert sol.X[0] == pytest.approx(0.6, abs=1e-9)
    assert list(sol.U[0]) == [1.0, 1.0]
    assert sol.Ps == pytest.approx([-0.4, 0.4], abs=1e-9)
    assert sol.spill == pytest.approx(0.0, abs=1e-9)


def test_two_step_battery_default_epsilon_within_tolerance():
    sol = solve_two_phase(ProblemSpec(n_units=1, storage="sized"), SolarProfile((1.0, 0.2), 60))
    assert sol.battery_size == pytest.approx(0.8, abs=1e-5)
    assert sol.extra["spill_star"] == pytest.approx(0.0, abs=1e-9)
    assert sol.spill <= 1e-6 * 1.2 + 1e-12


def test_direct_consumption_needs_no_battery():
    sol = solve_two_phase(ProblemSpec(n_units=1, storage="sized"), SolarProfile((1.0, 0.0), 60),
                          epsilon=0.0)
    assert sol.battery_size == pytest.approx(0.0, abs=1e-9)
    assert sol.X[0] == pytest.approx(1.0, abs=1e-9)
    assert list(sol.U[0]) == [1.0, 0.0]


def test_dark_day():
    sol = solve_two_phase(ProblemSpec(n_units=1, storage="sized"), SolarProfile((0.0, 0.0), 60))
    assert sol.battery_size == pytest.approx(0.0, abs=1e-12) and sol.spill == pytest.approx(0.0)


def test_solve_dispatches_two_phase_for_storage():
    spec = ProblemSpec(n_units=1, storage="sized")
    prof = SolarProfile((1.0, 0.2), 60)
    assert solve(spec, prof, epsilon=0.0).battery_size == pytest.approx(0.8, abs=1e-9)


@settings(max_examples=25)
@given(st.lists(st.sampled_from([0.0, 0.25, 0.5, 0.75, 1.0]), min_size=2, max_size=4),
       st.integers(1, 2), st.integers(1, 2), st.booleans())
def test_agrees_with_scipy_enumeration(S, up, down, storage):
    up, down = min(up, len(S)), min(down, len(S))
    spec = ProblemSpec(n_units=1, min_up=up, min_down=down,
                       storage="sized" if storage else "none")
    prof = SolarProfile(tuple(S), 60)
    spill, battery = scipy_enumerate(S, 1, up, down, storage)
    sol = solve(spec, prof, epsilon=0.0)
    assert validate(sol, spec, prof).passed
    if storage:
        assert sol.extra["spill_star"] == pytest.approx(spill, abs=1e-6)
        assert sol.battery_size == pytest.approx(battery, abs=1e-6)
    else:
        assert sol.spill == pytest.approx(spill, abs=1e-6)


def test_two_units_agree_with_scipy_enumeration():
    S = (0.2, 0.9, 0.6, 0.1)
    spill, _ = scipy_enumerate(S, 2, 2, 1)
    sol = solve(ProblemSpec(n_units=2, min_up=2, min_down=1), SolarProfile(S))
    assert sol.spill == pytest.approx(spill, abs=1e-6)
    assert sol.X[0] >= sol.X[1] - 1e-9


def test_containment_more_units_never_worse():
    prof = SolarProfile((0.1, 0.4, 0.9, 1.0, 0.7, 0.2))
    prev = None
    for n in (1, 2, 3):
        spec = ProblemSpec(n_units=n, min_up=2, min_down=2)
        seeds = [pad_units(prev, n, prof)] if prev is not None else []
        sol = solve(spec, prof, seeds=seeds)
        if prev is not None:
            assert sol.efficiency >= prev.efficiency - 1e-9
        prev = sol


def test_node_limit_keeps_incumbent():
    prof = SolarProfile((0.1, 0.4, 0.9, 1.0, 0.7, 0.2, 0.1, 0.0))
    spec = ProblemSpec(n_units=2, min_up=3, min_down=3)
    sol = solve(spec, prof, SolverOptions(node_limit=2))
    assert sol.status in ("optimal", "feasible_gap")
    assert validate(sol, spec, prof).passed
