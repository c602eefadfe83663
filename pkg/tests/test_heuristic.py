import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from helios.errors import DomainError
from helios.oracle import brute_force, validate
from helios.profile import SolarProfile
from helios.sizing import ProblemSpec
from helios.solver.heuristic import best_unit_row, greedy_heuristic, quantile_sizes


def _runs_ok(row, up, down):
    on = [u > 0 for u in row]
    runs, start = [], 0
    for t in range(1, len(on) + 1):
        if t == len(on) or on[t] != on[start]:
            runs.append((on[start], start, t - start))
            start = t
    for k, (val, s, length) in enumerate(runs):
        if s == 0 or k == len(runs) - 1:
            continue
        if length < (up if val else down):
            return False
    return True


def _quasi_ok(row):
    prev = 0.0
    for t, u in enumerate(row):
        if abs(u - prev) > 0.5:
            return False
        if u == 0.5 and t + 1 < len(row) and row[t + 1] != 1 - prev:
            return False
        prev = u
    return True


def test_greedy_examples():
    zero = greedy_heuristic(ProblemSpec(n_units=1), SolarProfile((0.0, 0.0)))
    assert zero.spill == 0 and np.all(zero.U == 0) and np.all(zero.X == 0)
    const = greedy_heuristic(ProblemSpec(n_units=1), SolarProfile((1.0,) * 4))
    assert const.X[0] == 1.0 and np.all(const.U == 1) and const.spill == 0
    spec, prof = ProblemSpec(n_units=1), SolarProfile((0.5, 1.0, 0.5))
    g = greedy_heuristic(spec, prof)
    assert g.spill <= 1.0 + 1e-12
    assert g.spill >= brute_force(spec, prof).spill - 1e-12
    assert validate(g, spec, prof).passed


def test_greedy_rejects_quasi():
    with pytest.raises(DomainError):
        greedy_heuristic(ProblemSpec(n_units=1, strategy="quasi_dynamic"), SolarProfile((1, 1)))


@given(st.lists(st.floats(0, 1), min_size=2, max_size=10), st.integers(1, 4), st.integers(1, 3),
       st.integers(1, 3))
def test_greedy_always_feasible_and_descending(vals, n, up, down):
    prof = SolarProfile(tuple(vals))
    up, down = min(up, len(vals)), min(down, len(vals))
    spec = ProblemSpec(n_units=n, min_up=up, min_down=down)
    g = greedy_heuristic(spec, prof)
    assert validate(g, spec, prof).passed
    assert np.all(np.diff(g.X) <= 0)


def test_quantile_sizes_capped():
    X = quantile_sizes(np.array([0.0, 3.0, 3.0]), 2, 1.0)
    assert np.all(X <= 1.0) and np.all(np.diff(X) <= 0)


@given(st.lists(st.sampled_from([0.0, 0.2, 0.5, 0.7, 1.0]), min_size=1, max_size=7),
       st.sampled_from([0.3, 0.5, 1.0]), st.integers(1, 3), st.integers(1, 3), st.booleans())
def test_best_unit_row_matches_enumeration(resid, size, up, down, quasi):
    resid = np.array(resid)
    levels = (0.0, 0.5, 1.0) if quasi else (0.0, 1.0)
    best = 0.0
    for row in itertools.product(levels, repeat=len(resid)):
        if quasi and not _quasi_ok(row):
            continue
        if not _runs_ok(row, up, down):
            continue
        if np.all(size * np.array(row) <= resid + 1e-12):
            best = max(best, sum(row))
    got = best_unit_row(resid, size, up, down, quasi)
    assert got.sum() == pytest.approx(best)
    assert np.all(size * got <= resid + 1e-12)
    assert _runs_ok(got, up, down) and (not quasi or _quasi_ok(got))
