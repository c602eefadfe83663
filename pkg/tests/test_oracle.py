import itertools
import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helios.errors import DegenerateError, DomainError
from helios.oracle import (FAMILIES, VALIDATION_SCHEMA, Automaton, admissible_rows, brute_force,
                           compare, compute_efficiency, rule_ok, short_runs, validate)
from helios.profile import SolarProfile
from helios.sizing import ProblemSpec
from helios.sizing.types import build_solution

QUASI = ProblemSpec(n_units=1, strategy="quasi_dynamic")


def _sol(X, U, prof, Ps=None, Pb=0.0, Y=None):
    X, U = np.asarray(X, float), np.asarray(U, float)
    Y = X[:, None] * U if Y is None else np.asarray(Y, float)
    return build_solution(X, U, Y, Ps, Pb, prof)


def test_all_off_passes():
    prof = SolarProfile((0.3, 0.8, 0.1))
    sol = _sol([0.5], [[0, 0, 0]], prof)
    rep = validate(sol, ProblemSpec(n_units=1), prof)
    assert rep.passed and [f.name for f in rep.families] == list(FAMILIES)
    assert compute_efficiency(sol, prof) == 0.0


def test_adequacy_excess_is_reported():
    prof = SolarProfile((0.3, 0.8, 0.1))
    sol = _sol([0.81], [[0, 1, 0]], prof)
    rep = validate(sol, ProblemSpec(n_units=1), prof)
    assert rep.failures() == ["adequacy"]
    assert rep["adequacy"].worst_violation == pytest.approx(0.01, abs=1e-12)
    assert rep["adequacy"].witness == (2,)


def test_repeated_half_fails_dynamics():
    prof = SolarProfile((1.0,) * 4)
    sol = _sol([0.5], [[0, 0.5, 0.5, 1]], prof)
    rep = validate(sol, QUASI, prof)
    assert not rep["dynamics"].passed
    assert rep["dynamics"].witness == (1, 3)


def test_half_state_under_static_fails():
    prof = SolarProfile((1.0,) * 3)
    rep = validate(_sol([0.5], [[0, 0.5, 1]], prof), ProblemSpec(n_units=1), prof)
    assert not rep["dynamics"].passed and not rep["linking"].passed


def test_min_up_violation_reported():
    prof = SolarProfile((1.0,) * 5)
    rep = validate(_sol([0.5], [[0, 1, 0, 0, 0]], prof), ProblemSpec(n_units=1, min_up=2), prof)
    assert rep.failures() == ["min_up_down"]
    assert rep["min_up_down"].witness == (1, 2)


def test_battery_rules():
    prof = SolarProfile((1.0, 0.2), 60)
    spec = ProblemSpec(n_units=1, storage="sized")
    good = _sol([0.6], [[1, 1]], prof, Ps=[-0.4, 0.4], Pb=0.8)
    assert validate(good, spec, prof).passed
    small = _sol([0.6], [[1, 1]], prof, Ps=[-0.4, 0.4], Pb=0.7)
    assert validate(small, spec, prof).failures() == ["battery"]
    loose = _sol([0.6], [[1, 1]], prof, Ps=[-0.4, 0.4], Pb=0.8)
    assert not validate(loose, ProblemSpec(n_units=1), prof).passed


def test_shape_mismatch():
    prof = SolarProfile((1.0, 1.0))
    with pytest.raises(DomainError):
        validate(_sol([0.5, 0.5], [[0, 0], [0, 0]], prof), ProblemSpec(n_units=1), prof)


def test_report_json():
    prof = SolarProfile((1.0, 1.0))
    rep = validate(_sol([0.5], [[1, 1]], prof), ProblemSpec(n_units=1), prof)
    d = json.loads(rep.to_json())
    assert d["schema"] == VALIDATION_SCHEMA and d["pass"] is True
    assert [f["name"] for f in d["families"]] == list(FAMILIES)
    assert all(f["pass"] == (f["worst_violation"] <= 1e-6) for f in d["families"])
    assert rep.to_json() == rep.to_json()


@pytest.mark.parametrize("T", range(1, 8))
def test_automaton_matches_rules(T):
    auto = Automaton()
    for row in itertools.product((0.0, 0.5, 1.0), repeat=T):
        assert auto.accepts(row) == rule_ok(row), row


def test_automaton_examples():
    auto = Automaton()
    assert auto.accepts([0, 0.5, 1, 1, 0.5, 0])
    assert not auto.accepts([0, 1])
    assert not auto.accepts([0.5, 0.5])
    assert not auto.accepts([0, 0.5, 0])
    assert auto.states([0.5, 1]) == ["half-up", "on"]


def _independent_static_rows(T, up, down):
    out = []
    for row in itertools.product((0.0, 1.0), repeat=T):
        ok = True
        t = 1
        while t < T:
            if row[t] != row[t - 1]:
                need = up if row[t] else down
                end = t
                while end < T and row[end] == row[t]:
                    end += 1
                if end < T and end - t < need:
                    ok = False
                t = end
            else:
                t += 1
        if ok:
            out.append(row)
    return out


@pytest.mark.parametrize("T,up,down", [(4, 1, 1), (5, 2, 1), (6, 2, 3), (6, 3, 3), (2, 2, 2)])
def test_static_rows_match_independent_runs(T, up, down):
    assert list(admissible_rows(T, up, down, False)) == _independent_static_rows(T, up, down)


def test_short_runs_exempts_edges():
    assert short_runs([1, 0, 0, 1], 3, 3) == [(1, 1)]
    assert short_runs([0, 1, 0], 2, 2) == [(1, 1)]
    assert short_runs([1, 1, 0], 5, 5) == []


def test_brute_examples():
    spec, prof = ProblemSpec(n_units=1), SolarProfile((0.5, 1.0, 0.5))
    sol = brute_force(spec, prof)
    assert sol.spill == pytest.approx(0.5, abs=1e-9) and sol.X[0] == pytest.approx(0.5)
    assert list(sol.U[0]) == [1.0, 1.0, 1.0]
    bat = brute_force(ProblemSpec(n_units=1, storage="sized"), SolarProfile((1.0, 0.2), 60),
                      epsilon=0.0)
    assert bat.spill == pytest.approx(0.0, abs=1e-9)
    assert bat.battery_size == pytest.approx(0.8, abs=1e-9)
    dark = brute_force(ProblemSpec(n_units=1), SolarProfile((0.0, 0.0)))
    assert dark.spill == 0.0 and dark.X[0] == 0.0


def test_brute_guards():
    with pytest.raises(DomainError):
        brute_force(ProblemSpec(n_units=2), SolarProfile((1.0,) * 7))
    with pytest.raises(DomainError):
        brute_force(ProblemSpec(n_units=1, strategy="quasi_dynamic"), SolarProfile((1.0,) * 9))
    with pytest.raises(DomainError):
        brute_force(ProblemSpec(n_units=1, min_up=3), SolarProfile((1.0, 1.0)))


@settings(max_examples=25)
@given(st.lists(st.sampled_from([0.0, 0.3, 0.6, 1.0]), min_size=2, max_size=5),
       st.booleans(), st.booleans())
def test_brute_solutions_validate(S, quasi, storage):
    spec = ProblemSpec(n_units=1, strategy="quasi_dynamic" if quasi else "static",
                       storage="sized" if storage else "none")
    prof = SolarProfile(tuple(S))
    sol = brute_force(spec, prof)
    assert validate(sol, spec, prof).passed
    if prof.total > 0 and storage is False:
        assert compute_efficiency(sol, prof) == pytest.approx(1 - sol.spill / prof.total)


def test_compute_efficiency_examples():
    prof = SolarProfile((1.0, 1.0))
    assert compute_efficiency(_sol([1.0], [[1, 1]], prof), prof) == 1.0
    assert compute_efficiency(_sol([1.0], [[0, 0]], prof), prof) == 0.0
    assert compute_efficiency(_sol([0.5], [[1, 1]], prof), prof) == 0.5
    dark = SolarProfile((0.0, 0.0))
    with pytest.raises(DegenerateError):
        compute_efficiency(_sol([0.0], [[0, 0]], dark), dark)


def test_compare_examples():
    prof = SolarProfile((1.0, 1.0))
    a = _sol([0.75], [[1, 1]], prof)  # spill 0.5
    assert compare(a, a).objective_delta == 0.0 and compare(a, a).same_within()
    b = _sol([0.75 - 5e-10], [[1, 1]], prof)
    assert compare(a, b).same_within(1e-6)
    c = _sol([0.7], [[1, 1]], prof)  # spill 0.6
    assert compare(a, c).objective_delta == pytest.approx(0.1)
    with pytest.raises(DomainError):
        compare(a, _sol([0.7, 0.0], [[1, 1], [0, 0]], prof))
