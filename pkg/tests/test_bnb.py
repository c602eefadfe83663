import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import linprog

from helios.errors import DomainError, SeedRejected
from helios.milp import MilpModel
from helios.profile import SolarProfile, synth_clear
from helios.sizing import ProblemSpec, encode
from helios.solver import SolverOptions, bb_solve, lp_solve, relative_gap, warm_start
from helios.solver.heuristic import greedy_heuristic


def _random_milp(seed):
    """Small mixed model plus dense arrays for an independent enumeration."""
    rng = np.random.default_rng(seed)
    nb, nc, k = int(rng.integers(1, 9)), int(rng.integers(0, 3)), int(rng.integers(1, 5))
    n = nb + nc
    A = np.round(rng.uniform(-3, 3, (k, n)), 1)
    b = np.round(rng.uniform(0, 4, k), 1)
    c = np.round(rng.uniform(-2, 2, n), 1)
    m = MilpModel()
    v = [m.add_variable("binary", 0, 1, f"b{j}") for j in range(nb)]
    v += [m.add_variable("continuous", 0, 2, f"c{j}") for j in range(nc)]
    for i in range(k):
        m.add_constraint([(v[j], float(A[i, j])) for j in range(n)], "<=", float(b[i]), f"r{i}")
    m.set_objective([(v[j], float(c[j])) for j in range(n)])
    return m.seal(), A, b, c, nb, nc


def _enumerate(A, b, c, nb, nc):
    best = np.inf
    for bits in itertools.product((0.0, 1.0), repeat=nb):
        z = np.array(bits)
        rest = b - A[:, :nb] @ z
        if nc == 0:
            if np.all(rest >= -1e-12):
                best = min(best, float(c[:nb] @ z))
            continue
        r = linprog(c[nb:], A_ub=A[:, nb:], b_ub=rest, bounds=[(0, 2)] * nc, method="highs")
        if r.status == 0:
            best = min(best, float(c[:nb] @ z + r.fun))
    return best


def test_pure_lp_is_one_node():
    m = MilpModel()
    x = m.add_variable("continuous", 0, 10, "x")
    m.add_constraint([(x, 1.0)], ">=", 1.0, "c")
    m.set_objective([(x, 1.0)])
    m.seal()
    res = bb_solve(m)
    assert res.node_count == 1 and res.status == "optimal"
    assert res.objective == pytest.approx(lp_solve(m).objective)


def test_binary_rounded_down():
    m = MilpModel()
    r = m.add_variable("binary", 0, 1, "r")
    m.add_constraint([(r, 1.0)], "<=", 0.5, "half")
    m.set_objective([(r, -1.0)])
    m.seal()
    res = bb_solve(m)
    assert res.status == "optimal" and res.values[r] == 0.0 and res.objective == 0.0


def test_infeasible_root():
    m = MilpModel()
    r = m.add_variable("binary", 0, 1, "r")
    m.add_constraint([(r, 1.0)], ">=", 0.3, "lo")
    m.add_constraint([(r, 1.0)], "<=", 0.7, "hi")
    m.seal()
    res = bb_solve(m)
    assert res.status == "infeasible" and res.values is None


@settings(max_examples=60)
@given(st.integers(0, 100_000), st.sampled_from(["most_fractional", "pseudo_cost"]))
def test_matches_enumeration(seed, rule):
    m, A, b, c, nb, nc = _random_milp(seed)
    ref = _enumerate(A, b, c, nb, nc)
    res = bb_solve(m, SolverOptions(branching=rule))
    if not np.isfinite(ref):
        assert res.status == "infeasible"
        return
    assert res.status == "optimal"
    assert res.objective == pytest.approx(ref, abs=1e-6)
    hist = np.array(res.bound_history)
    assert np.all(np.diff(hist) >= -1e-12)
    assert res.gap == pytest.approx(relative_gap(res.objective, res.bound))
    assert res.gap <= 1e-6


def test_gap_formula():
    assert relative_gap(2.0, 1.0) == 0.5
    assert relative_gap(0.5, 0.25) == 0.25  # denominator floors at 1
    assert relative_gap(np.inf, 0.0) == np.inf


def test_options_validation():
    with pytest.raises(DomainError):
        SolverOptions(rel_gap=-1)
    with pytest.raises(DomainError):
        SolverOptions(branching="random")


def _tiny_encoding():
    spec = ProblemSpec(n_units=1)
    profile = SolarProfile((0.5, 1.0, 0.5), 60)
    return spec, profile, encode(spec, profile)


def test_warm_start_rejects_with_row_names():
    _, _, enc = _tiny_encoding()
    bad = enc.assignment([0.5], [[1, 1, 1]])
    bad[enc.Y[0, 1]] = 0.9  # breaks the size link
    with pytest.raises(SeedRejected) as info:
        warm_start(enc.model, bad)
    assert info.value.violations
    names = {r.name for r in enc.model.constraints}
    assert all(v in names or ":" in v for v in info.value.violations)


def test_seeded_node_count_not_larger():
    spec, profile, enc = _tiny_encoding()
    greedy = greedy_heuristic(spec, profile)
    inc = warm_start(enc.model, enc.from_solution(greedy))
    opts = SolverOptions()
    plain = bb_solve(enc.model, opts)
    seeded = bb_solve(enc.model, opts, inc)
    assert seeded.node_count <= plain.node_count
    assert seeded.objective == pytest.approx(plain.objective, abs=1e-9)


def test_seed_at_optimum_closes_gap():
    _, _, enc = _tiny_encoding()
    inc = warm_start(enc.model, enc.assignment([0.5], [[1, 1, 1]]))
    res = bb_solve(enc.model, SolverOptions(), inc)
    assert res.status == "optimal" and res.gap == 0.0
    assert res.objective == pytest.approx(0.5, abs=1e-9)


@settings(max_examples=20)
@given(st.integers(0, 100_000))
def test_parallel_agrees(seed):
    m, *_ = _random_milp(seed)
    a = bb_solve(m, SolverOptions())
    b = bb_solve(m, SolverOptions(parallel_nodes=True, workers=3))
    assert a.status == b.status
    if a.status == "optimal":
        assert b.objective == pytest.approx(a.objective, abs=1e-6)


def test_node_limit_reports_status():
    spec = ProblemSpec(n_units=2, min_up=2, min_down=2)
    enc = encode(spec, synth_clear(8))
    res = bb_solve(enc.model, SolverOptions(node_limit=1))
    assert res.node_count == 1
    assert res.status in ("time_limit", "feasible_gap", "optimal")


def test_node_log_lines():
    import io
    _, _, enc = _tiny_encoding()
    buf = io.StringIO()
    res = bb_solve(enc.model, SolverOptions(node_log=buf))
    lines = buf.getvalue().splitlines()
    assert len(lines) == res.node_count
    assert all(len(line.split(",")) == 5 for line in lines)
