import itertools

import numpy as np
import pytest

from gridshock.milp import MilpNodeLimitError, MilpProblem, solve_milp
from gridshock.simplex import LpProblem, solve_lp

INF = np.inf


def knapsack(c, w, cap):
    n = len(c)
    lp = LpProblem("max", c, [w], [-INF], [cap], np.zeros(n), np.ones(n))
    return MilpProblem(lp, list(range(n)))


def test_single_binary_rounds_down():
    p = MilpProblem(LpProblem("max", [1.0], [[1.0]], [-INF], [1.5], [0.0], [1.0]), [0])
    s = solve_milp(p)
    assert s.status == "optimal"
    assert s.x[0] == 1.0
    assert s.objective == 1.0


def test_small_knapsack():
    s = solve_milp(knapsack([3.0, 2.0], [2.0, 2.0], 3.0))
    assert s.objective == 3.0
    np.testing.assert_array_equal(s.x, [1.0, 0.0])


def test_infeasible_milp():
    lp = LpProblem("max", [1.0], [[1.0]], [2.0], [INF], [0.0], [1.0])
    s = solve_milp(MilpProblem(lp, [0]))
    assert s.status == "infeasible"


def test_node_limit_returns_incumbent():
    rng = np.random.default_rng(5)
    c = rng.uniform(1, 5, 10)
    w = rng.uniform(1, 4, 10)
    prob = knapsack(c, w, w.sum() / 2)
    warm = np.zeros(10)
    s = solve_milp(prob, node_limit=2, warm_start=warm)
    assert s.status == "feasible-limit"
    assert s.objective >= 0.0
    assert s.bound_gap >= 0.0


def test_node_limit_without_incumbent_raises():
    rng = np.random.default_rng(5)
    c = rng.uniform(1, 5, 10)
    w = rng.uniform(1, 4, 10)
    with pytest.raises(MilpNodeLimitError):
        solve_milp(knapsack(c, w, w.sum() / 2), node_limit=1)


def test_warm_start_prunes():
    c = [5.0, 4.0, 3.0]
    w = [4.0, 3.0, 2.0]
    prob = knapsack(c, w, 6.0)
    opt = solve_milp(prob)
    warm = solve_milp(prob, warm_start=opt.x)
    assert warm.objective == opt.objective
    assert warm.node_count <= opt.node_count


def test_incumbent_within_relaxation_bound():
    prob = knapsack([3.0, 2.0, 4.0], [2.0, 2.0, 3.0], 4.0)
    root = solve_lp(prob.lp)
    s = solve_milp(prob)
    assert s.objective <= root.objective + 1e-9


def test_pure_binary_exact_vs_enumeration():
    rng = np.random.default_rng(17)
    for _ in range(25):
        nb = int(rng.integers(3, 9))
        m = int(rng.integers(1, 6))
        A = rng.normal(size=(m, nb)).round(2)
        c = rng.normal(size=nb).round(2)
        ru = rng.uniform(-1.0, 3.0, m).round(2)
        lp = LpProblem("max", c, A, np.full(m, -INF), ru, np.zeros(nb), np.ones(nb))
        s = solve_milp(MilpProblem(lp, list(range(nb))))
        best = None
        for bits in itertools.product([0.0, 1.0], repeat=nb):
            x = np.array(bits)
            if np.all(A @ x <= ru + 1e-9):
                v = float(c @ x)
                best = v if best is None else max(best, v)
        if best is None:
            assert s.status == "infeasible"
        else:
            assert s.status == "optimal"
            assert s.objective == best  # binaries polished to exact 0/1


def test_mixed_integer_matches_fixing_enumeration():
    rng = np.random.default_rng(23)
    for _ in range(12):
        nb, nc = int(rng.integers(2, 5)), int(rng.integers(1, 4))
        n = nb + nc
        m = int(rng.integers(1, 5))
        A = rng.normal(size=(m, n)).round(2)
        c = rng.normal(size=n).round(2)
        ru = rng.uniform(0.0, 4.0, m).round(2)
        lb = np.concatenate([np.zeros(nb), np.full(nc, -2.0)])
        ub = np.concatenate([np.ones(nb), np.full(nc, 2.0)])
        lp = LpProblem("max", c, A, np.full(m, -INF), ru, lb, ub)
        s = solve_milp(MilpProblem(lp, list(range(nb))))
        best = None
        for bits in itertools.product([0.0, 1.0], repeat=nb):
            l2, u2 = lb.copy(), ub.copy()
            l2[:nb] = bits
            u2[:nb] = bits
            r = solve_lp(LpProblem("max", c, A, np.full(m, -INF), ru, l2, u2))
            if r.status == "optimal":
                best = r.objective if best is None else max(best, r.objective)
        if best is None:
            assert s.status == "infeasible"
        else:
            assert s.objective == pytest.approx(best, rel=1e-9, abs=1e-9)


def test_determinism():
    prob = knapsack([3.0, 2.0, 4.0, 1.5], [2.0, 2.0, 3.0, 1.0], 5.0)
    s1 = solve_milp(prob)
    s2 = solve_milp(prob)
    assert np.array_equal(s1.x, s2.x)
    assert s1.objective == s2.objective
    assert s1.node_count == s2.node_count


def test_binary_bounds_validated():
    lp = LpProblem("max", [1.0], [[1.0]], [-INF], [5.0], [0.0], [2.0])
    with pytest.raises(ValueError):
        MilpProblem(lp, [0])
