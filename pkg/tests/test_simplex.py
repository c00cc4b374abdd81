import numpy as np
import pytest

from gridshock.simplex import LpProblem, dump_lp, solve_lp

INF = np.inf


def test_single_lower_bound_row():
    p = LpProblem("min", [1.0], [[1.0]], [3.0], [INF], [-INF], [INF])
    s = solve_lp(p)
    assert s.status == "optimal"
    assert s.x[0] == pytest.approx(3.0, abs=1e-9)
    assert s.duals[0] == pytest.approx(1.0, abs=1e-9)
    assert s.duality_gap <= 1e-6


def test_degenerate_face():
    p = LpProblem("min", [-1.0, -1.0], [[1.0, 1.0]], [-INF], [1.0],
                  [0.0, 0.0], [INF, INF])
    s = solve_lp(p)
    assert s.status == "optimal"
    assert s.objective == pytest.approx(-1.0, abs=1e-9)
    assert s.duals[0] == pytest.approx(-1.0, abs=1e-9)  # upper bound active


@pytest.mark.parametrize("d,expect_g,expect_price", [
    (30.0, [30.0, 0.0, 0.0], 10.0),
    (70.0, [40.0, 30.0, 0.0], 30.0),
    (110.0, [40.0, 40.0, 30.0], 50.0),
])
def test_merit_order_dispatch(d, expect_g, expect_price):
    # hand-enumerated three-unit stack: cheapest units fill first, the
    # marginal unit sets the clearing price (the balance-row dual)
    c = [10.0, 30.0, 50.0]
    p = LpProblem("min", c, [[1.0, 1.0, 1.0]], [d], [d],
                  [0.0, 0.0, 0.0], [40.0, 40.0, 40.0])
    s = solve_lp(p)
    assert s.status == "optimal"
    np.testing.assert_allclose(s.x, expect_g, atol=1e-9)
    assert s.duals[0] == pytest.approx(expect_price, abs=1e-9)


def test_infeasible_certified():
    p = LpProblem("min", [1.0], [[1.0]], [-INF], [-1.0], [0.0], [INF])
    assert solve_lp(p).status == "infeasible"


def test_unbounded_certified():
    p = LpProblem("min", [-1.0], [[1.0]], [0.0], [INF], [-INF], [INF])
    assert solve_lp(p).status == "unbounded"


def test_max_sense_duals_mirror():
    p = LpProblem("max", [3.0, 2.0], [[2.0, 2.0]], [-INF], [3.0],
                  [0.0, 0.0], [1.0, 1.0])
    s = solve_lp(p)
    assert s.objective == pytest.approx(4.0, abs=1e-9)
    assert s.duals[0] == pytest.approx(1.0, abs=1e-9)  # active upper bound, max sense
    # reduced cost identity rc = c - A^T y holds in the caller's objective
    np.testing.assert_allclose(s.reduced_costs, p.c - p.A.T @ s.duals, atol=1e-9)


def test_ranged_rows_and_free_vars():
    p = LpProblem("min", [1.0, 0.0], [[1.0, 1.0], [1.0, -1.0]],
                  [2.0, 0.5], [2.0, 1.5], [-INF, -INF], [INF, INF])
    s = solve_lp(p)
    assert s.status == "optimal"
    assert s.objective == pytest.approx(1.25, abs=1e-9)
    assert s.max_primal_residual <= 1e-7


def test_no_rows_pure_bounds():
    p = LpProblem("min", np.array([1.0, -2.0]), np.zeros((0, 2)),
                  np.zeros(0), np.zeros(0), [0.0, 0.0], [4.0, 4.0])
    s = solve_lp(p)
    assert s.objective == pytest.approx(-8.0)


def test_validation_rejects_nan():
    with pytest.raises(ValueError):
        LpProblem("min", [np.nan], [[1.0]], [0.0], [1.0], [0.0], [1.0])


def test_validation_rejects_crossed_bounds():
    with pytest.raises(ValueError):
        LpProblem("min", [1.0], [[1.0]], [2.0], [1.0], [0.0], [1.0])


def test_determinism_bit_identical():
    rng = np.random.default_rng(11)
    A = rng.normal(size=(6, 9)).round(3)
    c = rng.normal(size=9).round(3)
    p = LpProblem("min", c, A, np.full(6, -1.0), np.full(6, 2.0),
                  np.full(9, -3.0), np.full(9, 3.0))
    s1 = solve_lp(p)
    s2 = solve_lp(p)
    assert s1.status == s2.status == "optimal"
    assert np.array_equal(s1.x, s2.x)
    assert np.array_equal(s1.duals, s2.duals)
    assert s1.objective == s2.objective


def test_random_battery_duality_and_feasibility():
    rng = np.random.default_rng(42)
    optimal = 0
    for _ in range(120):
        n = int(rng.integers(2, 14))
        m = int(rng.integers(1, 10))
        A = rng.normal(size=(m, n)).round(3)
        c = rng.normal(size=n).round(3)
        lb = np.where(rng.random(n) < 0.8, rng.uniform(-5, 0, n), -INF)
        ub = np.where(rng.random(n) < 0.8, rng.uniform(0.1, 5, n), INF)
        rl = np.where(rng.random(m) < 0.5, rng.uniform(-8, 0, m), -INF)
        ru = np.where(rng.random(m) < 0.7, rng.uniform(0.2, 8, m), INF)
        eq = rng.random(m) < 0.25
        rl = np.where(eq & np.isfinite(ru), ru, rl)
        rl = np.minimum(rl, ru)
        s = solve_lp(LpProblem("min", c, A, rl, ru, lb, ub))
        if s.status == "optimal":
            optimal += 1
            assert s.duality_gap <= 1e-6
            assert s.max_primal_residual <= 1e-6
            assert s.cs_residual <= 1e-5
    assert optimal > 40  # the battery actually exercises the optimal path


def test_dump_lp_mentions_all_labels():
    p = LpProblem("min", [1.0, 2.0], [[1.0, 1.0]], [1.0], [1.0],
                  [0.0, 0.0], [1.0, 1.0], row_labels=["bal"], col_labels=["a", "b"])
    text = dump_lp(p)
    assert "Minimize" in text and "bal" in text and " a " in text
    assert text.endswith("End\n")
