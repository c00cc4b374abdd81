import numpy as np
import pytest

from gridshock.dcopf import build_dcopf, solve_day, solve_dcopf, solution_rows
from support import one_bus, profile_for, tight_two_bus, two_bus

VOLL = 1000.0


def test_lp_structure_two_bus():
    net = two_bus()
    prof = profile_for(net, [[0.0, 80.0]])
    lp = build_dcopf(net, prof, "summer", 0)
    G, E, N = net.num_generators, net.num_edges, net.num_nodes
    assert lp.num_cols == G + E + 2 * N
    assert sum(1 for lab in lp.row_labels if lab.startswith("bal")) == N
    assert sum(1 for lab in lp.row_labels if lab.startswith("flow")) == E
    assert "ref" in lp.row_labels


def test_lp_structure_bundled(bundled_net, bundled_demand):
    lp = build_dcopf(bundled_net, bundled_demand, "summer", 0)
    assert sum(1 for lab in lp.row_labels if lab.startswith("bal")) == 16
    assert sum(1 for lab in lp.row_labels if lab.startswith("flow")) == 17


def test_lp_structure_single_node():
    net = one_bus()
    lp = build_dcopf(net, profile_for(net, [[100.0]]), "summer", 0)
    assert sum(1 for lab in lp.row_labels if lab.startswith("bal")) == 1
    assert not any(lab.startswith("flow") for lab in lp.row_labels)


def test_single_bus_dispatch():
    net = one_bus(g_max=150.0, cost=20.0)
    sol = solve_dcopf(net, profile_for(net, [[100.0]]), "summer", 0)
    assert sol.g[0] == pytest.approx(100.0, abs=1e-9)
    assert sol.u[0] == pytest.approx(0.0, abs=1e-9)
    assert sol.pi_d[0] == pytest.approx(20.0, abs=1e-9)
    assert sol.objective == pytest.approx(2000.0, rel=1e-9)


def test_two_bus_congestion_splits_prices():
    # hand solution: 50 MW import fills the line, local unit serves the rest
    net = two_bus()
    sol = solve_dcopf(net, profile_for(net, [[0.0, 80.0]]), "summer", 0)
    np.testing.assert_allclose(sol.g, [50.0, 30.0], atol=1e-6)
    np.testing.assert_allclose(sol.f, [50.0], atol=1e-6)
    np.testing.assert_allclose(sol.u, [0.0, 0.0], atol=1e-6)
    np.testing.assert_allclose(sol.pi_d, [20.0, 90.0], atol=1e-6)
    assert sol.objective == pytest.approx(50 * 20 + 30 * 90, rel=1e-9)


def test_two_bus_shedding_priced_at_voll():
    net = two_bus(with_g2=False)
    sol = solve_dcopf(net, profile_for(net, [[0.0, 80.0]]), "summer", 0)
    assert sol.u[1] == pytest.approx(30.0, abs=1e-6)
    assert sol.pi_d[1] == pytest.approx(VOLL, abs=1e-6)
    assert sol.shed_cost == pytest.approx(30.0 * VOLL, rel=1e-9)


def test_objective_identity():
    net = tight_two_bus()
    sol = solve_dcopf(net, profile_for(net, [[10.0, 80.0]]), "summer", 0)
    explicit = float(net.gen_costs() @ sol.g + sol.voll @ sol.u)
    assert sol.objective == pytest.approx(explicit, rel=1e-9)


def test_capacity_relaxation_never_costs_more(bundled_net, bundled_demand):
    # randomized capacity perturbations: more room never raises cost
    rng = np.random.default_rng(2)
    base = solve_dcopf(bundled_net, bundled_demand, "summer", 17)
    for _ in range(4):
        zg = -rng.uniform(0, 50, bundled_net.num_generators)  # negative z = extra room
        zf = -rng.uniform(0, 50, bundled_net.num_edges)
        relaxed = solve_dcopf(bundled_net, bundled_demand, "summer", 17, zg, zf)
        assert relaxed.objective <= base.objective + 1e-6


def test_unlimited_grid_serves_everything(bundled_net, bundled_demand):
    zf = -np.full(bundled_net.num_edges, 1e5)  # effectively infinite lines
    sol = solve_dcopf(bundled_net, bundled_demand, "summer", 17, None, zf)
    assert sol.u.sum() == pytest.approx(0.0, abs=1e-7)


def test_nodal_price_bounds(bundled_net, bundled_demand):
    sol = solve_dcopf(bundled_net, bundled_demand, "summer", 17)
    cmin = min(g.cost for g in bundled_net.generators)
    vmax = float(sol.voll.max())
    served = sol.demand > 0
    assert np.all(sol.pi_d[served] >= cmin - 1e-6)
    assert np.all(sol.pi_d[served] <= vmax + 1e-6)


def test_solve_day_runs_all_hours(bundled_net, bundled_demand):
    sols = solve_day(bundled_net, bundled_demand, "summer")
    assert len(sols) == 24
    assert all(s.u.sum() <= 1e-7 for s in sols)


def test_solution_rows_cover_entities(bundled_net, bundled_demand):
    sol = solve_dcopf(bundled_net, bundled_demand, "summer", 0)
    rows = solution_rows(sol, bundled_net)
    quantities = {r[3] for r in rows}
    assert {"g", "f", "u", "theta", "pi_d", "pi_f", "delta", "objective"} <= quantities
