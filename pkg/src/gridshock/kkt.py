"""Equilibrium certificate: residuals of the dispatch KKT system.

The optimality conditions of the hourly dispatch LP form a mixed
complementarity system: stationarity equalities for (g, f, theta, u), the
primal balance / flow-law / reference equalities, and eight complementarity
pairs matching each bound family with its nonnegative multiplier.  This
module evaluates all residuals exactly (no tolerance applied) so callers
can certify solutions from the LP path or from the attacker MILP under the
attack-shifted bounds.

Complementarity is measured as the elementwise product |y2_i * F2_i|,
mirroring the bilinear form of the equivalent NLP restatement; negative
parts of F2 or y2 are reported as feasibility violations.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dcopf import OpfSolution, attack_bounds
from .network import PowerNetwork, incidence_matrix

STATIONARITY_BLOCKS = ("stat_g", "stat_f", "stat_theta", "stat_u")
EQUALITY_BLOCKS = ("balance", "flow_law", "reference")
PAIR_BLOCKS = (
    "gen_lo", "gen_up", "flow_lo", "flow_up",
    "angle_lo", "angle_up", "unserved_lo", "unserved_up",
)


@dataclass
class KktResiduals:
    stationarity: dict[str, np.ndarray]
    primal: dict[str, np.ndarray]          # violation magnitudes (>= 0)
    complementarity: dict[str, np.ndarray]  # |y2 * F2| per pair
    dual_sign: dict[str, np.ndarray]        # negative parts of y2

    def block_max(self) -> dict[str, float]:
        out = {}
        for prefix, group in (("stat", self.stationarity), ("primal", self.primal),
                              ("comp", self.complementarity),
                              ("dual", self.dual_sign)):
            for k, v in group.items():
                key = k if k.startswith("stat") else f"{prefix}:{k}"
                out[key] = float(np.max(np.abs(v), initial=0.0))
        return out

    def overall_max(self) -> float:
        return max(self.block_max().values(), default=0.0)


def kkt_residuals(
    net: PowerNetwork,
    sol: OpfSolution,
    zg: np.ndarray | None = None,
    zf: np.ndarray | None = None,
    zt: np.ndarray | None = None,
) -> KktResiduals:
    """Evaluate every KKT residual of ``sol`` against (possibly attacked) bounds.

    Demand and VOLL are taken from the solution itself; ``zg, zf, zt``
    shift the generation / flow / angle limits the same way the attacker
    MILP does.  Raises ValueError on dimension mismatch.
    """
    N, E, G = net.num_nodes, net.num_edges, net.num_generators
    for name, arr, size in (
        ("g", sol.g, G), ("f", sol.f, E), ("u", sol.u, N), ("theta", sol.theta, N),
        ("pi_d", sol.pi_d, N), ("pi_f", sol.pi_f, E),
    ):
        if arr.shape != (size,):
            raise ValueError(f"{name} has shape {arr.shape}, expected ({size},)")

    A = incidence_matrix(net)
    Bmw = net.susceptance_mw_per_rad()
    M = net.gen_node_map()
    g_lo, _ = net.gen_limits()
    g_up, f_cap, t_cap = attack_bounds(net, zg, zf, zt)
    cg = net.gen_costs()
    ref = net.node_index()[net.reference_node]
    e_ref = np.zeros(N)
    e_ref[ref] = 1.0
    d = sol.demand
    voll = sol.voll

    pi_at_gen = M.T @ sol.pi_d

    stationarity = {
        "stat_g": cg - sol.rho_g_lo + sol.rho_g_up - pi_at_gen,
        "stat_f": A @ sol.pi_d + sol.pi_f - sol.rho_f_lo + sol.rho_f_up,
        "stat_theta": A.T @ (-Bmw * sol.pi_f - sol.rho_th_lo + sol.rho_th_up)
        + e_ref * sol.delta,
        "stat_u": voll - sol.rho_u_lo + sol.rho_u_up - sol.pi_d,
    }

    angle_diff = A @ sol.theta
    slacks = {
        "gen_lo": sol.g - g_lo,
        "gen_up": g_up - sol.g,
        "flow_lo": sol.f + f_cap,
        "flow_up": f_cap - sol.f,
        "angle_lo": angle_diff + t_cap,
        "angle_up": t_cap - angle_diff,
        "unserved_lo": sol.u,
        "unserved_up": d - sol.u,
    }
    duals = {
        "gen_lo": sol.rho_g_lo, "gen_up": sol.rho_g_up,
        "flow_lo": sol.rho_f_lo, "flow_up": sol.rho_f_up,
        "angle_lo": sol.rho_th_lo, "angle_up": sol.rho_th_up,
        "unserved_lo": sol.rho_u_lo, "unserved_up": sol.rho_u_up,
    }

    primal = {
        "balance": np.abs(M @ sol.g + sol.u - d - A.T @ sol.f),
        "flow_law": np.abs(sol.f - Bmw * angle_diff),
        "reference": np.array([abs(sol.theta[ref])]),
    }
    for k, s in slacks.items():
        primal[k] = np.maximum(-s, 0.0)

    complementarity = {k: np.abs(duals[k] * slacks[k]) for k in PAIR_BLOCKS}
    dual_sign = {k: np.maximum(-duals[k], 0.0) for k in PAIR_BLOCKS}

    return KktResiduals(stationarity, primal, complementarity, dual_sign)


def verify_equilibrium(res: KktResiduals, tol: float) -> bool:
    """True iff every residual block max-norm is within ``tol``; tol > 0."""
    if not tol > 0:
        raise ValueError("tolerance must be positive")
    return res.overall_max() <= tol


def residual_rows(res: KktResiduals) -> list[tuple[str, int, float]]:
    """Flatten residuals to (block, index, value) rows for diagnostics."""
    rows: list[tuple[str, int, float]] = []
    for prefix, group in (("stat", res.stationarity), ("primal", res.primal),
                          ("comp", res.complementarity), ("dual", res.dual_sign)):
        for block, vec in group.items():
            key = block if block.startswith("stat") else f"{prefix}:{block}"
            for i, v in enumerate(np.atleast_1d(vec)):
                rows.append((key, i, float(v)))
    return rows
