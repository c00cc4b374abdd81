"""File outputs: time series, zonal summaries, strategy breakdowns, shock file.

All outputs are plain CSV plus one JSON manifest.  Report files format
floats at 6 significant digits; shock.csv uses 12 and the machine-exchange
files (opf_solution.csv, attack_strategy.csv z/spend columns) use 17 so
the KKT verifier can reconstruct solutions exactly.  Formats are
documented in docs/formats.md.  Row order is deterministic: node id, then
hour.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .attack import AttackCosts, attack_rows
from .dcopf import OpfSolution, solution_rows
from .network import PowerNetwork
from .scenarios import ScenarioResult, SweepPoint

SECTOR_TAG = "Utilities"


def fmt(x: float, digits: int = 6) -> str:
    return format(float(x), f".{digits}g")


def _write_csv(path: Path, header: list[str], rows: list[tuple]) -> int:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow(row)
    return len(rows)


def shock_rows(result: ScenarioResult) -> list[tuple[str, str, float]]:
    """Per-region percent supply reduction for the downstream economy model."""
    return [(node, SECTOR_TAG, float(result.shock_percent[j]))
            for j, node in enumerate(result.node_ids)]


def export_results(
    result: ScenarioResult,
    outdir: str | Path,
    net: PowerNetwork,
    costs: AttackCosts | None = None,
) -> dict:
    """Write the scenario's file set and return the manifest dictionary."""
    outdir = Path(outdir)
    try:
        outdir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {outdir}: {exc}") from exc

    manifest: dict = {
        "scenario": result.kind,
        "season": result.season,
        "total_unserved_mwh": result.total_unserved_mwh,
        "demand_energy_mwh": result.demand_energy_mwh,
        "percent_unserved": result.percent_unserved,
        "peak_shed_mw": result.peak_shed_mw,
        "peak_hour": result.peak_hour,
        "customers_affected": result.customers_affected,
        "files": {},
    }

    def record(name: str, count: int):
        manifest["files"][name] = {"rows": count}

    H = result.unserved.shape[0]
    node_order = sorted(range(len(result.node_ids)), key=lambda j: result.node_ids[j])

    rows = [(h, result.node_ids[j], fmt(result.unserved[h, j]))
            for j in node_order for h in range(H)]
    record("unserved_timeseries.csv",
           _write_csv(outdir / "unserved_timeseries.csv",
                      ["hour", "node", "unserved_mw"], rows))

    zrows = []
    shares = net.customer_shares()
    for j in node_order:
        dem = float(result.demand_used[:, j].sum())
        uns = float(result.unserved[:, j].sum())
        pct = 100.0 * uns / dem if dem > 0 else 0.0
        zcust = int(round((uns / dem if dem > 0 else 0.0)
                          * shares[j] * result.total_customers))
        zrows.append((result.node_ids[j], fmt(dem), fmt(uns), fmt(pct), zcust))
    record("zonal_summary.csv",
           _write_csv(outdir / "zonal_summary.csv",
                      ["node", "demand_mwh", "unserved_mwh", "percent_unserved",
                       "customers_affected"], zrows))

    arows = []
    if result.plan is not None and costs is not None:
        for season, hour, ctype, entity, z, spend in attack_rows(result.plan, net, costs):
            arows.append((season, hour, ctype, entity, fmt(z, 17), fmt(spend, 17)))
    arows.sort(key=lambda r: (r[3], r[1], r[2]))
    record("attack_strategy.csv",
           _write_csv(outdir / "attack_strategy.csv",
                      ["season", "hour", "component_type", "entity", "z_value",
                       "spend"], arows))

    srows = [(region, sector, fmt(pct, 12))
             for region, sector, pct in sorted(shock_rows(result))]
    record("shock.csv",
           _write_csv(outdir / "shock.csv",
                      ["region", "sector", "percent_reduction"], srows))

    if result.opf_hours:
        orows = []
        for sol in result.opf_hours:
            for season, hour, entity, quantity, value in solution_rows(sol, net):
                orows.append((season, hour, entity, quantity, fmt(value, 17)))
        record("opf_solution.csv",
               _write_csv(outdir / "opf_solution.csv",
                          ["season", "hour", "entity", "quantity", "value"], orows))

    (outdir / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    return manifest


def export_sweep(
    points: list[SweepPoint],
    outdir: str | Path,
    net: PowerNetwork,
) -> dict:
    """One subdirectory per iteration plus a sweep summary CSV."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    summary = []
    manifest: dict = {"parameter": points[0].parameter if points else "",
                      "iterations": len(points), "files": {}}
    for pt in points:
        sub = outdir / f"iter{pt.iteration}"
        for label, res in (("cyberattack", pt.cyberattack), ("compound", pt.compound)):
            export_results(res, sub / label, net)
        summary.append((pt.iteration, fmt(pt.multiplier, 12), fmt(pt.cost_ratio, 12),
                        fmt(pt.budget, 12),
                        fmt(pt.cyberattack.total_unserved_mwh, 12),
                        fmt(pt.compound.total_unserved_mwh, 12)))
    n = _write_csv(outdir / "sweep_summary.csv",
                   ["iteration", "multiplier", "wire_over_gen_cost_ratio", "budget",
                    "cyberattack_unserved_mwh", "compound_unserved_mwh"], summary)
    manifest["files"]["sweep_summary.csv"] = {"rows": n}
    (outdir / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    return manifest


def read_solution_csv(path: str | Path) -> dict[tuple[str, int], dict[str, dict[str, float]]]:
    """Load opf_solution.csv back as {(season, hour): {quantity: {entity: value}}}."""
    out: dict[tuple[str, int], dict[str, dict[str, float]]] = {}
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            key = (row["season"], int(row["hour"]))
            out.setdefault(key, {}).setdefault(row["quantity"], {})[row["entity"]] = \
                float(row["value"])
    return out


def rebuild_opf_solution(
    net: PowerNetwork,
    season: str,
    hour: int,
    data: dict[str, dict[str, float]],
    demand: np.ndarray,
    voll: np.ndarray,
) -> OpfSolution:
    """Reassemble an OpfSolution from exported rows (for the verify command)."""
    def vec(quantity: str, ids: list[str]) -> np.ndarray:
        got = data.get(quantity, {})
        return np.array([got.get(i, 0.0) for i in ids])

    gid = [g.id for g in net.generators]
    eid = [e.id for e in net.edges]
    nid = [nd.id for nd in net.nodes]
    g = vec("g", gid)
    u = vec("u", nid)
    return OpfSolution(
        season=season, hour=hour,
        g=g, f=vec("f", eid), u=u, theta=vec("theta", nid),
        pi_d=vec("pi_d", nid), pi_f=vec("pi_f", eid),
        delta=data.get("delta", {}).get("system", 0.0),
        rho_g_lo=vec("rho_g_lo", gid), rho_g_up=vec("rho_g_up", gid),
        rho_f_lo=vec("rho_f_lo", eid), rho_f_up=vec("rho_f_up", eid),
        rho_th_lo=vec("rho_th_lo", eid), rho_th_up=vec("rho_th_up", eid),
        rho_u_lo=vec("rho_u_lo", nid), rho_u_up=vec("rho_u_up", nid),
        objective=data.get("objective", {}).get("system", 0.0),
        demand=demand, voll=voll,
        shed_cost=float(voll @ u),
    )


def read_attack_csv(path: str | Path, net: PowerNetwork) -> dict[int, dict[str, np.ndarray]]:
    """Load attack_strategy.csv as {hour: {zg, zf, zt}} arrays."""
    gi = {g.id: k for k, g in enumerate(net.generators)}
    ei = {e.id: k for k, e in enumerate(net.edges)}
    out: dict[int, dict[str, np.ndarray]] = {}
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            h = int(row["hour"])
            slot = out.setdefault(h, {
                "zg": np.zeros(net.num_generators),
                "zf": np.zeros(net.num_edges),
                "zt": np.zeros(net.num_edges),
            })
            kind = row["component_type"]
            entity = row["entity"]
            val = float(row["z_value"])
            if kind == "gen":
                slot["zg"][gi[entity]] = val
            elif kind == "flow":
                slot["zf"][ei[entity]] = val
            elif kind == "angle":
                slot["zt"][ei[entity]] = val
    return out
