"""Command-line interface.

Subcommands: solve-opf, attack, scenario, sweep-gamma, sweep-beta, verify.
Exit codes: 0 success, 1 validation/usage error, 2 solver failure or
failed verification.
"""

from __future__ import annotations

import argparse
import sys
from importlib import resources
from pathlib import Path

import numpy as np

from . import reporting
from .attack import BigMInvalidError
from .dcopf import solve_day
from .kkt import kkt_residuals, verify_equilibrium
from .milp import MilpNodeLimitError
from .network import (
    NetworkParseError,
    NetworkValidationError,
    apply_heatwave,
    load_demand,
    load_network,
)
from .scenarios import (
    ScenarioConfig,
    ScenarioError,
    gamma_sweep,
    beta_sweep,
    load_config,
    run_scenario,
    scenario_costs,
)
from .simplex import SolverNumericalError, dump_lp

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_SOLVER = 2
VERIFY_TOL = 1e-5


def bundled_path(name: str) -> Path:
    return Path(str(resources.files("gridshock").joinpath("data", name)))


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--network", default=None, help="network JSON file (default: bundled)")
    p.add_argument("--demand", default=None, help="demand CSV file (default: bundled)")
    p.add_argument("--config", default=None, help="scenario config file")
    p.add_argument("--out", default="out", help="output directory")
    p.add_argument("--budget", type=float, default=None, help="attacker budget override")
    p.add_argument("--cost-ratio", type=float, default=None,
                   help="wire/generator attack price ratio override")
    p.add_argument("--heatwave-factor", type=float, default=None,
                   help="demand scaling factor override")
    p.add_argument("--season", default=None, help="season to run (default summer)")
    p.add_argument("--node-limit", type=int, default=None,
                   help="branch-and-bound node limit per attack problem")
    p.add_argument("--seed", type=int, default=0,
                   help="seed recorded for randomized property tooling")
    p.add_argument("--dump-lp", action="store_true",
                   help="write LP-format dumps of built problems")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gridshock",
        description="Cyber-physical interdiction planning on transmission networks",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, doc in (
        ("solve-opf", "solve the hourly dispatch for a whole day"),
        ("attack", "run the budgeted attacker (decomposition + refinement)"),
        ("scenario", "run a named scenario from a config file"),
        ("sweep-gamma", "attacker price-ratio sensitivity ladder"),
        ("sweep-beta", "attacker budget sensitivity ladder"),
        ("verify", "re-check the equilibrium certificate of a saved run"),
    ):
        p = sub.add_parser(name, help=doc)
        _add_common(p)
        if name == "verify":
            p.add_argument("--solution", required=True,
                           help="directory containing opf_solution.csv")
    return parser


def _load_inputs(args):
    net_path = args.network or bundled_path("network16.json")
    dem_path = args.demand or bundled_path("demand16.csv")
    net = load_network(net_path)
    demand = load_demand(dem_path, net)
    return net, demand


def _config(args) -> ScenarioConfig:
    overrides = {
        "budget": args.budget,
        "cost_ratio": args.cost_ratio,
        "heatwave_factor": args.heatwave_factor,
        "season": args.season,
        "node_limit": args.node_limit,
    }
    if args.config:
        return load_config(args.config, **overrides)
    return ScenarioConfig(**{k: v for k, v in overrides.items() if v is not None})


def cmd_solve_opf(args) -> int:
    net, demand = _load_inputs(args)
    cfg = _config(args)
    profile = demand
    if cfg.heatwave_factor != 1.0 and args.heatwave_factor is not None:
        profile = apply_heatwave(demand, cfg.heatwave_factor)
    hours = solve_day(net, profile, cfg.season)
    unserved = np.array([s.u for s in hours])
    from .scenarios import _metrics
    result = _metrics("Baseline" if args.heatwave_factor is None else "Heatwave",
                      cfg.season, net, np.array(profile.demand[cfg.season]),
                      unserved, None, hours)
    manifest = reporting.export_results(result, args.out, net)
    if args.dump_lp:
        from .dcopf import build_dcopf
        for h in range(profile.hours(cfg.season)):
            text = dump_lp(build_dcopf(net, profile, cfg.season, h))
            (Path(args.out) / f"dcopf_h{h}.lp").write_text(text)
    print(f"total unserved: {result.total_unserved_mwh:.6g} MWh "
          f"({len(manifest['files'])} files in {args.out})")
    return EXIT_OK


def cmd_attack(args) -> int:
    net, demand = _load_inputs(args)
    cfg = _config(args)
    kind = "Compound" if (args.heatwave_factor or 1.0) != 1.0 else "Cyberattack"
    from dataclasses import replace
    cfg = replace(cfg, kind=kind)
    costs = scenario_costs(cfg, net)
    result = run_scenario(cfg, net, demand, costs=costs)
    manifest = reporting.export_results(result, args.out, net, costs)
    if args.dump_lp and result.plan is not None:
        from .attack import BigMConfig, build_hourly_attack_milp
        prob = build_hourly_attack_milp(
            net, demand, cfg.season, result.peak_hour, costs,
            costs.budget / demand.hours(cfg.season))
        (Path(args.out) / f"attack_h{result.peak_hour}.lp").write_text(dump_lp(prob.lp))
    print(f"{kind}: unserved {result.total_unserved_mwh:.6g} MWh, "
          f"peak {result.peak_shed_mw:.6g} MW at hour {result.peak_hour}, "
          f"customers affected {result.customers_affected}")
    return EXIT_OK


def cmd_scenario(args) -> int:
    net, demand = _load_inputs(args)
    cfg = _config(args)
    costs = scenario_costs(cfg, net)
    result = run_scenario(cfg, net, demand, costs=costs)
    reporting.export_results(result, args.out, net, costs)
    print(f"{cfg.kind}: unserved {result.total_unserved_mwh:.6g} MWh "
          f"({result.percent_unserved:.4g}% of load), "
          f"customers affected {result.customers_affected}")
    return EXIT_OK


def cmd_sweep(args, parameter: str) -> int:
    net, demand = _load_inputs(args)
    cfg = _config(args)
    points = gamma_sweep(cfg, net, demand) if parameter == "gamma" \
        else beta_sweep(cfg, net, demand)
    reporting.export_sweep(points, args.out, net)
    for pt in points:
        print(f"iter {pt.iteration}: multiplier {pt.multiplier:.4g} "
              f"cyber {pt.cyberattack.total_unserved_mwh:.6g} MWh "
              f"compound {pt.compound.total_unserved_mwh:.6g} MWh")
    return EXIT_OK


def cmd_verify(args) -> int:
    net, demand = _load_inputs(args)
    cfg = _config(args)
    soldir = Path(args.solution)
    solfile = soldir / "opf_solution.csv"
    if not solfile.exists():
        print(f"error: {solfile} not found", file=sys.stderr)
        return EXIT_VALIDATION
    data = reporting.read_solution_csv(solfile)
    attacks = {}
    attack_file = soldir / "attack_strategy.csv"
    if attack_file.exists():
        attacks = reporting.read_attack_csv(attack_file, net)
    factor = args.heatwave_factor
    profile = apply_heatwave(demand, factor) if factor not in (None, 1.0) else demand
    worst = 0.0
    dump_rows = []
    failed = None
    for (season, hour), quantities in sorted(data.items()):
        d = profile.demand[season][hour]
        voll = profile.voll[season][hour]
        sol = reporting.rebuild_opf_solution(net, season, hour, quantities, d, voll)
        z = attacks.get(hour, {})
        res = kkt_residuals(net, sol, z.get("zg"), z.get("zf"), z.get("zt"))
        worst = max(worst, res.overall_max())
        if args.dump_lp:
            from .kkt import residual_rows
            dump_rows += [(season, hour, blk, i, v)
                          for blk, i, v in residual_rows(res)]
        if failed is None and not verify_equilibrium(res, VERIFY_TOL):
            failed = (season, hour, res.overall_max())
    if dump_rows:
        import csv as _csv
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        with open(out / "kkt_residuals.csv", "w", newline="") as fh:
            w = _csv.writer(fh)
            w.writerow(["season", "hour", "block", "index", "residual"])
            w.writerows(dump_rows)
    if failed is not None:
        print(f"FAIL {failed[0]}/{failed[1]}: max residual {failed[2]:.3e}")
        return EXIT_SOLVER
    print(f"verified {len(data)} hourly solutions, max residual {worst:.3e}")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "solve-opf":
            return cmd_solve_opf(args)
        if args.command == "attack":
            return cmd_attack(args)
        if args.command == "scenario":
            return cmd_scenario(args)
        if args.command == "sweep-gamma":
            return cmd_sweep(args, "gamma")
        if args.command == "sweep-beta":
            return cmd_sweep(args, "beta")
        if args.command == "verify":
            return cmd_verify(args)
        parser.error(f"unknown command {args.command}")
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (NetworkParseError, NetworkValidationError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (SolverNumericalError, MilpNodeLimitError, BigMInvalidError,
            ScenarioError) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
