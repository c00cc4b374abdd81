import csv
import json

import numpy as np
import pytest

from gridshock.cli import main
from gridshock.network import save_demand, save_network
from support import profile_for, tight_two_bus


@pytest.fixture()
def files(tmp_path):
    net = tight_two_bus()
    prof = profile_for(net, [[10.0, 60.0], [10.0, 80.0]])
    net_path = tmp_path / "net.json"
    dem_path = tmp_path / "demand.csv"
    save_network(net, net_path)
    save_demand(prof, dem_path)
    cfg_path = tmp_path / "run.cfg"
    cfg_path.write_text("kind = Compound\nbudget = 30\nnode_limit = 0\n")
    return net, net_path, dem_path, cfg_path, tmp_path


def test_scenario_subcommand(files, capsys):
    net, net_path, dem_path, cfg_path, tmp = files
    rc = main(["scenario", "--network", str(net_path), "--demand", str(dem_path),
               "--config", str(cfg_path), "--out", str(tmp / "out")])
    assert rc == 0
    manifest = json.loads((tmp / "out" / "manifest.json").read_text())
    assert len(manifest["files"]) >= 4
    assert "unserved" in capsys.readouterr().out


def test_missing_network_exits_1(files, capsys):
    net, net_path, dem_path, cfg_path, tmp = files
    rc = main(["scenario", "--network", str(tmp / "nope.json"),
               "--demand", str(dem_path), "--out", str(tmp / "x")])
    assert rc == 1
    assert "nope.json" in capsys.readouterr().err


def test_solve_opf_and_dump_lp(files):
    net, net_path, dem_path, cfg_path, tmp = files
    rc = main(["solve-opf", "--network", str(net_path), "--demand", str(dem_path),
               "--out", str(tmp / "opf"), "--dump-lp"])
    assert rc == 0
    assert (tmp / "opf" / "opf_solution.csv").exists()
    assert (tmp / "opf" / "dcopf_h0.lp").read_text().startswith("Minimize")


def test_attack_subcommand(files, capsys):
    net, net_path, dem_path, cfg_path, tmp = files
    rc = main(["attack", "--network", str(net_path), "--demand", str(dem_path),
               "--config", str(cfg_path), "--budget", "30",
               "--out", str(tmp / "atk")])
    assert rc == 0
    with open(tmp / "atk" / "attack_strategy.csv") as fh:
        assert len(list(csv.DictReader(fh))) > 0


def test_verify_roundtrip_and_corruption(files):
    net, net_path, dem_path, cfg_path, tmp = files
    assert main(["attack", "--network", str(net_path), "--demand", str(dem_path),
                 "--config", str(cfg_path), "--heatwave-factor", "1.09",
                 "--out", str(tmp / "run")]) == 0
    assert main(["verify", "--network", str(net_path), "--demand", str(dem_path),
                 "--heatwave-factor", "1.09", "--solution", str(tmp / "run")]) == 0
    # corrupt one value: the certificate must catch it
    sol = tmp / "run" / "opf_solution.csv"
    rows = sol.read_text().splitlines()
    for i, row in enumerate(rows):
        parts = row.split(",")
        if len(parts) == 5 and parts[3] == "g" and float(parts[4]) > 1.0:
            parts[4] = repr(float(parts[4]) + 7.5)
            rows[i] = ",".join(parts)
            break
    sol.write_text("\n".join(rows) + "\n")
    assert main(["verify", "--network", str(net_path), "--demand", str(dem_path),
                 "--heatwave-factor", "1.09", "--solution", str(tmp / "run")]) == 2


def test_verify_missing_solution_dir(files):
    net, net_path, dem_path, cfg_path, tmp = files
    rc = main(["verify", "--network", str(net_path), "--demand", str(dem_path),
               "--solution", str(tmp / "absent")])
    assert rc == 1


def test_sweep_beta_subcommand(files):
    net, net_path, dem_path, cfg_path, tmp = files
    cfg2 = tmp / "sweep.cfg"
    cfg2.write_text("kind = Compound\nbudget = 30\nnode_limit = 0\n"
                    "beta_iterations = 2\n")
    rc = main(["sweep-beta", "--network", str(net_path), "--demand", str(dem_path),
               "--config", str(cfg2), "--out", str(tmp / "sw")])
    assert rc == 0
    assert (tmp / "sw" / "sweep_summary.csv").exists()
