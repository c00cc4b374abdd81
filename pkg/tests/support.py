"""Shared instance builders for the test suite."""

from __future__ import annotations

import numpy as np

from gridshock.network import (
    DemandProfile,
    Edge,
    Generator,
    Node,
    PowerNetwork,
    validate_network,
)


def profile_for(net: PowerNetwork, rows, voll=1000.0, season="summer") -> DemandProfile:
    d = np.array(rows, dtype=float)
    if d.ndim == 1:
        d = d[None, :]
    H, N = d.shape
    v = np.full((H, N), float(voll))
    return DemandProfile(tuple(n.id for n in net.nodes), {season: d}, {season: v})


def one_bus(g_max=150.0, cost=20.0) -> PowerNetwork:
    return validate_network(PowerNetwork(
        "one",
        (Node("n1", "n1", 1.0),),
        (),
        (Generator("g1", "n1", "gas", 0.0, g_max, cost),),
        "n1", 1_000_000,
    ))


def two_bus(g1=150.0, c1=20.0, g2=100.0, c2=90.0, fbar=50.0, with_g2=True) -> PowerNetwork:
    gens = [Generator("g1", "n1", "cheap", 0.0, g1, c1)]
    if with_g2:
        gens.append(Generator("g2", "n2", "dear", 0.0, g2, c2))
    return validate_network(PowerNetwork(
        "twobus",
        (Node("n1", "n1", 0.5), Node("n2", "n2", 0.5)),
        (Edge("e1", "n1", "n2", 8.0, fbar, 1.0),),
        tuple(gens),
        "n1", 1_000_000,
    ))


def tight_two_bus() -> PowerNetwork:
    """Both capacity limits bind at the baseline optimum; any capacity kill sheds."""
    return validate_network(PowerNetwork(
        "twobus-tight",
        (Node("n1", "n1", 0.5), Node("n2", "n2", 0.5)),
        (Edge("e1", "n1", "n2", 8.0, 50.0, 1.0),),
        (Generator("g1", "n1", "cheap", 0.0, 60.0, 20.0),
         Generator("g2", "n2", "dear", 0.0, 30.0, 90.0)),
        "n1", 1_000_000,
    ))


def triangle() -> PowerNetwork:
    return validate_network(PowerNetwork(
        "tri",
        (Node("n1", "n1", 0.4), Node("n2", "n2", 0.3), Node("n3", "n3", 0.3)),
        (Edge("e12", "n1", "n2", 10.0, 100.0, 1.0),
         Edge("e13", "n1", "n3", 6.0, 60.0, 1.0),
         Edge("e23", "n2", "n3", 6.0, 60.0, 1.0)),
        (Generator("g1", "n1", "cheap", 0.0, 300.0, 10.0),
         Generator("g2", "n2", "mid", 0.0, 120.0, 30.0),
         Generator("g3", "n3", "dear", 0.0, 80.0, 90.0)),
        "n1", 1_000_000,
    ))
