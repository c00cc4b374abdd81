"""Generate the bundled 16-zone synthetic network and summer demand profile.

Zone Z14 is the low-connectivity analog: a single interconnection running
near capacity with a thin heatwave margin, so a timed attack compounds.
Run from the repository root:  python tools/make_bundled_data.py
"""

import csv
import json
from pathlib import Path

OUT = Path(__file__).resolve().parents[1] / "src" / "gridshock" / "data"

VOLL = 2600.0
TOTAL_CUSTOMERS = 19_800_000

# zone id -> (peak demand MW, description)
ZONES = {
    "Z01": (230.0, "Northwest hydro basin"),
    "Z02": (180.0, "Lakeshore wind plains"),
    "Z03": (320.0, "Western industrial"),
    "Z04": (280.0, "Central junction"),
    "Z05": (230.0, "Upper river hydro"),
    "Z06": (140.0, "Northern ridge wind"),
    "Z07": (140.0, "North valley"),
    "Z08": (370.0, "Nuclear corridor west"),
    "Z09": (320.0, "Mohawk analog"),
    "Z10": (420.0, "Capital analog"),
    "Z11": (480.0, "Mid-river"),
    "Z12": (550.0, "Lower valley hub"),
    "Z13": (2400.0, "Metro analog"),
    "Z14": (840.0, "Island analog"),
    "Z15": (420.0, "Eastern suburbs"),
    "Z16": (330.0, "Coastal tail"),
}

# edge: (from, to, flow cap MW)
EDGES = [
    ("E01", "Z01", "Z02", 600.0),
    ("E02", "Z02", "Z03", 700.0),
    ("E03", "Z01", "Z03", 900.0),
    ("E04", "Z03", "Z04", 1000.0),
    ("E05", "Z04", "Z05", 800.0),
    ("E06", "Z05", "Z06", 500.0),
    ("E07", "Z06", "Z07", 400.0),
    ("E08", "Z05", "Z07", 450.0),
    ("E09", "Z04", "Z08", 1300.0),
    ("E10", "Z08", "Z09", 1700.0),
    ("E11", "Z09", "Z10", 1800.0),
    ("E12", "Z10", "Z11", 2000.0),
    ("E13", "Z11", "Z12", 2200.0),
    ("E14", "Z12", "Z13", 1800.0),
    ("E15", "Z13", "Z14", 860.0),
    ("E16", "Z12", "Z15", 420.0),
    ("E17", "Z15", "Z16", 360.0),
]

ANGLE_LIMIT = 1.0  # rad; susceptance keeps operating diffs below ~0.3

# generator: (id, zone, technology, max MW, cost $/MWh)
GENERATORS = [
    ("G01", "Z01", "hydro", 1700.0, 8.0),
    ("G02", "Z02", "wind", 550.0, 15.0),
    ("G03", "Z03", "nuclear", 1150.0, 12.0),
    ("G04", "Z05", "hydro", 850.0, 8.5),
    ("G05", "Z06", "wind", 480.0, 15.5),
    ("G06", "Z07", "solar", 380.0, 18.0),
    ("G07", "Z08", "nuclear", 1050.0, 12.5),
    ("G08", "Z09", "biomass", 280.0, 35.0),
    ("G09", "Z10", "gas_cc", 750.0, 45.0),
    ("G10", "Z11", "gas_cc", 700.0, 46.0),
    ("G11", "Z12", "gas_cc", 650.0, 47.0),
    ("G12", "Z13", "gas_cc", 1150.0, 48.0),
    ("G13", "Z13", "gas_st", 450.0, 62.0),
    ("G14", "Z13", "oil_ct", 220.0, 120.0),
    ("G15", "Z14", "gas_ct", 40.0, 88.0),
    ("G16", "Z14", "oil_ct", 20.0, 121.0),
    ("G17", "Z15", "solar", 150.0, 18.5),
    ("G18", "Z15", "gas_ct", 280.0, 86.0),
    ("G19", "Z16", "wind", 110.0, 15.2),
    ("G20", "Z16", "biomass", 90.0, 36.0),
]

# summer day load shape, hour 0-23, peak at 17:00 with a steep crest
SHAPE = [
    0.64, 0.61, 0.59, 0.58, 0.585, 0.60, 0.64, 0.70,
    0.75, 0.79, 0.83, 0.86, 0.88, 0.90, 0.915, 0.93,
    0.96, 1.00, 0.93, 0.89, 0.85, 0.79, 0.73, 0.68,
]


def main() -> None:
    OUT.mkdir(parents=True, exist_ok=True)
    peaks = {z: p for z, (p, _) in ZONES.items()}
    total_peak = sum(peaks.values())
    shares = {z: p / total_peak for z, p in peaks.items()}
    # make shares sum to exactly 1.0 in float arithmetic
    drift = 1.0 - sum(shares.values())
    shares["Z13"] += drift

    doc = {
        "name": "synthetic16",
        "reference_node": "Z04",
        "total_customers": TOTAL_CUSTOMERS,
        "nodes": [
            {"id": z, "name": desc, "customer_share": shares[z]}
            for z, (_, desc) in ZONES.items()
        ],
        "edges": [
            {"id": eid, "from": a, "to": b,
             # stiffness 3.33 x capacity keeps angle spreads under 0.3 rad
             "susceptance": round(cap / 30.0, 4),
             "flow_limit_mw": cap, "angle_limit_rad": ANGLE_LIMIT}
            for eid, a, b, cap in EDGES
        ],
        "generators": [
            {"id": gid, "node": z, "technology": tech, "min_mw": 0.0,
             "max_mw": cap, "cost_per_mwh": cost}
            for gid, z, tech, cap, cost in GENERATORS
        ],
    }
    (OUT / "network16.json").write_text(json.dumps(doc, indent=2) + "\n")

    with open(OUT / "demand16.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["season", "hour", "node", "demand_mw", "voll"])
        for h, s in enumerate(SHAPE):
            for z, p in peaks.items():
                writer.writerow(["summer", h, z, repr(round(p * s, 3)), repr(VOLL)])
    print(f"wrote {OUT / 'network16.json'} and {OUT / 'demand16.csv'}")


if __name__ == "__main__":
    main()
