#!/usr/bin/env python3
"""Regenerates the scenario fixtures under tests/fixtures.

Every series is a closed-form function of the hour, so reruns are byte-identical.
"""

import json
import math
import sys
from pathlib import Path

TECH_COLUMNS = [
    "id", "kind", "carrier_in", "carrier_out", "efficiency", "capex_annual_eur_per_kw",
    "opex_var_eur_per_mwh", "capacity_max_mw", "energy_capex_annual_eur_per_kwh",
    "charge_eff", "discharge_eff", "max_full_load_hours",
]


def num(v):
    if v is None:
        return ""
    return "%.12g" % v


def tech(id, kind, carrier_out="electricity", carrier_in=None, efficiency=1.0, capex=0.0, opex=0.0,
         capacity_max=None, energy_capex=0.0, charge_eff=1.0, discharge_eff=1.0, flh=None):
    return [id, kind, carrier_in or "", carrier_out, num(efficiency), num(capex), num(opex), num(capacity_max),
            num(energy_capex), num(charge_eff), num(discharge_eff), num(flh)]


def write_csv(path, header, rows):
    with open(path, "w", newline="\n") as f:
        f.write(",".join(header) + "\n")
        for r in rows:
            f.write(",".join(str(c) for c in r) + "\n")


def write_scenario(root, name, config, regions, techs, profiles, demands, links=None):
    d = Path(root) / name
    d.mkdir(parents=True, exist_ok=True)
    with open(d / "config.json", "w", newline="\n") as f:
        json.dump(config, f, indent=2, sort_keys=True)
        f.write("\n")
    write_csv(d / "regions.csv", ["id", "name", "country_voll_eur_per_kwh"],
              [[r[0], r[1], num(r[2])] for r in regions])
    write_csv(d / "technologies.csv", TECH_COLUMNS, techs)
    rows = []
    for region, technology, series in profiles:
        rows += [[region, technology, h, num(v)] for h, v in enumerate(series)]
    write_csv(d / "profiles.csv", ["region", "technology", "hour", "capacity_factor"], rows)
    rows = []
    for region, carrier, sector, series in demands:
        rows += [[region, carrier, sector, h, num(v)] for h, v in enumerate(series)]
    write_csv(d / "sector_demand.csv", ["region", "carrier", "sector", "hour", "demand_mwh"], rows)
    link_path = d / "links.csv"
    if links is None:
        if link_path.exists():
            link_path.unlink()
    else:
        write_csv(link_path, ["from", "to", "carrier", "capex_annual_eur_per_mw", "loss_fraction", "capacity_max_mw"],
                  [[a, b, c, num(capex), num(loss), num(cap)] for a, b, c, capex, loss, cap in links])


def peaker_demand(horizon):
    # Distinct levels 500..1000 MW in a scrambled hour order.
    return [500.0 + 500.0 * ((h * 3677) % horizon) / horizon for h in range(horizon)]


def smooth(h, period, phase, lo, hi):
    return lo + (hi - lo) * 0.5 * (1.0 + math.sin(2.0 * math.pi * (h + phase) / period))


def main(root):
    # Smallest valid scenario: one generator and flat demand over a day.
    write_scenario(root, "min1", {"horizon_hours": 24},
                   [["R1", "Region one", 7.3]],
                   [tech("gen", "generator", capex=50.0, opex=5.0)],
                   [["R1", "gen", [1.0] * 24]],
                   [["R1", "electricity", "households", [100.0] * 24]])

    # One dispatchable unit against a full-year duration curve; CONE/VoLL = 10 h/a.
    write_scenario(root, "peaker", {"horizon_hours": 8760, "hours_per_year": 8760, "cone_eur_per_kw_year": 87.6},
                   [["R1", "Peaker island", 8.76]],
                   [tech("peaker", "generator", capex=87.6)],
                   [["R1", "peaker", [1.0] * 8760]],
                   [["R1", "electricity", "industry", peaker_demand(8760)]])

    # Demand with no supply option and shedding disabled.
    write_scenario(root, "infeasible", {"horizon_hours": 24, "allow_load_shedding": False},
                   [["R1", "Isolated", 5.0]],
                   [tech("gen", "generator", capex=50.0, capacity_max=0.0)],
                   [["R1", "gen", [1.0] * 24]],
                   [["R1", "electricity", "households", [100.0] * 24]])

    # High-VoLL importer A and low-VoLL exporter B sharing B's scarce supply.
    H = 24
    wind = [0.5 if 8 <= h < 14 else 1.0 for h in range(H)]
    write_scenario(root, "export2", {"horizon_hours": H},
                   [["A", "High value", 13.27], ["B", "Low value", 3.65]],
                   [tech("wind", "generator", capex=20.0, capacity_max=110.0),
                    tech("backup", "generator", capex=200.0, opex=60.0, capacity_max=20.0)],
                   [["B", "wind", wind], ["B", "backup", [1.0] * H]],
                   [["A", "electricity", "households", [60.0] * H], ["B", "electricity", "households", [60.0] * H]],
                   [["A", "B", "electricity", 5.0, 0.02, None]])

    # Supply is dearer than the lowest swept VoLL and cheap against the highest.
    H = 48
    solar = [max(0.0, math.sin(math.pi * ((h % 24) - 6) / 12.0)) for h in range(H)]
    write_scenario(root, "collapse", {"horizon_hours": H},
                   [["A", "Alpha", 5.0], ["B", "Beta", 8.0]],
                   [tech("solar", "generator", capex=30.0),
                    tech("thermal", "generator", capex=50.0, opex=10.0)],
                   [["A", "solar", solar], ["A", "thermal", [1.0] * H], ["B", "thermal", [1.0] * H]],
                   [["A", "electricity", "households", [40.0] * H],
                    ["A", "electricity", "industry", [20.0] * H],
                    ["B", "electricity", "services", [30.0] * H]],
                   [["A", "B", "electricity", 10.0, 0.01, None]])

    # Five sectors with distinct VoLLs behind a capped generator.
    H = 24
    cf = [smooth(h, 24, 0, 0.3, 1.0) for h in range(H)]
    demands = [["R1", "electricity", s, [smooth(h, 24, 6 + 3 * i, 10.0, 30.0) for h in range(H)]]
               for i, s in enumerate(["agriculture", "services", "households", "industry", "transport"])]
    write_scenario(root, "merit", {"horizon_hours": H},
                   [["R1", "Five sectors", 9.0]],
                   [tech("gen", "generator", capex=10.0, capacity_max=90.0)],
                   [["R1", "gen", cf]],
                   demands)

    # Wind lull bridged by a hydrogen turbine whose capacity is capped.
    H = 48
    wind = [1.0 if h < 24 else 0.0 for h in range(H)]
    write_scenario(root, "converter_limit", {"horizon_hours": H},
                   [["R1", "Lull", 10.0]],
                   [tech("wind", "generator", capex=30.0),
                    tech("electrolyzer", "converter", carrier_in="electricity", carrier_out="hydrogen",
                         efficiency=0.7, capex=20.0),
                    tech("h2-turbine", "converter", carrier_in="hydrogen", carrier_out="electricity",
                         efficiency=0.6, capex=20.0, capacity_max=30.0),
                    tech("h2-store", "storage", carrier_out="hydrogen", capex=1.0, energy_capex=0.01)],
                   [["R1", "wind", wind]],
                   [["R1", "electricity", "households", [50.0] * H]])

    # Importer behind a capped link, with lossy storage that cannot help.
    H = 24
    write_scenario(root, "link_limit", {"horizon_hours": H},
                   [["A", "Importer", 10.0], ["B", "Exporter", 10.0]],
                   [tech("gen", "generator", capex=10.0),
                    tech("battery", "storage", capex=0.01, energy_capex=0.01, charge_eff=0.9, discharge_eff=0.9)],
                   [["B", "gen", [1.0] * H]],
                   [["A", "electricity", "households", [60.0] * H], ["B", "electricity", "households", [20.0] * H]],
                   [["A", "B", "electricity", 1.0, 0.0, 40.0]])

    # Five regions, two carriers, two weeks.
    H = 336
    names = ["N1", "N2", "N3", "N4", "N5"]
    volls = [13.27, 3.65, 5.6, 8.0, 2.5]
    profiles = []
    for i, r in enumerate(names):
        if i != 3:
            profiles.append([r, "solar", [max(0.0, math.sin(math.pi * ((h % 24) - 6) / 12.0)) * (0.8 + 0.04 * i)
                                          for h in range(H)]])
        if i != 0:
            profiles.append([r, "wind", [min(1.0, smooth(h, 97 + 11 * i, 13 * i, 0.02, 0.95)
                                          * smooth(h, 29, 5 * i, 0.6, 1.0)) for h in range(H)]])
    demands = []
    for i, r in enumerate(names):
        demands.append([r, "electricity", "households", [smooth(h, 24, 18 + i, 60.0 + 10 * i, 110.0 + 12 * i)
                                                         for h in range(H)]])
        demands.append([r, "hydrogen", "industry", [20.0 + 2.0 * i] * H])
    write_scenario(root, "perf5", {"horizon_hours": H},
                   [[r, "Node " + r, v] for r, v in zip(names, volls)],
                   [tech("solar", "generator", capex=35.0, opex=0.1),
                    tech("wind", "generator", capex=90.0, opex=0.2),
                    tech("electrolyzer", "converter", carrier_in="electricity", carrier_out="hydrogen",
                         efficiency=0.7, capex=45.0),
                    tech("h2-turbine", "converter", carrier_in="hydrogen", carrier_out="electricity",
                         efficiency=0.55, capex=40.0, opex=1.0),
                    tech("h2-store", "storage", carrier_out="hydrogen", capex=2.0, energy_capex=0.05)],
                   profiles,
                   demands,
                   [["N1", "N2", "electricity", 40.0, 0.02, None],
                    ["N2", "N3", "electricity", 40.0, 0.02, None],
                    ["N3", "N4", "electricity", 40.0, 0.03, None],
                    ["N4", "N5", "electricity", 40.0, 0.02, 150.0]])


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else Path(__file__).resolve().parent.parent / "tests" / "fixtures")
