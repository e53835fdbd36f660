#!/usr/bin/env python3
"""Convert a MATPOWER case file into the grid JSON read by `cps-detect demo ieee14 --data`.

Usage:
    ieee14_from_matpower.py case14.m > ieee14.json
    ieee14_from_matpower.py https://raw.githubusercontent.com/MATPOWER/matpower/master/data/case14.m > ieee14.json

Branch reactances are copied from the case. Machine inertia, damping and
transient reactance are not part of a MATPOWER case, so every generator gets
the values in MACHINES (keyed by bus) or DEFAULT_MACHINE.
"""

import json
import math
import re
import sys
import urllib.request

FREQUENCY = 60.0
# bus: (H seconds, D, xd')
MACHINES = {
    1: (5.148, 0.0053, 0.2995),
    2: (6.54, 0.0053, 0.185),
    3: (6.54, 0.0053, 0.185),
    6: (5.06, 0.0053, 0.232),
    8: (5.06, 0.0053, 0.232),
}
DEFAULT_MACHINE = (5.0, 0.0053, 0.25)


def read_source(src):
    if re.match(r"https?://", src):
        with urllib.request.urlopen(src) as r:
            return r.read().decode()
    with open(src) as f:
        return f.read()


def matrix(text, name):
    m = re.search(r"mpc\." + name + r"\s*=\s*\[(.*?)\];", text, re.S)
    if not m:
        sys.exit(f"no mpc.{name} block")
    rows = []
    for line in m.group(1).splitlines():
        line = line.split("%")[0].strip().rstrip(";")
        if line:
            rows.append([float(v) for v in line.split()])
    return rows


def convert(text):
    buses = matrix(text, "bus")
    branches = [[int(b[0]), int(b[1]), b[3]] for b in matrix(text, "branch") if len(b) < 11 or b[10] != 0]
    generators = []
    for g in matrix(text, "gen"):
        bus = int(g[0])
        h, d, xd = MACHINES.get(bus, DEFAULT_MACHINE)
        generators.append({"bus": bus, "M": round(2 * h / (2 * math.pi * FREQUENCY), 5), "D": d, "xd_prime": xd})
    return {
        "name": "IEEE 14-bus",
        "note": "Branch reactances (p.u., 100 MVA base) from MATPOWER case14. Generator inertias M = 2H/(2*pi*60), "
        "dampings and transient reactances are typical machine values for the generator buses.",
        "buses": len(buses),
        "branches": branches,
        "generators": generators,
    }


def main():
    if len(sys.argv) != 2:
        sys.exit(__doc__)
    json.dump(convert(read_source(sys.argv[1])), sys.stdout, indent=2)
    print()


if __name__ == "__main__":
    main()
