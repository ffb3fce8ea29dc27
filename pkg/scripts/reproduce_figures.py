#!/usr/bin/env python3
"""Regenerate the machine-readable data behind every bundled scenario.

Runs the CLI once per config in figures/, writing one subdirectory of
artifacts per scenario under the chosen output directory (default
``out/``).  Each scenario gets its phase-portrait bundle plus the
analysis that the scenario illustrates (equilibrium table, bifurcation
record, or certificate checklist).
"""

from __future__ import annotations

import argparse
import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from alleecoop.cli import main as cli_main

HERE = os.path.dirname(os.path.abspath(__file__))
FIGDIR = os.path.join(HERE, "..", "figures")

# (config, extra CLI invocations besides the portrait bundle)
RUNS: list[tuple[str, list[list[str]]]] = [
    ("fig1.cfg", [["equilibria", "--sweep", "s=0.3:0.78:3", "--out", "counts_weak.csv"]]),
    ("fig2.cfg", [
        ["bifurcate", "transcritical", "--at", "E1", "--out", "transcritical_E1.json"],
        ["equilibria", "--out", "equilibria_lam02.csv"],
        ["equilibria", "--set", "lambda=0.3", "--out", "equilibria_lam03.csv"],
    ]),
    ("fig3.cfg", [["bifurcate", "saddle-node", "--out", "saddle_node.json"]]),
    ("fig4.cfg", [
        ["bifurcate", "hopf", "--out", "hopf.json"],
        ["simulate", "--out", "trajectory_s075.csv"],
        ["simulate", "--set", "s=0.76", "--out", "trajectory_s076.csv"],
    ]),
    ("fig5.cfg", [
        ["bifurcate", "hopf", "--out", "hopf.json"],
        ["simulate", "--out", "trajectory_s010.csv"],
        ["simulate", "--set", "s=0.15", "--out", "trajectory_s015.csv"],
    ]),
    ("fig6.cfg", []),
    ("fig7.cfg", [["bifurcate", "heteroclinic", "--out", "heteroclinic.json"]]),
    ("fig8.cfg", [
        ["bifurcate", "k0-origin", "--out", "origin_crossing.json"],
        ["simulate", "--out", "trajectory_k0neg.csv"],
        ["simulate", "--set", "k0=0.3", "--out", "trajectory_k0pos.csv"],
    ]),
]


def run(out_root: str) -> int:
    for cfg_name, extras in RUNS:
        cfg = os.path.join(FIGDIR, cfg_name)
        stem = os.path.splitext(cfg_name)[0]
        out_dir = os.path.join(out_root, stem)
        os.makedirs(out_dir, exist_ok=True)
        print(f"== {stem}: portrait bundle -> {out_dir}")
        rc = cli_main(["portrait", "--config", cfg, "--out-dir", out_dir])
        if rc != 0:
            return rc
        for extra in extras:
            argv = list(extra)
            if "--out" in argv:
                i = argv.index("--out") + 1
                argv[i] = os.path.join(out_dir, argv[i])
            argv += ["--config", cfg]
            print(f"   {' '.join(extra[:2])}")
            rc = cli_main(argv)
            if rc != 0:
                return rc
    return 0


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="out", help="output root directory")
    args = ap.parse_args()
    sys.exit(run(args.out))
