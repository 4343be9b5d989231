#!/usr/bin/env python3
"""Run the quick verification battery: potential certification, dissipativity,
dimension sanity and shift continuity, each into its own results directory."""

import os
import sys

from modelh.cli import main

HERE = os.path.dirname(os.path.abspath(__file__))
CONFIGS = os.path.join(HERE, "..", "configs")

BATTERY = [
    ("validate-potential", "validate_potential.toml"),
    ("verify", "dissipative.toml", "dissipative"),
    ("dimension", "dimension_torus.toml"),
    ("holder", "holder_h1prime.toml"),
]

if __name__ == "__main__":
    base = sys.argv[1] if len(sys.argv) > 1 else "results"
    worst = 0
    for entry in BATTERY:
        command, config = entry[0], entry[1]
        argv = [command, "--config", os.path.join(CONFIGS, config),
                "--out", os.path.join(base, config.removesuffix(".toml"))]
        if command == "verify":
            argv.insert(1, entry[2])
        print(f"== {' '.join(argv[:2])} ({config})")
        worst = max(worst, main(argv))
    raise SystemExit(worst)
