#!/usr/bin/env python3
"""Unforced relaxation demo: energy budget CSV plus a final checkpoint."""

import os
import sys

from modelh.cli import main

HERE = os.path.dirname(os.path.abspath(__file__))

if __name__ == "__main__":
    out = sys.argv[1] if len(sys.argv) > 1 else "results/decay"
    code = main(["simulate",
                 "--config", os.path.join(HERE, "..", "configs", "simulate_decay.toml"),
                 "--out", out])
    print(f"outputs in {out}")
    raise SystemExit(code)
