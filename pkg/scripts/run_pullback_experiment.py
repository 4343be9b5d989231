#!/usr/bin/env python3
"""Pullback-attraction demo on the small truncation (a few minutes)."""

import os
import sys

from modelh.cli import main

HERE = os.path.dirname(os.path.abspath(__file__))

if __name__ == "__main__":
    out = sys.argv[1] if len(sys.argv) > 1 else "results/pullback"
    code = main(["pullback",
                 "--config", os.path.join(HERE, "..", "configs", "pullback_small.toml"),
                 "--out", out, "--threads", "2"])
    print(f"outputs in {out}")
    raise SystemExit(code)
