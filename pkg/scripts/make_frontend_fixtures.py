#!/usr/bin/env python3
"""Generate the example outputs consumed by the plotting frontend tests.

Runs scaled-down experiments through the CLI and collects their reports and
CSV series under frontend/fixtures/.  Rerun after changing any output format.
"""

import os
import shutil
import sys
import tempfile

from modelh.cli import main

HERE = os.path.dirname(os.path.abspath(__file__))
FIXTURES = os.path.join(HERE, "..", "frontend", "fixtures")

SIMULATE = """
[grid]
n_modes = 16

[params]
nu = 1.0
dt = 2e-3
stabilization = "auto"
margin = 1.5

[potential]
family = "double_well"
m = 1

[forcing]
kind = "zero"

[initial]
kind = "random"
amplitude = 1.0

[experiment]
kind = "simulate"
t_end = 4.0
observe_every = 10
seed = 7
"""

DISSIPATIVE = """
[grid]
n_modes = 16

[params]
nu = 0.5
dt = 2e-3
stabilization = 2.0

[potential]
family = "double_well"
m = 1

[forcing]
kind = "zero"

[initial]
kind = "taylor_green"
amplitude = 1.0

[experiment]
kind = "dissipative"
data_amplitudes = [1.0]
trajectories_per_set = 1
horizon = 10.0
observe_every = 20
seed = 2
"""

PULLBACK = """
[grid]
n_modes = 16

[params]
nu = 0.5
dt = 4e-3
stabilization = 6.0

[potential]
family = "double_well"
m = 1

[forcing]
kind = "past_decaying"
modes = [[1, 2], [2, -1]]
amplitude = 0.3
decay_rate = 0.5
switch_time = 0.0

[initial]
kind = "random"
mean_psi = 0.8
velocity_fraction = 0.6
decay = 3.0

[experiment]
kind = "pullback"
tau0 = 1.0
ball_radius = 12.0
sample_count = 4
ladder = [1, 2, 3, 4]
seed = 8
"""

HOLDER = """
[grid]
n_modes = 16

[params]
nu = 1.0
dt = 0.00390625
stabilization = 4.0

[potential]
family = "double_well"
m = 1

[forcing]
kind = "quasi_periodic"
modes = [[1, 2], [2, -1]]
amplitude = 0.2
frequencies = [1.0, 1.4142135623730951]
signal_amplitudes = [1.0, 0.7]

[experiment]
kind = "holder"
mode = "H1prime"
tau0 = 1.0
ball_radius = 5.0
s_ladder = [0.5, 0.25, 0.125, 0.0625]
q = 4.0
sample_count = 1
seed = 12
"""

DIMENSION = """
[grid]
n_modes = 16

[params]
nu = 1.0
dt = 1e-3

[potential]
family = "double_well"
m = 1

[experiment]
kind = "dimension"
source = "torus"
count = 1500
seed = 2
"""

JOBS = [
    ("simulate", None, SIMULATE, "simulate"),
    ("verify", "dissipative", DISSIPATIVE, "dissipative"),
    ("pullback", None, PULLBACK, "pullback"),
    ("holder", None, HOLDER, "holder"),
    ("dimension", None, DIMENSION, "dimension"),
]


def run_job(command, what, config_text, name):
    out_dir = os.path.join(FIXTURES, name)
    if os.path.isdir(out_dir):
        shutil.rmtree(out_dir)
    with tempfile.NamedTemporaryFile("w", suffix=".toml", delete=False) as fh:
        fh.write(config_text)
        config_path = fh.name
    argv = [command]
    if what:
        argv.append(what)
    argv += ["--config", config_path, "--out", out_dir]
    code = main(argv)
    os.unlink(config_path)
    # metadata is timestamped and the checkpoint is binary; the figure
    # pipeline consumes neither
    for name_ in ("metadata.json", "final.chk"):
        extra = os.path.join(out_dir, name_)
        if os.path.exists(extra):
            os.unlink(extra)
    print(f"{name}: exit {code}")
    return code


if __name__ == "__main__":
    os.makedirs(FIXTURES, exist_ok=True)
    worst = 0
    for command, what, text, name in JOBS:
        worst = max(worst, run_job(command, what, text, name))
    sys.exit(worst)
