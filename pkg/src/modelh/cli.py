"""Command-line orchestration: configuration ingestion, experiment dispatch,
persistence, and report emission.

Exit codes: 0 all verdicts pass, 1 verdict failure, 2 invalid configuration,
3 runtime failure (blow-up or rejected step).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

import numpy as np

from modelh import attractor as atr
from modelh import verify as vfy
from modelh.config import ConfigError, ExperimentConfig, build_initial, load_config
from modelh.forcing import uloc_bound
from modelh.potential import validate_hypotheses
from modelh.records import ExperimentRecord
from modelh.spectral import write_checkpoint
from modelh.stepper import (
    BlowUpError,
    EnergyViolationError,
    run,
    write_trajectory_csv,
)

EXIT_PASS = 0
EXIT_VERDICT = 1
EXIT_CONFIG = 2
EXIT_RUNTIME = 3


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="modelh",
        description="Two-phase model H lab: simulation, estimate verification, "
                    "attractor experiments",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, help_text, extra=None):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="TOML experiment configuration")
        p.add_argument("--out", default="out", help="output directory")
        p.add_argument("--threads", type=int, default=1, help="parallel jobs")
        p.add_argument("--dry-run", action="store_true",
                       help="print the resolved config digest and exit")
        p.add_argument("--seed-override", type=int, default=None)
        if extra:
            extra(p)
        return p

    add("simulate", "integrate one trajectory, write CSV log and checkpoints")
    add("verify", "run a verification experiment",
        lambda p: p.add_argument("what", choices=[
            "dissipative", "continuous-dependence", "h1-continuous-dependence",
            "time-regularity", "smoothing", "higher-regularity"]))
    add("pullback", "pullback attraction experiment")
    add("dimension", "fractal dimension estimate of a point cloud")
    add("holder", "time-shift continuity experiment")
    add("validate-potential", "certify the configured potential")
    return parser


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        config = load_config(args.config)
    except (ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.seed_override is not None:
        config.seed = args.seed_override
        config.raw.setdefault("experiment", {})["seed"] = args.seed_override
        from modelh.config import config_digest

        config.digest = config_digest(config.raw)
    if args.dry_run:
        print(config.digest)
        return EXIT_PASS
    kind = config.experiment.get("kind")
    command = args.command if args.command != "verify" else args.what
    if kind != command:
        print(f"error: config declares experiment kind {kind!r} but the "
              f"{command!r} command was invoked", file=sys.stderr)
        return EXIT_CONFIG
    os.makedirs(args.out, exist_ok=True)
    started = time.time()
    try:
        record = _dispatch(command, config, args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (BlowUpError, EnergyViolationError, RuntimeError) as exc:
        print(f"runtime failure: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    _write_metadata(args.out, config, started)
    if record is not None:
        record.config_digest = config.digest
        record.write(args.out)
        for name, ok in sorted(record.verdicts.items()):
            print(f"{'PASS' if ok else 'FAIL'} {name}")
        if not record.passed:
            return EXIT_VERDICT
    return EXIT_PASS


def entrypoint() -> None:
    raise SystemExit(main())


def _write_metadata(out_dir: str, config: ExperimentConfig, started: float) -> None:
    # timestamps live only here so every other artifact is byte-reproducible
    meta = {
        "digest": config.digest,
        "started_unix": started,
        "finished_unix": time.time(),
        "experiment": config.experiment.get("kind"),
        "seed": config.seed,
    }
    with open(os.path.join(out_dir, "metadata.json"), "w", encoding="ascii") as fh:
        json.dump(meta, fh, indent=1, sort_keys=True)


def _knob(config: ExperimentConfig, key: str, default):
    return config.experiment.get(key, default)


def _dispatch(command: str, config: ExperimentConfig, args) -> ExperimentRecord | None:
    if command == "validate-potential":
        return _run_validate_potential(config)
    if command == "simulate":
        return _run_simulate(config, args.out)
    if command == "dissipative":
        return _run_dissipative(config, args.threads)
    if command in ("continuous-dependence", "h1-continuous-dependence"):
        return _run_continuous_dependence(config, command)
    if command == "time-regularity":
        return _run_time_regularity(config)
    if command == "smoothing":
        return _run_smoothing(config)
    if command == "higher-regularity":
        return _run_higher_regularity(config)
    if command == "pullback":
        return _run_pullback(config, args.threads)
    if command == "dimension":
        return _run_dimension(config)
    if command == "holder":
        return _run_holder(config)
    raise ConfigError("experiment.kind", f"unhandled command {command}")


def _auto_params(config: ExperimentConfig, state):
    s_value = config.resolve_stabilization(state)
    return config.solver_params(s_value)


def _run_validate_potential(config: ExperimentConfig) -> ExperimentRecord:
    radius = _knob(config, "radius", 10.0)
    samples = _knob(config, "samples", 10_000)
    report = validate_hypotheses(config.potential, radius, samples)
    rec = ExperimentRecord("validate_potential", config.digest)
    split = config.potential.splitting
    rec.constants.update({
        "alpha": split.alpha, "gamma": split.gamma, "beta": split.beta,
        "growth_exponent": float(report.growth_exponent),
        "coercivity_constant": report.coercivity_constant,
    })
    for k, c in enumerate(report.control_constants):
        rec.constants[f"c_{k}"] = c
    rec.verdicts["hypotheses_certified"] = report.ok
    for text in report.violations:
        rec.note(text)
    if report.growth_exponent < 2:
        rec.note("growth exponent below 2: fourth derivative "
                 + ("globally bounded" if report.fourth_derivative_globally_bounded
                    else "unbounded")
                 + f"; range sup {report.fourth_derivative_range_sup:.6g}")
    return rec


def _run_simulate(config: ExperimentConfig, out_dir: str) -> ExperimentRecord:
    state = build_initial(config)
    params = _auto_params(config, state)
    t_end = state.time + _knob(config, "t_end", 10.0)
    observe = int(_knob(config, "observe_every", 10))
    reports, final = run(state, params, config.potential, config.symbol, t_end,
                         observe_every=observe, checkpoint_dir=out_dir)
    write_trajectory_csv(os.path.join(out_dir, "trajectory.csv"), reports)
    write_checkpoint(os.path.join(out_dir, "final.chk"), final,
                     {"nu": params.nu, "mobility": params.mobility,
                      "interface": params.interface},
                     config.potential.coefficients)
    rec = ExperimentRecord("simulate", config.digest)
    totals = np.array([r.total for r in reports])
    rec.constants["stabilization"] = params.stabilization
    rec.constants["final_energy"] = float(totals[-1])
    rec.constants["M_g"] = uloc_bound(config.symbol, final.time)
    if config.symbol.is_zero:
        rec.verdicts["energy_nonincreasing"] = bool(
            np.all(np.diff(totals) <= params.max_energy_violation))
    rec.verdicts["finished"] = True
    return rec


def _data_sets(config: ExperimentConfig):
    amplitudes = _knob(config, "data_amplitudes", [1.0])
    per_set = int(_knob(config, "trajectories_per_set", 1))
    table = config.initial
    sets = {}
    for amp in amplitudes:
        sets[f"amp_{amp:g}"] = [
            vfy.data_set(config.grid, config.seed, per_set, amplitude=float(amp),
                         velocity_fraction=table.get("velocity_fraction", 0.5),
                         decay=table.get("decay", 3.0))[i]
            for i in range(per_set)
        ]
    return sets


def _run_dissipative(config: ExperimentConfig, threads: int) -> ExperimentRecord:
    sets = _data_sets(config)
    initials = [z for group in sets.values() for z in group]
    params = _auto_params(config, initials[0] if initials else build_initial(config))
    horizon = _knob(config, "horizon", 12.0)
    return vfy.dissipative_check(params, config.potential, config.symbol, initials,
                                 horizon, int(_knob(config, "observe_every", 20)),
                                 threads=threads, digest=config.digest)


def _run_continuous_dependence(config: ExperimentConfig, command: str) -> ExperimentRecord:
    z1 = build_initial(config)
    params = _auto_params(config, z1)
    sampler = vfy.BallSampler(config.grid, config.potential,
                              radius=_knob(config, "ball_radius", 10.0),
                              interface=params.interface, seed=config.seed)
    size = _knob(config, "perturbation_size", 1e-6)
    z2 = z1 + sampler.perturbation(0, size)
    horizon = _knob(config, "horizon", 2.0)
    observe = int(_knob(config, "observe_every", 10))
    if command == "continuous-dependence":
        return vfy.continuous_dependence(params, config.potential, config.symbol,
                                         config.symbol, z1, z2, horizon, observe,
                                         digest=config.digest)
    return vfy.h1_continuous_dependence(params, config.potential, config.symbol,
                                        config.symbol, z1, z2, horizon, observe,
                                        data_scale=_knob(config, "data_scale", 2.0),
                                        digest=config.digest)


def _run_time_regularity(config: ExperimentConfig) -> ExperimentRecord:
    z0 = build_initial(config)
    params = _auto_params(config, z0)
    gaps = _knob(config, "gaps", [0.1, 0.05, 0.024, 0.012, 0.006, 0.003])
    return vfy.time_regularity(params, config.potential, config.symbol, z0,
                               gaps, digest=config.digest)


def _run_smoothing(config: ExperimentConfig) -> ExperimentRecord:
    base = build_initial(config)
    params = _auto_params(config, base)
    sampler = vfy.BallSampler(
        config.grid, config.potential,
        radius=_knob(config, "ball_radius", 8.0), interface=params.interface,
        seed=config.seed, mean_psi=config.initial.get("mean_psi", 0.0))
    return vfy.smoothing_constant(params, config.potential, config.symbol, sampler,
                                  tau0=_knob(config, "tau0", 1.0),
                                  pair_count=int(_knob(config, "pair_count", 4)),
                                  digest=config.digest)


def _run_higher_regularity(config: ExperimentConfig) -> ExperimentRecord:
    sets = _data_sets(config)
    any_state = next(iter(sets.values()))[0]
    params = _auto_params(config, any_state)
    return vfy.higher_regularity_probe(params, config.potential, config.symbol, sets,
                                       horizon=_knob(config, "horizon", 14.0),
                                       tail_span=_knob(config, "tail_span", 5.0),
                                       observe_every=int(_knob(config, "observe_every", 10)),
                                       digest=config.digest)


def _build_process(config: ExperimentConfig):
    base = build_initial(config)
    params = _auto_params(config, base)
    tau0 = _knob(config, "tau0", "auto")
    if tau0 == "auto":
        initials = [base]
        tau0, ball = atr.choose_tau0(params, config.potential, config.symbol, initials,
                                     horizon=_knob(config, "absorption_horizon", 10.0))
    else:
        tau0 = float(tau0)
        ball = atr.AbsorbingBall(_knob(config, "ball_radius", 8.0))
    process = atr.DiscreteProcess(config.grid, params, config.potential,
                                  config.symbol, tau0)
    return process, ball


def _run_pullback(config: ExperimentConfig, threads: int) -> ExperimentRecord:
    process, ball = _build_process(config)
    sampler = vfy.BallSampler(config.grid, config.potential, ball.radius,
                              interface=process.params.interface, seed=config.seed,
                              velocity_fraction=config.initial.get("velocity_fraction", 0.5),
                              decay=config.initial.get("decay", 2.0),
                              mean_psi=config.initial.get("mean_psi", 0.0))
    rec = atr.pullback_attraction(
        process, ball,
        sample_count=int(_knob(config, "sample_count", 8)),
        ladder=tuple(_knob(config, "ladder", [1, 2, 3, 4, 5, 6, 7, 8])),
        seed=config.seed, sampler=sampler, threads=threads, digest=config.digest)
    rec.constants["tau0"] = process.tau0
    rec.constants["ball_radius"] = ball.radius
    return rec


def _run_dimension(config: ExperimentConfig) -> ExperimentRecord:
    source = _knob(config, "source", "torus")
    count = int(_knob(config, "count", 2000))
    rec = ExperimentRecord("dimension", config.digest)
    if source == "segment":
        cloud = atr.synthetic_segment(count, seed=config.seed)
        expected = 1.0
        tolerance = 0.15
    elif source == "torus":
        cloud = atr.synthetic_torus(count, seed=config.seed)
        expected = 2.0
        tolerance = 0.25
    elif source == "collapse":
        process, ball = _build_process(config)
        sampler = vfy.BallSampler(config.grid, config.potential, ball.radius,
                                  interface=process.params.interface, seed=config.seed)
        depth = int(_knob(config, "depth", 6))
        states = [process.evaluate(sampler.draw(i), -depth, 0)
                  for i in range(int(_knob(config, "sample_count", 32)))]
        cloud = atr.embed_states(states, n_eff=int(_knob(config, "n_eff", 16)))
        expected = 0.0
        tolerance = 0.25
    else:
        raise ConfigError("experiment.source", f"unknown cloud source {source!r}")
    est = atr.fractal_dimension(cloud)
    rec.add_series("cover", epsilon=np.array(est.epsilons),
                   count=np.array(est.counts, dtype=float))
    rec.constants["dimension"] = est.slope
    rec.constants["box_dimension"] = est.box_slope
    rec.constants["expected"] = expected
    rec.verdicts["dimension_within_tolerance"] = abs(est.slope - expected) <= tolerance
    rec.verdicts["box_cross_check"] = abs(est.slope - est.box_slope) <= 0.5
    return rec


def _run_holder(config: ExperimentConfig) -> ExperimentRecord:
    process, ball = _build_process(config)
    rec = atr.holder_continuity(
        process, ball,
        s_ladder=_knob(config, "s_ladder", [0.5, 0.25, 0.125, 0.0625]),
        mode=_knob(config, "mode", "H1prime"),
        q=_knob(config, "q", 4.0),
        sample_count=int(_knob(config, "sample_count", 2)),
        seed=config.seed, digest=config.digest)
    rec.constants["tau0"] = process.tau0
    return rec


if __name__ == "__main__":
    entrypoint()
