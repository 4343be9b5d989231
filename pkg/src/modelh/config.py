"""Experiment configuration: TOML ingestion with field-level diagnostics,
canonical digests, and builders for grids, potentials, symbols and data."""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field

try:
    import tomllib
except ModuleNotFoundError:          # Python 3.10
    import tomli as tomllib

from modelh.forcing import ForcingSymbol, solenoidal_profile
from modelh.potential import PolynomialPotential, double_well
from modelh.rng import substream
from modelh.spectral import Grid, SpectralScalar, SpectralVector, State, random_state, read_checkpoint
from modelh.stepper import SolverParams, calibrate_stabilization, taylor_green

EXPERIMENT_KINDS = (
    "simulate",
    "dissipative",
    "continuous-dependence",
    "h1-continuous-dependence",
    "time-regularity",
    "smoothing",
    "higher-regularity",
    "pullback",
    "dimension",
    "holder",
    "validate-potential",
)


class ConfigError(ValueError):
    def __init__(self, field_name: str, message: str):
        super().__init__(f"config field [{field_name}]: {message}")
        self.field_name = field_name


def _get(table: dict, section: str, key: str, kind, default=None, required=False):
    if key not in table:
        if required:
            raise ConfigError(f"{section}.{key}", "missing required key")
        return default
    value = table[key]
    if kind is float and isinstance(value, int):
        value = float(value)
    if not isinstance(value, kind):
        raise ConfigError(f"{section}.{key}",
                          f"expected {kind.__name__}, got {type(value).__name__}")
    return value


@dataclass
class ExperimentConfig:
    raw: dict
    grid: Grid
    params_spec: dict
    potential: PolynomialPotential
    symbol: ForcingSymbol
    experiment: dict = field(default_factory=dict)
    initial: dict = field(default_factory=dict)
    seed: int = 0
    digest: str = ""

    def solver_params(self, stabilization: float) -> SolverParams:
        spec = self.params_spec
        return SolverParams(
            nu=spec["nu"], dt=spec["dt"], mobility=spec["mobility"],
            interface=spec["interface"], stabilization=stabilization,
            max_energy_violation=spec["max_energy_violation"],
        )

    def resolve_stabilization(self, state: State) -> float:
        spec = self.params_spec["stabilization"]
        if isinstance(spec, str):
            return calibrate_stabilization(state, self.potential,
                                           self.params_spec["margin"])
        return float(spec)


def config_digest(raw: dict) -> str:
    canonical = json.dumps(raw, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:16]


def parse_config(raw: dict) -> ExperimentConfig:
    grid_tbl = raw.get("grid", {})
    try:
        grid = Grid(
            _get(grid_tbl, "grid", "n_modes", int, required=True),
            _get(grid_tbl, "grid", "length", float, 2.0 * math.pi),
            _get(grid_tbl, "grid", "dealias_fraction", float, 2.0 / 3.0),
        )
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError("grid", str(exc)) from exc

    params_tbl = raw.get("params", {})
    stabilization = params_tbl.get("stabilization", "auto")
    if not isinstance(stabilization, (str, int, float)):
        raise ConfigError("params.stabilization", "must be 'auto' or a number")
    if isinstance(stabilization, str) and stabilization != "auto":
        raise ConfigError("params.stabilization", f"unknown setting {stabilization!r}")
    params_spec = {
        "nu": _get(params_tbl, "params", "nu", float, required=True),
        "dt": _get(params_tbl, "params", "dt", float, required=True),
        "mobility": _get(params_tbl, "params", "mobility", float, 1.0),
        "interface": _get(params_tbl, "params", "interface", float, 1.0),
        "stabilization": stabilization if isinstance(stabilization, str)
        else float(stabilization),
        "margin": _get(params_tbl, "params", "margin", float, 1.0),
        "max_energy_violation": _get(params_tbl, "params", "max_energy_violation",
                                     float, 1e-10),
    }
    for key in ("nu", "dt", "mobility", "interface"):
        if params_spec[key] <= 0:
            raise ConfigError(f"params.{key}", "must be positive")

    potential = build_potential(raw.get("potential", {}))
    symbol = build_symbol(raw.get("forcing", {"kind": "zero"}), grid)
    experiment = dict(raw.get("experiment", {}))
    kind = experiment.get("kind")
    if kind not in EXPERIMENT_KINDS:
        raise ConfigError("experiment.kind",
                          f"must be one of {', '.join(EXPERIMENT_KINDS)}; got {kind!r}")
    seed = _get(experiment, "experiment", "seed", int, 0)
    initial = dict(raw.get("initial", {"kind": "random", "amplitude": 1.0}))
    return ExperimentConfig(raw, grid, params_spec, potential, symbol,
                            experiment, initial, seed, config_digest(raw))


def load_config(path) -> ExperimentConfig:
    with open(path, "rb") as fh:
        try:
            raw = tomllib.load(fh)
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError("<file>", f"not valid TOML: {exc}") from exc
    return parse_config(raw)


def build_potential(table: dict) -> PolynomialPotential:
    if "coefficients" in table:
        coeffs = table["coefficients"]
        if not isinstance(coeffs, list) or not all(
                isinstance(c, (int, float)) for c in coeffs):
            raise ConfigError("potential.coefficients", "must be a list of numbers")
        try:
            return PolynomialPotential(tuple(float(c) for c in coeffs))
        except ValueError as exc:
            raise ConfigError("potential.coefficients", str(exc)) from exc
    family = table.get("family", "double_well")
    if family != "double_well":
        raise ConfigError("potential.family", f"unknown family {family!r}")
    m = _get(table, "potential", "m", int, 1)
    if m < 1:
        raise ConfigError("potential.m", "must be a positive integer")
    return double_well(m)


def build_symbol(table: dict, grid: Grid) -> ForcingSymbol:
    kind = table.get("kind", "zero")
    if kind == "zero":
        return ForcingSymbol.zero()
    modes = table.get("modes", [[1, 2], [2, -1]])
    if not isinstance(modes, list) or not all(
            isinstance(m, list) and len(m) == 2 for m in modes):
        raise ConfigError("forcing.modes", "must be a list of [j1, j2] pairs")
    amplitude = _get(table, "forcing", "amplitude", float, 0.1)
    try:
        profile = solenoidal_profile(grid, [tuple(m) for m in modes],
                                     l2_norm=amplitude)
        return ForcingSymbol(
            kind, profile,
            frequencies=tuple(table.get("frequencies", (1.0, math.sqrt(2.0)))),
            amplitudes=tuple(table.get("signal_amplitudes", ())),
            phases=tuple(table.get("phases", ())),
            decay_rate=_get(table, "forcing", "decay_rate", float, 1.0),
            switch_time=_get(table, "forcing", "switch_time", float, 0.0),
        )
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError("forcing", str(exc)) from exc


def build_initial(config: ExperimentConfig, job_index: int = 0) -> State:
    table = config.initial
    kind = table.get("kind", "random")
    grid = config.grid
    if kind == "zero":
        return State(SpectralVector.zero(grid), SpectralScalar.constant(grid, 0.0))
    if kind == "taylor_green":
        amplitude = _get(table, "initial", "amplitude", float, 1.0)
        return State(taylor_green(grid, amplitude), SpectralScalar.constant(grid, 0.0))
    if kind == "random":
        rng = substream(config.seed, job_index)
        return random_state(
            grid, rng,
            amplitude=_get(table, "initial", "amplitude", float, 1.0),
            velocity_fraction=_get(table, "initial", "velocity_fraction", float, 0.5),
            decay=_get(table, "initial", "decay", float, 2.0),
            mean_psi=_get(table, "initial", "mean_psi", float, 0.0),
        )
    if kind == "checkpoint":
        path = _get(table, "initial", "path", str, required=True)
        state, _ = read_checkpoint(path)
        if state.grid != grid:
            raise ConfigError("initial.path", "checkpoint grid does not match config")
        return state
    raise ConfigError("initial.kind", f"unknown kind {kind!r}")
