"""Trajectory-level verification of the a priori estimates: dissipativity,
regularity gain, continuous dependence, time regularity, smoothing.

The estimates these experiments probe are existential in their constants, so
each operation measures the testable content (finiteness, sign, scaling,
exponents) and stores fitted empirical envelopes with diagnostics in an
ExperimentRecord.  Every pipeline is deterministic for a fixed seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from modelh.forcing import ForcingSymbol, uloc_bound
from modelh.potential import PolynomialPotential
from modelh.records import ExperimentRecord, fit_exponential, fit_powerlaw
from modelh.rng import substream
from modelh.spectral import (
    Grid,
    SpectralScalar,
    State,
    norm,
    random_scalar,
    random_solenoidal,
    random_state,
)
from modelh.stepper import SolverParams, compute_mu, run, step

LINEAR_REGIME_FACTOR = 1e-3
MIN_PAIR_SEPARATION = 1e-8


def run_recording(initial: State, params: SolverParams, potential: PolynomialPotential,
                  symbol: ForcingSymbol, horizon: float, observe_every: int = 10,
                  monitor_energy: bool = False):
    """Integrate while keeping state snapshots every `observe_every` steps."""
    n_steps = int(round(horizon / params.dt))
    state = initial
    times = [state.time]
    states = [state]
    for n in range(n_steps):
        state = step(state, params, potential, symbol, check_energy=monitor_energy)
        if (n + 1) % observe_every == 0:
            times.append(state.time)
            states.append(state)
    return np.array(times), states


def _paired_run(z1: State, z2: State, params: SolverParams, potential: PolynomialPotential,
                g1: ForcingSymbol, g2: ForcingSymbol, horizon: float,
                observe_every: int = 10):
    """Advance two trajectories in lockstep, recording difference norms."""
    n_steps = int(round(horizon / params.dt))
    times = [0.0]
    d_h0 = [norm(z1 - z2, "H0_pair")]
    d_v = [norm(z1 - z2, "V_pair")]
    ref = [norm(z1, "H0_pair")]
    a, b = z1, z2
    for n in range(n_steps):
        a = step(a, params, potential, g1, check_energy=False)
        b = step(b, params, potential, g2, check_energy=False)
        if (n + 1) % observe_every == 0:
            diff = a - b
            times.append(a.time - z1.time)
            d_h0.append(norm(diff, "H0_pair"))
            d_v.append(norm(diff, "V_pair"))
            ref.append(norm(a, "H0_pair"))
    return np.array(times), np.array(d_h0), np.array(d_v), np.array(ref)


def lyapunov_functional(report) -> float:
    """|u|^2 + |grad psi|^2 + 2 int F: twice the reported total energy at eps=1."""
    return 2.0 * report.total


# ---------------------------------------------------------------------------
# dissipativity and absorption


def dissipative_check(params: SolverParams, potential: PolynomialPotential,
                      symbol: ForcingSymbol, initials: list[State], horizon: float,
                      observe_every: int = 20, threads: int = 1,
                      digest: str = "") -> ExperimentRecord:
    """Exponential decay toward a forcing-limited energy level, and entry of
    every trajectory into a common absorbing ball in the V norm.

    Trajectories run as independent jobs; the record is a deterministic fold
    ordered by job index."""
    if horizon < 10:
        raise ValueError("dissipative check needs horizon >= 10")
    rec = ExperimentRecord("dissipative_check", digest)
    tail_sups = []
    entry_times = []

    def job(z0: State):
        return run(z0, params, potential, symbol, z0.time + horizon,
                   observe_every=observe_every, monitor_energy=False)

    if threads > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(job, initials))
    else:
        results = [job(z0) for z0 in initials]
    for i, (z0, (reports, _)) in enumerate(zip(initials, results)):
        t = np.array([r.t for r in reports])
        V = np.array([lyapunov_functional(r) for r in reports])
        W = np.array([r.norm_v + r.mu_l2 for r in reports])
        rec.add_series(f"energy_{i}", t=t, lyapunov=V, ball_size=W)
        tail = slice(int(0.75 * len(t)), None)
        B_hat = float(np.mean(V[tail]))
        rec.constants[f"B_hat_{i}"] = B_hat
        excess = V - B_hat
        peak = float(np.max(excess))
        if peak > 1e-10 * max(1.0, B_hat):
            decaying = np.sqrt(np.clip(excess, 0.0, None))
            fit = fit_exponential(t, decaying, floor=1e-6 * math.sqrt(peak))
            rec.fits[f"kappa_{i}"] = fit
            rec.constants[f"kappa_{i}"] = -fit.value
            rec.verdicts[f"decay_rate_positive_{i}"] = fit.finite() and fit.value < 0
        else:
            rec.note(f"trajectory {i}: stays at the energy floor, rate fit skipped")
            rec.verdicts[f"decay_rate_positive_{i}"] = True
        tail_sups.append(float(np.max(W[tail])))
        entry_times.append((t, W))
    radius = 1.05 * max(tail_sups)
    rec.constants["ball_radius"] = radius
    for i, (t, W) in enumerate(entry_times):
        outside = np.nonzero(W > radius)[0]
        T_entry = float(t[outside[-1] + 1] - t[0]) if outside.size else 0.0
        if outside.size and outside[-1] + 1 >= len(t):
            T_entry = math.inf
        rec.constants[f"entry_time_{i}"] = T_entry
        rec.verdicts[f"absorbed_{i}"] = T_entry <= 0.8 * horizon
    rec.constants["M_g"] = uloc_bound(symbol, initials[0].time + horizon)
    rec.note(f"forcing family {symbol.kind!r} is an artifact-shipped instance; "
             "the theory fixes only its window integrability")
    return rec


# ---------------------------------------------------------------------------
# continuous dependence


def _continuous_dependence(params, potential, g1, g2, z01, z02, horizon,
                           observe_every, which: str, digest: str) -> ExperimentRecord:
    kind = "continuous_dependence" if which == "H0_pair" else "h1_continuous_dependence"
    rec = ExperimentRecord(kind, digest)
    times, d_h0, d_v, ref = _paired_run(z01, z02, params, potential, g1, g2,
                                        horizon, observe_every)
    d = d_h0 if which == "H0_pair" else d_v
    rec.add_series("difference", t=times, d_h0=d_h0, d_v=d_v, reference=ref)
    scale = max(float(ref[0]), 1.0)
    same_inputs = (norm(z01 - z02, "H0_pair") == 0.0) and (
        g1 is g2 or (g1.is_zero and g2.is_zero))
    if same_inputs:
        rec.verdicts["uniqueness"] = bool(np.max(d_h0) <= 1e-12 * scale)
        rec.note("identical inputs: uniqueness check only")
        return rec

    floor = 1e-14 * scale
    fit = fit_exponential(times, d, floor=floor)
    rec.fits["growth_rate"] = fit
    rec.constants["Lambda_hat"] = fit.value
    rec.verdicts["rate_finite"] = fit.finite()
    if d[0] > 0.0:
        # early-window rate: the Jacobian regime the Gronwall exponent controls,
        # before dissipation-driven decorrelation
        i_star = max(1, len(times) // 4)
        rec.constants["Lambda_early"] = float(
            math.log(d[i_star] / d[0]) / times[i_star]) if d[i_star] > 0 else -math.inf

    d0 = float(d[0])
    if d0 > 0.0:
        # linear-response scaling: a halved perturbation halves the difference
        z02_half = z01 + (z02 - z01) * 0.5
        _, h_h0, h_v, _ = _paired_run(z01, z02_half, params, potential, g1, g2,
                                      horizon, observe_every)
        d_half = h_h0 if which == "H0_pair" else h_v
        linear = d_h0 <= LINEAR_REGIME_FACTOR * ref
        if not np.all(linear):
            rec.note("perturbation left the linear regime; scaling window shrunk")
        usable = linear & (d_half > floor)
        ratios = d[usable] / d_half[usable]
        rec.add_series("scaling", t=times[usable], ratio=ratios)
        rec.constants["scaling_ratio_max_err"] = float(np.max(np.abs(ratios - 2.0)) / 2.0)
        rec.verdicts["linear_response"] = bool(np.all(np.abs(ratios - 2.0) <= 0.2))
    else:
        # forcing-difference mode: d grows from zero under the Gronwall envelope
        delta_sq = []
        for t in times:
            gdiff = g1.sample_on(z01.grid, z01.time + t) - g2.sample_on(z01.grid, z01.time + t)
            delta_sq.append(norm(gdiff, "L2") ** 2)
        delta_sq = np.array(delta_sq)
        forcing_integral = np.concatenate(
            [[0.0], np.cumsum((delta_sq[1:] + delta_sq[:-1]) / 2.0 * np.diff(times))])
        grow = fit.value if fit.finite() else 0.0
        with np.errstate(divide="ignore", invalid="ignore"):
            envelope = np.exp(grow * times) * forcing_integral
            C = np.where(envelope > 0, d**2 / envelope, 0.0)
        rec.constants["C_gronwall"] = float(np.max(C))
        rec.verdicts["gronwall_envelope_finite"] = math.isfinite(float(np.max(C)))
        rec.add_series("forcing_difference", t=times, integral=forcing_integral)
    return rec


def continuous_dependence(params, potential, g1, g2, z01, z02, horizon,
                          observe_every: int = 10, digest: str = "") -> ExperimentRecord:
    """H0-distance between two solutions: Gronwall growth, linear response."""
    return _continuous_dependence(params, potential, g1, g2, z01, z02, horizon,
                                  observe_every, "H0_pair", digest)


def h1_continuous_dependence(params, potential, g1, g2, z01, z02, horizon,
                             observe_every: int = 10, data_scale: float = 2.0,
                             digest: str = "") -> ExperimentRecord:
    """V-distance version, plus monotonicity of the rate in the data size."""
    rec = _continuous_dependence(params, potential, g1, g2, z01, z02, horizon,
                                 observe_every, "V_pair", digest)
    if norm(z01 - z02, "H0_pair") == 0.0:
        return rec
    big1 = z01 * data_scale
    big2 = big1 + (z02 - z01)
    rec_big = _continuous_dependence(params, potential, g1, g2, big1, big2, horizon,
                                     observe_every, "V_pair", digest)
    rec.constants["Lambda_hat_scaled_data"] = rec_big.constants.get("Lambda_hat", math.nan)
    lam_small = rec.constants.get("Lambda_early", math.nan)
    lam_big = rec_big.constants.get("Lambda_early", math.nan)
    rec.constants["Lambda_early_scaled_data"] = lam_big
    rec.verdicts["exponent_monotone_in_data"] = (
        math.isfinite(lam_big) and math.isfinite(lam_small)
        and lam_big >= lam_small - 1e-9
    )
    rec.note("the chemical potential of truncated data is always square-integrable, "
             "so the strong-data precondition degenerates here")
    return rec


# ---------------------------------------------------------------------------
# time regularity and smoothing


def time_regularity(params, potential, symbol, z0: State, gaps, digest: str = "") -> ExperimentRecord:
    """Distance from the initial datum after short time spans: Holder fit."""
    gaps = np.sort(np.asarray(gaps, dtype=np.float64))[::-1]
    if np.any(np.diff(gaps) >= 0):
        raise ValueError("gaps must be strictly decreasing")
    dt = params.dt
    steps = [int(round(s / dt)) for s in gaps]
    if min(steps) < 1:
        raise ValueError("smallest gap is below the time step")
    rec = ExperimentRecord("time_regularity", digest)
    state = z0
    dists = {}
    for n in range(1, max(steps) + 1):
        state = step(state, params, potential, symbol, check_energy=False)
        if n in steps:
            dists[n] = norm(state - z0, "H0_pair")
    d = np.array([dists[k] for k in steps])
    s = gaps
    rec.add_series("gap_sweep", gap=s, distance=d)
    scale = 1.0 + norm(z0, "H0_pair")
    if np.max(d) <= 1e-12 * scale:
        rec.verdicts["holder_half"] = True
        rec.note("equilibrium datum: distances at machine zero, fit skipped")
        return rec
    fit = fit_powerlaw(s, d, floor=1e-14 * scale)
    rec.fits["holder_exponent"] = fit
    rec.constants["theta_hat"] = fit.value
    rec.verdicts["holder_half"] = fit.finite() and fit.value >= 0.45
    half_idx = np.argmin(np.abs(s - s[0] / 2.0))
    if s[half_idx] < s[0]:
        shrink = d[0] / d[half_idx] if d[half_idx] > 0 else math.inf
        rec.constants["largest_gap_shrink_factor"] = float(shrink)
        rec.verdicts["distance_monotone"] = shrink >= 1.3
    return rec


@dataclass(frozen=True)
class BallSampler:
    """Deterministic sampler of states inside {norm_V + |mu|_2 <= radius}.

    Draws fluctuations around a constant order-parameter background; only the
    fluctuation is contracted when a draw lands outside the ball."""

    grid: Grid
    potential: PolynomialPotential
    radius: float
    interface: float = 1.0
    seed: int = 0
    velocity_fraction: float = 0.5
    decay: float = 2.0
    mean_psi: float = 0.0

    def ball_size(self, z: State) -> float:
        mu = compute_mu(z.order_parameter, self.potential, self.interface)
        return norm(z, "V_pair") + norm(mu, "L2")

    def _with_background(self, fluctuation: State) -> State:
        if self.mean_psi == 0.0:
            return fluctuation
        background = SpectralScalar.constant(self.grid, self.mean_psi)
        return State(fluctuation.velocity, fluctuation.order_parameter + background,
                     fluctuation.time)

    def draw(self, index: int) -> State:
        rng = substream(self.seed, index)
        fluc = random_state(self.grid, rng, amplitude=1.0,
                            velocity_fraction=self.velocity_fraction, decay=self.decay)
        for _ in range(60):
            z = self._with_background(fluc)
            if self.ball_size(z) <= 0.9 * self.radius:
                return z
            fluc = fluc * 0.7
        raise RuntimeError("ball sampler failed to contract into the absorbing set")

    def perturbation(self, index: int, size: float, velocity_mass: float = 0.85,
                     decay: float = 0.5) -> State:
        """H0 perturbation, velocity-heavy and broad-spectrum by default."""
        rng = substream(self.seed ^ 0x5EED, index)
        u = random_solenoidal(self.grid, rng, amplitude=math.sqrt(velocity_mass), decay=decay)
        psi = random_scalar(self.grid, rng, amplitude=1.0, decay=decay)
        h1 = norm(psi, "H1_semi")
        psi = psi * (math.sqrt(1.0 - velocity_mass) / h1 if h1 > 0 else 0.0)
        return State(u, psi) * size


def smoothing_constant(params, potential, symbol, sampler: BallSampler, tau0: float,
                       pair_count: int, gain_ladder=None, digest: str = "") -> ExperimentRecord:
    """K_hat = sup over ball pairs of the V-distance of the images over the
    H0-distance of the data after a time span tau0, plus the short-time
    (t - tau)^(-1/2)-type gain fit."""
    rec = ExperimentRecord("smoothing_constant", digest)
    dt = params.dt
    spr = int(round(tau0 / dt))
    if spr < 1:
        raise ValueError("tau0 below the time step")
    perturbation_size = 1e-6 * max(sampler.radius, 1.0)
    ratios = []
    for i in range(2 * pair_count):
        v1 = sampler.draw(i)
        v2 = v1 + sampler.perturbation(i, perturbation_size)
        sep = norm(v1 - v2, "H0_pair")
        if sep < MIN_PAIR_SEPARATION:
            rec.note(f"pair {i} below the minimum separation, skipped")
            continue
        a = State(v1.velocity, v1.order_parameter, -tau0)
        b = State(v2.velocity, v2.order_parameter, -tau0)
        for _ in range(spr):
            a = step(a, params, potential, symbol, check_energy=False)
            b = step(b, params, potential, symbol, check_energy=False)
        ratios.append(norm(a - b, "V_pair") / sep)
    ratios = np.array(ratios)
    rec.add_series("pair_ratios", index=np.arange(len(ratios)), ratio=ratios)
    K_half = float(np.max(ratios[:pair_count]))
    K_full = float(np.max(ratios))
    rec.constants["K_hat"] = K_full
    rec.constants["K_hat_half_sample"] = K_half
    rec.verdicts["K_finite"] = math.isfinite(K_full)
    rec.verdicts["K_stable_under_doubling"] = abs(K_full - K_half) <= 0.2 * K_full

    if gain_ladder is None:
        gain_ladder = [s for s in (0.05, 0.1, 0.2, 0.4, 0.8) if s < tau0]
    gain_steps = sorted({max(1, int(round(s / dt))) for s in gain_ladder})
    v1 = sampler.draw(0)
    v2 = v1 + sampler.perturbation(0, perturbation_size)
    sep = norm(v1 - v2, "H0_pair")
    a = State(v1.velocity, v1.order_parameter, -tau0)
    b = State(v2.velocity, v2.order_parameter, -tau0)
    spans, gains = [], []
    for n in range(1, max(gain_steps) + 1):
        a = step(a, params, potential, symbol, check_energy=False)
        b = step(b, params, potential, symbol, check_energy=False)
        if n in gain_steps:
            spans.append(n * dt)
            gains.append(norm(a - b, "V_pair") / sep)
    fit = fit_powerlaw(np.array(spans), np.array(gains))
    rec.add_series("gain", span=np.array(spans), gain=np.array(gains))
    rec.fits["gain_exponent"] = fit
    rec.constants["gain_exponent"] = fit.value
    rec.verdicts["gain_exponent_near_half"] = fit.finite() and -0.7 <= fit.value <= -0.3
    return rec


def higher_regularity_probe(params, potential, symbol, data_sets: dict,
                            horizon: float, tail_span: float = 5.0,
                            observe_every: int = 10, digest: str = "") -> ExperimentRecord:
    """Tail bounds in the stronger norm: sup of norm_V + |mu|_2 over the tail
    window must not depend on the initial-data magnitude; the tail integrals
    of |lapl mu|^2 and |lapl u|^2 + |lapl^2 psi|^2 are reported."""
    rec = ExperimentRecord("higher_regularity_probe", digest)
    sups = {}
    for label, initials in data_sets.items():
        sup_W = 0.0
        int_mu = 0.0
        int_strong = 0.0
        for j, z0 in enumerate(initials):
            times, states = run_recording(z0, params, potential, symbol, horizon,
                                          observe_every)
            tail = times - times[0] >= horizon - tail_span
            W, mu2, strong = [], [], []
            for keep, state in zip(tail, states):
                if not keep:
                    continue
                mu = compute_mu(state.order_parameter, potential, params.interface)
                W.append(norm(state, "V_pair") + norm(mu, "L2"))
                mu2.append(norm(mu, "H2_semi") ** 2)
                strong.append(norm(state.velocity, "H2_semi") ** 2
                              + norm(state.order_parameter, "H4_semi") ** 2)
            tt = times[tail]
            sup_W = max(sup_W, float(np.max(W)))
            last = tt - tt[0] >= (tt[-1] - tt[0]) - 1.0
            int_mu = max(int_mu, float(np.trapezoid(np.array(mu2)[last], tt[last])))
            int_strong = max(int_strong, float(np.trapezoid(np.array(strong)[last], tt[last])))
            rec.add_series(f"tail_{label}_{j}", t=tt, ball_size=np.array(W),
                           lapl_mu_sq=np.array(mu2), strong_sq=np.array(strong))
        sups[label] = sup_W
        rec.constants[f"tail_sup_{label}"] = sup_W
        rec.constants[f"tail_integral_lapl_mu_{label}"] = int_mu
        rec.constants[f"tail_integral_strong_{label}"] = int_strong
        rec.verdicts[f"tail_integrals_finite_{label}"] = (
            math.isfinite(int_mu) and math.isfinite(int_strong))
    labels = sorted(sups)
    if len(labels) >= 2:
        hi = max(sups.values())
        lo = min(sups.values())
        rec.constants["tail_sup_spread"] = (hi - lo) / hi if hi > 0 else 0.0
        rec.verdicts["tail_sup_data_independent"] = hi - lo <= 0.15 * hi
    return rec


# ---------------------------------------------------------------------------
# initial data helpers shared by experiments and the CLI


def data_set(grid: Grid, seed: int, count: int, amplitude: float,
             velocity_fraction: float = 0.5, decay: float = 2.0) -> list[State]:
    return [
        random_state(grid, substream(seed, i), amplitude=amplitude,
                     velocity_fraction=velocity_fraction, decay=decay)
        for i in range(count)
    ]
