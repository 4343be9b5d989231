"""Acceptance suite: every criterion at its stated tolerance, one line each.

The underlying theory is existential in its constants, so acceptance is
property-based: conservation, monotonicity, convergence orders, exact-solution
oracles, absorption, scaling of differences, fitted exponents, and estimator
sanity at desk scales.
"""

import math
import time

import numpy as np
import pytest

from modelh.attractor import (
    AbsorbingBall,
    DiscreteProcess,
    choose_tau0,
    embed_states,
    fractal_dimension,
    holder_continuity,
    pullback_attraction,
    synthetic_segment,
    synthetic_torus,
)
from modelh.forcing import ForcingSymbol, holder_target_exponent, solenoidal_profile
from modelh.potential import PolynomialPotential, double_well, validate_hypotheses
from modelh.rng import substream
from modelh.spectral import Grid, SpectralScalar, SpectralVector, State, norm, random_state
from modelh.stepper import (
    SolverParams,
    calibrate_stabilization,
    compute_mu,
    energy_report,
    run,
    step,
    taylor_green,
)
from modelh.verify import (
    BallSampler,
    continuous_dependence,
    data_set,
    dissipative_check,
    h1_continuous_dependence,
    higher_regularity_probe,
    smoothing_constant,
    time_regularity,
)

CANONICAL = double_well(1)
CONVEX = PolynomialPotential((0.0, 0.0, 0.0, 0.0, 1.0))


def report(number, name, ok, detail=""):
    tag = "PASS" if ok else "FAIL"
    print(f"[{tag}] criterion {number}: {name}" + (f" ({detail})" if detail else ""))
    assert ok, f"criterion {number} failed: {detail}"


def quasi_periodic(grid, amplitude=0.2):
    profile = solenoidal_profile(grid, [(1, 2), (2, -1)], l2_norm=amplitude)
    return ForcingSymbol("quasi_periodic", profile,
                         frequencies=(1.0, math.sqrt(2.0)), amplitudes=(1.0, 0.7))


def monitored_run(state, params, potential, symbol, n_steps, snapshot_every=100):
    """Single pass: per-step energies, exact invariants, observer snapshots."""
    totals = np.empty(n_steps + 1)
    rep = energy_report(state, params, potential, symbol)
    totals[0] = rep.total
    mass0 = state.order_parameter.coeffs[0, 0].real
    max_mass_drift = 0.0
    max_momentum = 0.0
    snapshots = [state]
    for n in range(n_steps):
        state = step(state, params, potential, symbol, check_energy=False)
        totals[n + 1] = energy_report(state, params, potential, symbol).total
        max_mass_drift = max(max_mass_drift,
                             abs(state.order_parameter.coeffs[0, 0].real - mass0))
        max_momentum = max(max_momentum,
                           abs(state.velocity.x.coeffs[0, 0].real),
                           abs(state.velocity.y.coeffs[0, 0].real))
        if (n + 1) % snapshot_every == 0:
            snapshots.append(state)
    return state, totals, max_mass_drift, max_momentum, snapshots


def lean_conservation_run(state, params, potential, symbol, n_steps, snapshot_every=100):
    """Stepping without energy computation; tracks the exact invariants."""
    mass0 = state.order_parameter.coeffs[0, 0].real
    max_mass_drift = 0.0
    max_momentum = 0.0
    snapshots = [state]
    for n in range(n_steps):
        state = step(state, params, potential, symbol, check_energy=False)
        max_mass_drift = max(max_mass_drift,
                             abs(state.order_parameter.coeffs[0, 0].real - mass0))
        max_momentum = max(max_momentum,
                           abs(state.velocity.x.coeffs[0, 0].real),
                           abs(state.velocity.y.coeffs[0, 0].real))
        if (n + 1) % snapshot_every == 0:
            snapshots.append(state)
    return state, max_mass_drift, max_momentum, snapshots


_SNAPSHOT_REGISTRY: dict = {}


@pytest.fixture(scope="module")
def conservation_run():
    grid = Grid(64)
    symbol = quasi_periodic(grid)
    z0 = random_state(grid, substream(1), amplitude=1.0, mean_psi=0.3, decay=2.0)
    S = calibrate_stabilization(z0, CANONICAL, 1.5)
    params = SolverParams(nu=1.0, dt=1e-3, stabilization=S)
    t0 = time.monotonic()
    final, drift, momentum, snaps = lean_conservation_run(
        z0, params, CANONICAL, symbol, 10_000, snapshot_every=200)
    elapsed = time.monotonic() - t0
    _SNAPSHOT_REGISTRY["conservation"] = snaps
    return grid, drift, momentum, elapsed


@pytest.fixture(scope="module")
def lyapunov_run():
    grid = Grid(32)
    z0 = random_state(grid, substream(3), amplitude=1.0, decay=2.0)
    S = calibrate_stabilization(z0, CANONICAL, 1.0)
    params = SolverParams(nu=1.0, dt=1e-3, stabilization=S)
    _, totals, _, _, snaps = monitored_run(z0, params, CANONICAL,
                                           ForcingSymbol.zero(), 10_000,
                                           snapshot_every=200)
    _SNAPSHOT_REGISTRY["lyapunov"] = snaps
    return totals


@pytest.fixture(scope="module")
def smooth_reference():
    grid = Grid(32)
    xx, _ = grid.meshgrid()
    z = State(taylor_green(grid, 0.5),
              SpectralScalar.from_physical(grid, 0.1 * np.cos(xx)))
    symbol = quasi_periodic(grid, amplitude=0.05)
    return grid, z, symbol


def test_criterion_1_exact_conservation(conservation_run):
    grid, drift, momentum, elapsed = conservation_run
    mean_drift = drift / grid.area
    ok = mean_drift <= 1e-13 and momentum <= 1e-12 and elapsed <= 60.0
    report(1, "exact conservation over 10^4 steps at n=64",
           ok, f"mean drift {mean_drift:.2e}, momentum {momentum:.2e}, "
               f"runtime {elapsed:.1f}s")


def test_criterion_2_lyapunov_decay(lyapunov_run):
    totals = lyapunov_run
    increases = np.diff(totals)
    worst = float(np.max(increases))
    report(2, "unforced energy decay every step (10^4 steps)",
           worst <= 1e-10, f"worst per-step increase {worst:.2e}")


def test_criterion_3_residual_halving(smooth_reference):
    grid, z, symbol = smooth_reference
    maxres = {}
    for dt in (4e-3, 2e-3, 1e-3):
        params = SolverParams(nu=1.0, dt=dt, stabilization=4.0)
        reports, final = run(z, params, CANONICAL, symbol, z.time + 0.4)
        maxres[dt] = float(np.max(np.abs([r.residual for r in reports[:-1]])))
        if dt == 1e-3:
            _SNAPSHOT_REGISTRY.setdefault("reference", []).append(final)
    r1 = maxres[2e-3] / maxres[4e-3]
    r2 = maxres[1e-3] / maxres[2e-3]
    ok = 0.4 <= r1 <= 0.6 and 0.4 <= r2 <= 0.6
    report(3, "energy-identity residual halves with dt",
           ok, f"ratios {r1:.3f}, {r2:.3f}")


def test_criterion_4_exact_solution_oracles():
    grid = Grid(32)
    nu, dt = 1.0, 1e-3
    z = State(taylor_green(grid), SpectralScalar.constant(grid, 0.0))
    params = SolverParams(nu=nu, dt=dt, stabilization=2.0)
    reports, final = run(z, params, CANONICAL, ForcingSymbol.zero(), 0.5,
                         observe_every=50)
    u0 = norm(z.velocity, "L2")
    worst = 0.0
    for rep in reports[1:]:
        t = rep.t
        measured = math.sqrt(2.0 * rep.kinetic)
        expected = u0 * math.exp(-2.0 * nu * t)
        rel = abs(measured - expected) / expected
        worst = max(worst, rel / (3.0 * dt * t))
    _SNAPSHOT_REGISTRY["taylor_green"] = [final]
    tg_ok = worst <= 1.0

    a = 1e-6
    xx, _ = grid.meshgrid()
    z_ch = State(SpectralVector.zero(grid),
                 SpectralScalar.from_physical(grid, a * np.sin(xx)))
    out = step(z_ch, SolverParams(nu=nu, dt=dt, stabilization=0.0), CANONICAL,
               ForcingSymbol.zero(), check_energy=False)
    sigma = (abs(out.order_parameter.coeffs[1, 0])
             / abs(z_ch.order_parameter.coeffs[1, 0]) - 1.0) / dt
    ch_ok = abs(sigma - 3.0) / 3.0 <= 0.05
    report(4, "Taylor-Green decay and linear phase-separation rate",
           tg_ok and ch_ok,
           f"TG rel err <= {worst:.2f} * budget, sigma = {sigma:.4f} vs 3")


def test_criterion_5_pointwise_inequality(conservation_run, lyapunov_run):
    alpha = CANONICAL.splitting.alpha
    checked = 0
    violations = 0
    for name, states in _SNAPSHOT_REGISTRY.items():
        for state in states:
            psi = state.order_parameter
            mu = compute_mu(psi, CANONICAL)
            lhs = norm(psi, "H2_semi") ** 2
            rhs = (norm(mu, "H1_semi") * norm(psi, "H1_semi")
                   + 2.0 * alpha * norm(psi, "H1_semi") ** 2)
            checked += 1
            if lhs > rhs * (1.0 + 1e-12):
                violations += 1
    report(5, "chemical-potential interpolation inequality at observer steps",
           checked > 100 and violations == 0,
           f"{checked} states checked, {violations} violations")


def test_criterion_6_dissipativity_absorption():
    t0 = time.monotonic()
    grid = Grid(32)
    symbol = quasi_periodic(grid)
    small = data_set(grid, 21, 1, amplitude=1.0, decay=3.0)
    large = [z * 10.0 for z in small]
    S = calibrate_stabilization(large[0], CANONICAL, 1.2)
    params = SolverParams(nu=1.0, dt=1e-3, stabilization=S)
    probe = higher_regularity_probe(params, CANONICAL, symbol,
                                    {"small": small, "large": large},
                                    horizon=14.0, tail_span=5.0, observe_every=20)
    absorb = dissipative_check(params, CANONICAL, symbol, small + large, horizon=14.0)
    elapsed = time.monotonic() - t0
    ok = (probe.verdicts["tail_sup_data_independent"]
          and absorb.verdicts["absorbed_0"] and absorb.verdicts["absorbed_1"]
          and elapsed <= 300.0)
    report(6, "common-ball absorption for |D| and 10|D|",
           ok, f"tail-sup spread {probe.constants['tail_sup_spread']:.2e}, "
               f"runtime {elapsed:.0f}s")


def test_criterion_7_continuous_dependence():
    grid = Grid(16)
    symbol = quasi_periodic(grid)
    params = SolverParams(nu=1.0, dt=2e-3, stabilization=4.0)
    z1 = random_state(grid, substream(3), amplitude=1.0)
    rec_same = continuous_dependence(params, CANONICAL, symbol, symbol, z1, z1,
                                     horizon=1.0)
    sampler = BallSampler(grid, CANONICAL, radius=10.0, seed=5)
    z2 = z1 + sampler.perturbation(0, 1e-6)
    rec_h0 = continuous_dependence(params, CANONICAL, symbol, symbol, z1, z2,
                                   horizon=2.0)
    rec_v = h1_continuous_dependence(params, CANONICAL, symbol, symbol, z1, z2,
                                     horizon=2.0)
    ok = (rec_same.verdicts["uniqueness"]
          and rec_h0.verdicts["linear_response"]
          and rec_h0.constants["scaling_ratio_max_err"] <= 0.10
          and rec_h0.verdicts["rate_finite"] and rec_v.verdicts["rate_finite"])
    report(7, "uniqueness, linear response, finite Gronwall rates",
           ok, f"scaling error {rec_h0.constants['scaling_ratio_max_err']:.2e}, "
               f"Lambda_H0 {rec_h0.constants['Lambda_hat']:.2f}, "
               f"Lambda_V {rec_v.constants['Lambda_hat']:.2f}")


def test_criterion_8_time_regularity_and_smoothing():
    grid = Grid(16)
    symbol = quasi_periodic(grid)
    z0 = random_state(grid, substream(11), amplitude=1.0,
                      velocity_fraction=0.6, decay=6.0)
    rec_t = time_regularity(SolverParams(nu=1.0, dt=5e-4, stabilization=4.0),
                            CANONICAL, symbol, z0,
                            gaps=[0.1, 0.05, 0.024, 0.012, 0.006, 0.003])
    theta = rec_t.constants["theta_hat"]

    grid32 = Grid(32)
    sampler = BallSampler(grid32, CANONICAL, radius=8.0, seed=3)
    rec_s = smoothing_constant(SolverParams(nu=1.0, dt=2e-3, stabilization=4.0),
                               CANONICAL, quasi_periodic(grid32), sampler,
                               tau0=1.0, pair_count=3)
    ok = (theta >= 0.45
          and rec_s.verdicts["K_finite"]
          and rec_s.verdicts["K_stable_under_doubling"]
          and -0.7 <= rec_s.constants["gain_exponent"] <= -0.3)
    report(8, "time regularity and smoothing gain",
           ok, f"theta {theta:.3f}, K {rec_s.constants['K_hat']:.3f}, "
               f"gain exponent {rec_s.constants['gain_exponent']:.3f}")


def test_criterion_9_pullback_attraction():
    t0 = time.monotonic()
    grid = Grid(16)
    profile = solenoidal_profile(grid, [(1, 2), (2, -1)], l2_norm=0.3)
    symbol = ForcingSymbol("past_decaying", profile, decay_rate=0.5, switch_time=0.0)
    params = SolverParams(nu=0.25, dt=5e-3, stabilization=6.0)
    background = State(SpectralVector.zero(grid), SpectralScalar.constant(grid, 0.8))
    initials = [z + background for z in data_set(grid, 31, 2, amplitude=0.5, decay=3.0)]
    tau0, ball = choose_tau0(params, CANONICAL, symbol, initials, horizon=10.0)
    process = DiscreteProcess(grid, params, CANONICAL, symbol, tau0)
    sampler = BallSampler(grid, CANONICAL, ball.radius, seed=8, mean_psi=0.8,
                          velocity_fraction=0.6, decay=3.0)
    rec = pullback_attraction(process, ball, sample_count=5,
                              ladder=(1, 2, 3, 4, 5, 6, 7, 8), seed=8,
                              sampler=sampler)
    elapsed = time.monotonic() - t0
    fit = rec.fits["attraction"]
    ok = (rec.constants["alpha_hat"] > 0 and fit.r2 >= 0.9 and elapsed <= 600.0)
    report(9, "pullback exponential attraction on the n=16 truncation",
           ok, f"alpha {rec.constants['alpha_hat']:.3f}, R2 {fit.r2:.4f}, "
               f"tau0 {tau0:.3g}, runtime {elapsed:.0f}s")


def test_criterion_10_holder_assumptions():
    grid = Grid(16)
    symbol = quasi_periodic(grid)
    params = SolverParams(nu=1.0, dt=1.0 / 256.0, stabilization=4.0)
    process = DiscreteProcess(grid, params, CANONICAL, symbol, tau0=1.0)
    ladder = [0.5, 0.25, 0.125, 0.0625]
    target = holder_target_exponent(4.0)
    gammas = {}
    for mode in ("H1prime", "H3prime"):
        rec = holder_continuity(process, AbsorbingBall(radius=5.0), ladder,
                                mode=mode, q=4.0, sample_count=2, seed=12)
        gammas[mode] = rec.constants.get("gamma_hat", math.inf)
        assert rec.verdicts["holder_exponent"]
    ok = all(g >= target - 0.05 for g in gammas.values())
    report(10, "forcing-shift and endpoint-shift continuity at q=4",
           ok, f"gamma H1' {gammas['H1prime']:.3f}, H3' {gammas['H3prime']:.3f}, "
               f"target {target:.3f}")


def test_criterion_11_dimension_estimator():
    seg = fractal_dimension(synthetic_segment(1500, seed=1))
    tor = fractal_dimension(synthetic_torus(2000, seed=2))

    grid = Grid(16)
    params = SolverParams(nu=0.5, dt=4e-3, stabilization=1.0)
    process = DiscreteProcess(grid, params, CONVEX, ForcingSymbol.zero(), tau0=1.0)
    sampler = BallSampler(grid, CONVEX, 3.0, seed=7, velocity_fraction=0.9, decay=3.0)
    states = [process.evaluate(sampler.draw(i), -12, 0) for i in range(24)]
    cloud = embed_states(states, n_eff=16)
    collapsed = fractal_dimension(cloud, epsilons=np.geomspace(1.0, 1e-2, 6))
    ok = (abs(seg.slope - 1.0) <= 0.15
          and abs(tor.slope - 2.0) <= 0.25
          and collapsed.slope == 0.0)
    report(11, "dimension estimator sanity (segment, torus, collapse)",
           ok, f"segment {seg.slope:.3f}, torus {tor.slope:.3f}, "
               f"collapse {collapsed.slope:.3f}")


def test_criterion_12_potential_certification():
    rep1 = validate_hypotheses(double_well(1), radius=10.0, samples=10_000)
    split1 = double_well(1).splitting
    rep5 = validate_hypotheses(double_well(2), radius=10.0, samples=10_000)
    ok = (rep1.ok and split1.alpha == pytest.approx(2.0) and split1.gamma == 0.0
          and split1.beta == 1.0 and rep1.growth_exponent == 1
          and all(math.isfinite(c) for c in rep1.control_constants)
          and rep5.ok and rep5.growth_exponent == 5
          and all(math.isfinite(c) for c in rep5.control_constants))
    report(12, "potential certification at p=1 and p=5",
           ok, f"alpha {split1.alpha}, c_k max {max(rep1.control_constants):.3g} / "
               f"{max(rep5.control_constants):.3g}")
