"""Semi-implicit, stabilized, energy-monitored time stepper for the model H
system in its spectral Galerkin truncation.

One step treats the fourth-order Cahn-Hilliard operator and the viscous term
implicitly (both diagonal per Fourier mode), the convective terms explicitly
through dealiased pseudo-spectral products, and adds the stabilization
S * (psi_new - psi_old) inside the transported chemical potential.  The
capillary force uses the same dealiasing as the order-parameter transport so
the energy transfer between the two equations cancels discretely.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from modelh.forcing import ForcingSymbol
from modelh.potential import PolynomialPotential
from modelh.spectral import (
    Grid,
    NonFiniteFieldError,
    SpectralScalar,
    SpectralVector,
    State,
    dealias_product,
    gradient,
    inner,
    leray_project,
    norm,
    write_checkpoint,
)

CSV_HEADER = ("t,E_kin,E_int,E_pot,E_total,diss_visc,diss_chem,power_in,"
              "residual,mass,mom_x,mom_y,norm_H0,norm_V,mu_L2")


class EnergyViolationError(RuntimeError):
    """Unforced step increased the Lyapunov energy beyond tolerance
    (stabilization or time step inadequate)."""

    def __init__(self, t: float, increase: float, tolerance: float):
        super().__init__(
            f"energy increased by {increase:.3e} > {tolerance:.1e} at t = {t:.6g}; "
            "raise the stabilization margin or shrink dt"
        )
        self.t = t
        self.increase = increase


class BlowUpError(RuntimeError):
    """A trajectory norm crossed the blow-up guard."""

    def __init__(self, t: float, value: float, checkpoint_path=None):
        msg = f"blow-up guard tripped at t = {t:.6g} (norm {value:.3e})"
        if checkpoint_path is not None:
            msg += f"; diagnostic checkpoint written to {checkpoint_path}"
        super().__init__(msg)
        self.t = t
        self.checkpoint_path = checkpoint_path


@dataclass(frozen=True)
class SolverParams:
    """Physical and numerical parameters of one trajectory."""

    nu: float
    dt: float
    mobility: float = 1.0
    interface: float = 1.0
    stabilization: float = 0.0
    max_energy_violation: float | None = 1e-10
    blowup_threshold: float = 1e12

    def __post_init__(self):
        for name in ("nu", "dt", "mobility", "interface"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.stabilization < 0:
            raise ValueError("stabilization must be nonnegative")


@dataclass(frozen=True)
class EnergyReport:
    """Per-step energy budget; total = kinetic + interface + bulk."""

    t: float
    kinetic: float
    interface_energy: float
    bulk: float
    total: float
    visc_dissipation: float
    chem_dissipation: float
    power_in: float
    residual: float
    mass: float
    momentum_x: float
    momentum_y: float
    norm_h0: float
    norm_v: float
    mu_l2: float


def _nonlinearity_hat(psi: SpectralScalar, potential: PolynomialPotential) -> SpectralScalar:
    """Dealiased transform of f(psi), f evaluated on the masked samples."""
    samples = psi.dealiased().to_physical()
    if not np.all(np.isfinite(samples)):
        raise NonFiniteFieldError("order parameter has non-finite samples")
    return SpectralScalar.from_physical(psi.grid, potential.f(samples)).dealiased()


def compute_mu(psi: SpectralScalar, potential: PolynomialPotential,
               interface: float = 1.0) -> SpectralScalar:
    """Chemical potential mu = -eps * lapl(psi) + f(psi) / eps (dealiased f)."""
    g = psi.grid
    f_hat = _nonlinearity_hat(psi, potential)
    coeffs = interface * g.k_sq * psi.coeffs + f_hat.coeffs / interface
    return SpectralScalar(g, coeffs)


def calibrate_stabilization(state: State, potential: PolynomialPotential,
                            margin: float = 1.0) -> float:
    """S = margin * max |f'| / 2 over the current samples inflated by 20%."""
    if margin < 1.0:
        raise ValueError("margin must be at least 1")
    samples = state.order_parameter.dealiased().to_physical()
    return margin * 0.5 * float(np.max(np.abs(potential.f_prime(1.2 * samples))))


def step(state: State, params: SolverParams, potential: PolynomialPotential,
         symbol: ForcingSymbol, *, check_energy: bool = True) -> State:
    """Advance one IMEX step; preserves the order-parameter mean and the
    zero momentum exactly (their k=0 updates vanish identically)."""
    g = state.grid
    u, psi = state.velocity, state.order_parameter
    dt = params.dt
    m, eps, s_stab = params.mobility, params.interface, params.stabilization
    energy_before = None
    if check_energy and symbol.is_zero and params.max_energy_violation is not None:
        energy_before = _total_energy(state, params, potential)

    # Cahn-Hilliard: diagonal implicit solve for psi_new
    conv_psi = dealias_product(u, gradient(psi), "dot").coeffs.copy()
    conv_psi[0, 0] = 0.0                      # transport of a mean-free quantity
    f_hat = _nonlinearity_hat(psi, potential).coeffs
    k_sq = g.k_sq
    denom = 1.0 / dt + m * k_sq * (eps * k_sq + s_stab)
    numer = psi.coeffs * (1.0 / dt + m * k_sq * s_stab) - conv_psi - (m * k_sq / eps) * f_hat
    psi_new_coeffs = numer / denom
    psi_new_coeffs[0, 0] = psi.coeffs[0, 0]   # exact mass conservation
    psi_new = SpectralScalar(g, psi_new_coeffs)

    # Navier-Stokes: explicit convection and capillary force, implicit viscosity
    mu_new = compute_mu(psi_new, potential, eps)
    adv = SpectralVector(
        dealias_product(u, gradient(u.x), "dot"),
        dealias_product(u, gradient(u.y), "dot"),
    )
    capillary = dealias_product(mu_new, gradient(psi_new), "scale_vector")
    rhs = capillary - adv
    g_field = symbol.sample_on(g, state.time)
    if not symbol.is_zero:
        rhs = rhs + g_field
    rhs = leray_project(rhs)
    visc = 1.0 / dt + params.nu * k_sq
    ux = (u.x.coeffs / dt + rhs.x.coeffs) / visc
    uy = (u.y.coeffs / dt + rhs.y.coeffs) / visc
    ux[0, 0] = 0.0
    uy[0, 0] = 0.0
    u_new = SpectralVector(SpectralScalar(g, ux), SpectralScalar(g, uy))

    new = State(u_new, psi_new, state.time + dt)
    size = norm(new, "H0_pair")
    if not math.isfinite(size) or size > params.blowup_threshold:
        raise BlowUpError(new.time, size)
    if energy_before is not None:
        increase = _total_energy(new, params, potential) - energy_before
        if increase > params.max_energy_violation:
            raise EnergyViolationError(new.time, increase, params.max_energy_violation)
    return new


def _bulk_energy(psi: SpectralScalar, potential: PolynomialPotential, interface: float) -> float:
    samples = psi.dealiased().to_physical()
    return float(np.sum(potential.eval(samples, 0))) * psi.grid.cell_area / interface


def _total_energy(state: State, params: SolverParams, potential: PolynomialPotential) -> float:
    kin = 0.5 * norm(state.velocity, "L2") ** 2
    interface = 0.5 * params.interface * norm(state.order_parameter, "H1_semi") ** 2
    return kin + interface + _bulk_energy(state.order_parameter, potential, params.interface)


def energy_report(state: State, params: SolverParams, potential: PolynomialPotential,
                  symbol: ForcingSymbol, residual: float = math.nan) -> EnergyReport:
    """Energy budget at the state's time, computed with the stepper's dealias rules."""
    g = state.grid
    u, psi = state.velocity, state.order_parameter
    kinetic = 0.5 * norm(u, "L2") ** 2
    interface_energy = 0.5 * params.interface * norm(psi, "H1_semi") ** 2
    bulk = _bulk_energy(psi, potential, params.interface)
    mu = compute_mu(psi, potential, params.interface)
    g_field = symbol.sample_on(g, state.time)
    return EnergyReport(
        t=state.time,
        kinetic=kinetic,
        interface_energy=interface_energy,
        bulk=bulk,
        total=kinetic + interface_energy + bulk,
        visc_dissipation=params.nu * norm(u, "H1_semi") ** 2,
        chem_dissipation=params.mobility * norm(mu, "H1_semi") ** 2,
        power_in=inner(g_field, u),
        residual=residual,
        mass=psi.coeffs[0, 0].real,
        momentum_x=u.x.coeffs[0, 0].real,
        momentum_y=u.y.coeffs[0, 0].real,
        norm_h0=norm(state, "H0_pair"),
        norm_v=norm(state, "V_pair"),
        mu_l2=norm(mu, "L2"),
    )


def run(initial: State, params: SolverParams, potential: PolynomialPotential,
        symbol: ForcingSymbol, t_end: float, *, observe_every: int = 1,
        monitor_energy: bool = True, checkpoint_every: int | None = None,
        checkpoint_dir=None) -> tuple[list[EnergyReport], State]:
    """Fixed-step integration emitting an EnergyReport every observer interval.

    The report at time t_n carries the energy-identity residual of the step
    t_n -> t_{n+1} (dissipation and input power evaluated at t_n); the final
    report's residual is NaN.  With a zero symbol the per-step energy increase
    is checked against params.max_energy_violation.
    """
    span = t_end - initial.time
    if span <= 0:
        raise ValueError("t_end must exceed the initial time")
    n_steps = int(round(span / params.dt))
    if n_steps < 1 or abs(n_steps * params.dt - span) > 1e-9 * max(1.0, abs(span)):
        raise ValueError("t_end - t0 must be a multiple of dt")
    check = monitor_energy and symbol.is_zero and params.max_energy_violation is not None
    reports: list[EnergyReport] = []
    state = initial
    rep = energy_report(state, params, potential, symbol)
    for n in range(n_steps):
        try:
            nxt = step(state, params, potential, symbol, check_energy=False)
        except BlowUpError as exc:
            if checkpoint_dir is not None:
                path = f"{checkpoint_dir}/blowup_t{state.time:.6g}.chk"
                write_checkpoint(path, state)
                raise BlowUpError(exc.t, math.inf, path) from exc
            raise
        rep_next = energy_report(nxt, params, potential, symbol)
        residual = ((rep_next.total - rep.total) / params.dt
                    + rep.visc_dissipation + rep.chem_dissipation - rep.power_in)
        if check and rep_next.total > rep.total + params.max_energy_violation:
            raise EnergyViolationError(nxt.time, rep_next.total - rep.total,
                                       params.max_energy_violation)
        if n % observe_every == 0:
            reports.append(replace(rep, residual=residual))
        if checkpoint_every is not None and checkpoint_dir is not None and n > 0 \
                and n % checkpoint_every == 0:
            write_checkpoint(f"{checkpoint_dir}/step{n:08d}.chk", state)
        state, rep = nxt, rep_next
    reports.append(rep)
    return reports, state


def taylor_green(grid: Grid, amplitude: float = 1.0) -> SpectralVector:
    """u = A (sin x cos y, -cos x sin y); exact decaying solution on L = 2*pi."""
    xx, yy = grid.meshgrid()
    scale = 2.0 * math.pi / grid.length
    return SpectralVector.from_physical(
        grid,
        amplitude * np.sin(scale * xx) * np.cos(scale * yy),
        -amplitude * np.cos(scale * xx) * np.sin(scale * yy),
    )


# ---------------------------------------------------------------------------
# trajectory CSV


def write_trajectory_csv(path, reports: list[EnergyReport]) -> None:
    rows = [CSV_HEADER]
    for r in reports:
        rows.append(",".join(repr(float(v)) for v in (
            r.t, r.kinetic, r.interface_energy, r.bulk, r.total,
            r.visc_dissipation, r.chem_dissipation, r.power_in, r.residual,
            r.mass, r.momentum_x, r.momentum_y, r.norm_h0, r.norm_v, r.mu_l2,
        )))
    with open(path, "w", encoding="ascii") as fh:
        fh.write("\n".join(rows) + "\n")


def read_trajectory_csv(path) -> dict[str, np.ndarray]:
    with open(path, "r", encoding="ascii") as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    names = lines[0].split(",")
    data = np.array([[float(tok) for tok in ln.split(",")] for ln in lines[1:]])
    return {name: data[:, i] for i, name in enumerate(names)}
