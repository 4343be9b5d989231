"""Non-autonomous forcing symbols g(t, x) and their sliding-window bounds.

Every symbol factors as a fixed divergence-free, zero-mean spatial profile
times a scalar signal s(t) defined on all of R (pullback experiments reach
arbitrarily far into the past).  The translation-bounded functionals
M(t; q) = sup_{r <= t} integral_{r-1}^{r} |g(s)|_2^q ds are evaluated by a
window sweep with trapezoid quadrature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from modelh.spectral import Grid, SpectralScalar, SpectralVector, leray_project, norm

KINDS = ("zero", "constant", "modulated", "past_decaying", "quasi_periodic")


class SignalError(ValueError):
    """Signal parameters are inadmissible (e.g. not integrable into the past)."""


def solenoidal_profile(grid: Grid, modes, amplitudes=None, phases=None,
                       l2_norm: float | None = None) -> SpectralVector:
    """Divergence-free, zero-mean profile from a list of wavevectors.

    Each mode (j1, j2) contributes a transverse unit direction (-k2, k1)/|k|
    with the given complex amplitude; Hermitian partners are filled in so the
    field is real.  If l2_norm is given the profile is rescaled to it.
    """
    modes = [tuple(m) for m in modes]
    if amplitudes is None:
        amplitudes = [1.0] * len(modes)
    if phases is None:
        phases = [0.0] * len(modes)
    n = grid.n_modes
    cx = np.zeros((n, n), dtype=np.complex128)
    cy = np.zeros((n, n), dtype=np.complex128)
    cut = grid.dealias_fraction * n / 2.0
    for (j1, j2), amp, phase in zip(modes, amplitudes, phases):
        if (j1, j2) == (0, 0):
            raise SignalError("profile modes must be nonzero (zero-mean forcing)")
        if abs(j1) > cut or abs(j2) > cut:
            raise SignalError(f"profile mode {(j1, j2)} outside the dealias mask")
        k1 = 2.0 * math.pi / grid.length * j1
        k2 = 2.0 * math.pi / grid.length * j2
        kn = math.hypot(k1, k2)
        c = amp * np.exp(1j * phase) * grid.area / 2.0
        tx, ty = -k2 / kn, k1 / kn
        cx[j1 % n, j2 % n] += c * tx
        cy[j1 % n, j2 % n] += c * ty
        cx[(-j1) % n, (-j2) % n] += np.conj(c * tx)
        cy[(-j1) % n, (-j2) % n] += np.conj(c * ty)
    profile = SpectralVector(SpectralScalar(grid, cx), SpectralScalar(grid, cy))
    profile = leray_project(profile)
    if l2_norm is not None:
        size = norm(profile, "L2")
        if size == 0.0:
            raise SignalError("degenerate profile")
        profile = profile * (l2_norm / size)
    return profile


@dataclass(frozen=True)
class ForcingSymbol:
    """Time-dependent forcing: profile field times a scalar signal.

    kinds: zero; constant (s = 1); modulated / quasi_periodic
    (s = sum_j a_j sin(w_j t + phi_j)); past_decaying
    (s = exp(decay_rate * (t - switch_time)) for t <= switch_time, 1 after).
    """

    kind: str
    profile: SpectralVector | None = None
    frequencies: tuple[float, ...] = ()
    amplitudes: tuple[float, ...] = ()
    phases: tuple[float, ...] = ()
    decay_rate: float = 1.0
    switch_time: float = 0.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise SignalError(f"unknown symbol kind {self.kind!r}")
        if self.kind != "zero" and self.profile is None:
            raise SignalError(f"{self.kind} symbol requires a profile")
        if self.kind in ("modulated", "quasi_periodic"):
            if not self.frequencies:
                raise SignalError(f"{self.kind} symbol requires frequencies")
            k = len(self.frequencies)
            amps = self.amplitudes or tuple(1.0 for _ in range(k))
            phs = self.phases or tuple(0.0 for _ in range(k))
            if len(amps) != k or len(phs) != k:
                raise SignalError("frequencies, amplitudes and phases must align")
            object.__setattr__(self, "amplitudes", tuple(float(a) for a in amps))
            object.__setattr__(self, "phases", tuple(float(p) for p in phs))
            object.__setattr__(self, "frequencies", tuple(float(w) for w in self.frequencies))
        if self.kind == "past_decaying" and not self.decay_rate > 0:
            raise SignalError("past-decaying symbol needs decay_rate > 0 "
                              "(otherwise the signal is not integrable into the past)")

    @classmethod
    def zero(cls) -> "ForcingSymbol":
        return cls("zero")

    @property
    def is_zero(self) -> bool:
        return self.kind == "zero"

    def signal(self, t):
        """Scalar signal s(t); vectorized over t."""
        t = np.asarray(t, dtype=np.float64)
        if self.kind == "zero":
            return np.zeros_like(t)
        if self.kind == "constant":
            return np.ones_like(t)
        if self.kind in ("modulated", "quasi_periodic"):
            acc = np.zeros_like(t)
            for w, a, p in zip(self.frequencies, self.amplitudes, self.phases):
                acc = acc + a * np.sin(w * t + p)
            return acc
        if self.kind == "past_decaying":
            return np.exp(self.decay_rate * np.minimum(t - self.switch_time, 0.0))
        raise SignalError(self.kind)

    def sample(self, t: float) -> SpectralVector:
        """Forcing field at time t: solenoidal, zero spatial mean."""
        if self.kind == "zero":
            raise SignalError("zero symbol has no grid; use sample_on(grid, t)")
        return self.profile * float(self.signal(t))

    def sample_on(self, grid: Grid, t: float) -> SpectralVector:
        if self.kind == "zero":
            return SpectralVector.zero(grid)
        return self.sample(t)

    def shifted(self, delta: float) -> "ForcingSymbol":
        """Time-translated symbol g_delta(t) = g(t + delta)."""
        if self.kind in ("zero", "constant"):
            return self
        if self.kind in ("modulated", "quasi_periodic"):
            phases = tuple(p + w * delta for w, p in zip(self.frequencies, self.phases))
            return replace(self, phases=phases)
        return replace(self, switch_time=self.switch_time - delta)

    def signal_period(self) -> float:
        if self.kind in ("modulated", "quasi_periodic") and self.frequencies:
            return 2.0 * math.pi / min(abs(w) for w in self.frequencies if w != 0.0)
        return 1.0


def uloc_bound(symbol: ForcingSymbol, t: float, exponent: float = 2.0,
               quadrature_step: float = 1e-3, horizon: float | None = None) -> float:
    """sup over r in [t - horizon, t] of integral_{r-1}^{r} |g(s)|_2^exponent ds.

    The sweep horizon defaults to 20 signal periods; every shipped signal is
    eventually periodic or decaying into the past, so the supremum over all
    r <= t is attained on the sweep (for past-decaying signals the window
    integral is nondecreasing in r, which is asserted).
    """
    if exponent < 2.0:
        raise ValueError(f"exponent must be >= 2, got {exponent}")
    if quadrature_step > 1e-2:
        raise ValueError("quadrature step must be <= 1e-2")
    if symbol.is_zero:
        return 0.0
    profile_l2 = norm(symbol.profile, "L2")
    if symbol.kind == "constant":
        return profile_l2**exponent
    if horizon is None:
        horizon = 20.0 * symbol.signal_period()
    h = quadrature_step
    n_total = int(round((horizon + 1.0) / h))
    s = t - horizon - 1.0 + h * np.arange(n_total + 1)
    vals = np.abs(symbol.signal(s)) ** exponent
    cumulative = np.concatenate([[0.0], np.cumsum((vals[1:] + vals[:-1]) * (h / 2.0))])
    window = int(round(1.0 / h))
    integrals = cumulative[window:] - cumulative[:-window]
    sup = float(np.max(integrals))
    if symbol.kind == "past_decaying":
        # nondecreasing window integrals: the sup over all r <= t sits at the end
        if integrals.size > 1 and not integrals[-1] >= sup - 1e-9 * (1.0 + sup):
            raise SignalError("past-decaying window integral failed monotonicity")
    return profile_l2**exponent * sup


def holder_target_exponent(q: float) -> float:
    """Exponent (q-2)/(4(q-1)) governing the time-continuity assumptions."""
    if q <= 2:
        raise ValueError("q must exceed 2")
    return (q - 2.0) / (4.0 * (q - 1.0))
