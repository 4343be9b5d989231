"""Polynomial double-well potentials: derivatives, convex splitting, certification.

A potential F is an even-degree polynomial (degree >= 4, positive leading
coefficient) with growth exponent p = degree - 3.  The convex splitting
F = F0 - alpha*y^2 + gamma*y + beta, with F0 convex and F0(0) = F0'(0) = 0,
supplies the lower bound f' >= -2*alpha used throughout the estimates, and the
certification report measures the growth-control constants on a sample grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np


class DegeneratePotentialError(ValueError):
    """Polynomial is not an admissible double-well (degree/parity/sign)."""


def _derivative_coefficients(coeffs: np.ndarray, order: int) -> np.ndarray:
    c = np.asarray(coeffs, dtype=np.float64)
    for _ in range(order):
        if c.size <= 1:
            return np.zeros(1)
        c = c[1:] * np.arange(1, c.size)
    return c


def _horner(coeffs: np.ndarray, y):
    acc = np.zeros_like(np.asarray(y, dtype=np.float64))
    for c in coeffs[::-1]:
        acc = acc * y + c
    return acc


def _real_roots(coeffs: np.ndarray) -> np.ndarray:
    """Real roots of a polynomial given ascending coefficients."""
    c = np.trim_zeros(np.asarray(coeffs, dtype=np.float64), "b")
    if c.size <= 1:
        return np.array([])
    roots = np.roots(c[::-1])
    real = roots[np.abs(roots.imag) < 1e-9 * (1.0 + np.abs(roots.real))].real
    return np.sort(real)


@dataclass(frozen=True)
class Splitting:
    alpha: float
    gamma: float
    beta: float
    convex_coefficients: tuple[float, ...]


@dataclass(frozen=True)
class CertificationReport:
    ok: bool
    growth_exponent: int
    coercivity_exponent: int          # q = p + 1
    coercivity_constant: float        # largest c_f valid on the sample grid
    growth_constant: float            # C_f: sup |f''(y)| / (1 + |y|^p)
    control_constants: tuple[float, ...]      # c_k for k = 0..4, grid suprema
    asymptotic_ratios: tuple[float, ...]      # leading-order limits of the same ratios
    positivity_ok: bool
    convexity_ok: bool
    fourth_derivative_globally_bounded: bool
    fourth_derivative_range_sup: float
    radius: float
    samples: int
    violations: tuple[str, ...]


@dataclass(frozen=True)
class PolynomialPotential:
    """Even-degree polynomial F with ascending coefficients."""

    coefficients: tuple[float, ...]

    def __post_init__(self):
        c = np.trim_zeros(np.asarray(self.coefficients, dtype=np.float64), "b")
        if c.size == 0:
            raise DegeneratePotentialError("empty coefficient list")
        degree = c.size - 1
        if degree < 4:
            raise DegeneratePotentialError(f"degree must be at least 4, got {degree}")
        if degree % 2 != 0:
            raise DegeneratePotentialError(f"degree must be even, got {degree}")
        if c[-1] <= 0:
            raise DegeneratePotentialError("leading coefficient must be positive")
        object.__setattr__(self, "coefficients", tuple(float(v) for v in c))

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    @property
    def growth_exponent(self) -> int:
        """p in the growth bound |f''(y)| <= C (1 + |y|^p); p = degree - 3."""
        return self.degree - 3

    @cached_property
    def _derivative_tables(self) -> tuple[np.ndarray, ...]:
        base = np.asarray(self.coefficients, dtype=np.float64)
        return tuple(_derivative_coefficients(base, k) for k in range(7))

    def eval(self, y, order: int = 0):
        """F^(order)(y); order 0..5 (f = F', so f^(k) = F^(k+1))."""
        if not 0 <= order <= 5:
            raise ValueError(f"order must be in 0..5, got {order}")
        return _horner(self._derivative_tables[order], y)

    def f(self, y):
        return self.eval(y, 1)

    def f_prime(self, y):
        return self.eval(y, 2)

    @cached_property
    def splitting(self) -> Splitting:
        return compute_splitting(self)


def double_well(m: int = 1) -> PolynomialPotential:
    """Canonical family F(y) = (y^2 - 1)^(2m), degree 4m, growth exponent 4m - 3."""
    if m < 1:
        raise ValueError("m must be a positive integer")
    base = np.array([-1.0, 0.0, 1.0])          # y^2 - 1, ascending
    poly = np.array([1.0])
    for _ in range(2 * m):
        poly = np.convolve(poly, base)
    return PolynomialPotential(tuple(poly))


def compute_splitting(potential: PolynomialPotential) -> Splitting:
    """Quadratic-perturbation splitting with the smallest admissible alpha.

    alpha = max(0, -min F''/2), the minimum located at the real roots of F'''
    (the leading term dominates, so the global minimum is attained there);
    gamma = F'(0) and beta = F(0) normalize F0(0) = F0'(0) = 0.
    """
    fpp = _derivative_coefficients(np.asarray(potential.coefficients), 2)
    fppp = _derivative_coefficients(np.asarray(potential.coefficients), 3)
    critical = _real_roots(fppp)
    candidates = np.concatenate([critical, [0.0]])
    min_fpp = float(np.min(_horner(fpp, candidates)))
    alpha = max(0.0, -0.5 * min_fpp)
    gamma = float(potential.coefficients[1])
    beta = float(potential.coefficients[0])
    convex = np.array(potential.coefficients, dtype=np.float64)
    convex[0] -= beta
    convex[1] -= gamma
    convex[2] += alpha
    # Convexity of F0 holds by construction: min F0'' = min F'' + 2 alpha >= 0.
    f0pp_min = min_fpp + 2.0 * alpha
    if f0pp_min < -1e-9 * (1.0 + abs(min_fpp)):
        raise DegeneratePotentialError("convex part failed its convexity check")
    return Splitting(alpha, gamma, beta, tuple(convex))


def validate_hypotheses(potential: PolynomialPotential, radius: float = 10.0,
                        samples: int = 10_000) -> CertificationReport:
    """Grid-based certification of positivity, coercivity and growth control.

    Measures, for k = 0..4, the supremum over [-radius, radius] of
    |f^(k)(y)| / (1 + F(y)^((p+2-k)/(p+3))) together with its leading-order
    limit at infinity (finite because deg f^(k) = p+2-k matches the power of
    the coercive F), and the largest coercivity constant c_f valid on the
    grid for F(y) >= c_f (|y|^(2+q) - 1) with q = p + 1.
    """
    if samples < 1000:
        raise ValueError(f"need at least 10^3 samples, got {samples}")
    f_roots = _real_roots(_derivative_coefficients(np.asarray(potential.coefficients), 1))
    largest_root = float(np.max(np.abs(f_roots))) if f_roots.size else 0.0
    if radius <= 2.0 * largest_root:
        raise ValueError(
            f"radius {radius} too small: need > {2.0 * largest_root}"
            " (twice the largest critical point of F)"
        )
    p = potential.growth_exponent
    d = potential.degree
    y = np.linspace(-radius, radius, samples)
    F = potential.eval(y, 0)
    violations: list[str] = []

    positivity_ok = bool(np.min(F) > 0.0)
    if not positivity_ok:
        violations.append(
            f"positivity: F attains {float(np.min(F)):.6g} <= 0 on the sample grid"
        )

    lead = potential.coefficients[-1]
    control = []
    asymptotic = []
    for k in range(5):
        fk = potential.eval(y, k + 1)
        power = (p + 2 - k) / (p + 3)
        if positivity_ok:
            denom = 1.0 + F**power
            control.append(float(np.max(np.abs(fk) / denom)))
        else:
            control.append(math.inf)
        # leading coefficient of f^(k) = F^(k+1): c_d * d * (d-1) * ... * (d-k)
        lead_fk = lead * math.prod(range(d - k, d + 1))
        asymptotic.append(abs(lead_fk) / lead**power)
    if not all(math.isfinite(c) for c in control):
        violations.append("growth control constants not measurable (F <= 0 on grid)")

    q = p + 1
    mask = np.abs(y) ** (p + 3) > 1.0
    if positivity_ok and np.any(mask):
        ratios = F[mask] / (np.abs(y[mask]) ** (p + 3) - 1.0)
        coercivity = float(min(np.min(ratios), lead))
        if coercivity <= 0.0:
            violations.append("coercivity: no positive constant on the sample grid")
    else:
        coercivity = 0.0 if not positivity_ok else lead
        if not positivity_ok:
            violations.append("coercivity unmeasurable (positivity failed)")

    try:
        splitting = potential.splitting
        convexity_ok = True
    except DegeneratePotentialError as exc:
        convexity_ok = False
        violations.append(str(exc))

    f4 = potential.eval(y, 5)
    f4_bounded = potential.degree <= 5          # f'''' constant iff degree 4
    growth_constant = float(np.max(np.abs(potential.eval(y, 3))
                                   / (1.0 + np.abs(y) ** p)))
    report = CertificationReport(
        ok=not violations,
        growth_exponent=p,
        coercivity_exponent=q,
        coercivity_constant=coercivity,
        growth_constant=growth_constant,
        control_constants=tuple(control),
        asymptotic_ratios=tuple(asymptotic),
        positivity_ok=positivity_ok,
        convexity_ok=convexity_ok,
        fourth_derivative_globally_bounded=f4_bounded,
        fourth_derivative_range_sup=float(np.max(np.abs(f4))),
        radius=radius,
        samples=samples,
        violations=tuple(violations),
    )
    return report
