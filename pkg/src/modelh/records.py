"""Experiment records: fitted constants with diagnostics, verdicts, reports.

Fits are least squares on log-transformed data over an automatically selected
window (the widest window whose local slopes stabilize within 10%, ties broken
toward the latest window).  Records serialize to a structured text report plus
one CSV per stored time series; the report format is stable and consumed
verbatim by the plotting frontend.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class FitResult:
    """Log-space least-squares fit: value is the slope quantity of interest."""

    value: float
    prefactor: float
    r2: float
    residual: float
    window: tuple[int, int]
    sample_count: int

    def finite(self) -> bool:
        return math.isfinite(self.value)


@dataclass
class ExperimentRecord:
    kind: str
    config_digest: str = ""
    series: dict = field(default_factory=dict)       # name -> dict[column -> array]
    fits: dict = field(default_factory=dict)         # name -> FitResult
    constants: dict = field(default_factory=dict)    # name -> float
    verdicts: dict = field(default_factory=dict)     # name -> bool
    notes: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(self.verdicts.values())

    def add_series(self, name: str, **columns) -> None:
        self.series[name] = {k: np.asarray(v, dtype=np.float64) for k, v in columns.items()}

    def note(self, text: str) -> None:
        self.notes.append(text)

    # -- serialization ------------------------------------------------------

    def report_text(self) -> str:
        lines = ["[record]", f"kind = {self.kind}", f"digest = {self.config_digest}", ""]
        if self.constants:
            lines.append("[constants]")
            for name in sorted(self.constants):
                lines.append(f"{name} = {_fmt(self.constants[name])}")
            lines.append("")
        for name in sorted(self.fits):
            f = self.fits[name]
            lines.extend([
                f"[fits.{name}]",
                f"value = {_fmt(f.value)}",
                f"prefactor = {_fmt(f.prefactor)}",
                f"r2 = {_fmt(f.r2)}",
                f"residual = {_fmt(f.residual)}",
                f"window_lo = {f.window[0]}",
                f"window_hi = {f.window[1]}",
                f"sample_count = {f.sample_count}",
                "",
            ])
        if self.verdicts:
            lines.append("[verdicts]")
            for name in sorted(self.verdicts):
                lines.append(f"{name} = {'pass' if self.verdicts[name] else 'fail'}")
            lines.append("")
        if self.series:
            lines.append("[series]")
            for name in sorted(self.series):
                lines.append(f"{name} = {name}.csv")
            lines.append("")
        if self.notes:
            lines.append("[notes]")
            for text in self.notes:
                lines.append(f"- {text}")
            lines.append("")
        return "\n".join(lines)

    def write(self, out_dir) -> None:
        import os

        os.makedirs(out_dir, exist_ok=True)
        with open(os.path.join(out_dir, f"{self.kind}_report.txt"), "w", encoding="ascii") as fh:
            fh.write(self.report_text())
        for name, columns in sorted(self.series.items()):
            cols = list(columns)
            rows = [",".join(cols)]
            length = len(next(iter(columns.values())))
            for i in range(length):
                rows.append(",".join(_fmt(columns[c][i]) for c in cols))
            with open(os.path.join(out_dir, f"{name}.csv"), "w", encoding="ascii") as fh:
                fh.write("\n".join(rows) + "\n")


def _fmt(x: float) -> str:
    return repr(float(x))


# ---------------------------------------------------------------------------
# fitting


def stable_window(x: np.ndarray, y: np.ndarray, min_points: int = 4) -> tuple[int, int]:
    """Widest contiguous window whose consecutive slopes agree within 10%.

    Scanned from the full range down; among windows of equal width the latest
    wins.  Falls back to the full range when nothing stabilizes.
    """
    n = len(x)
    if n < min_points:
        return 0, n
    slopes = np.diff(y) / np.diff(x)
    for width in range(n, min_points - 1, -1):
        for lo in range(n - width, -1, -1):
            s = slopes[lo:lo + width - 1]
            mid = np.median(s)
            if mid == 0.0:
                if np.all(np.abs(s) < 1e-30):
                    return lo, lo + width
                continue
            if np.max(np.abs(s - mid)) <= 0.10 * abs(mid):
                return lo, lo + width
    return 0, n


def _linear_fit(x: np.ndarray, y: np.ndarray, window: tuple[int, int]) -> FitResult:
    lo, hi = window
    xs, ys = x[lo:hi], y[lo:hi]
    if len(xs) < 2:
        return FitResult(math.nan, math.nan, 0.0, math.inf, window, len(xs))
    A = np.vstack([xs, np.ones_like(xs)]).T
    coef, res, *_ = np.linalg.lstsq(A, ys, rcond=None)
    slope, intercept = float(coef[0]), float(coef[1])
    predicted = A @ coef
    ss_res = float(np.sum((ys - predicted) ** 2))
    ss_tot = float(np.sum((ys - np.mean(ys)) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return FitResult(slope, math.exp(intercept), r2, math.sqrt(ss_res / len(xs)),
                     window, len(xs))


def _thin(t: np.ndarray, y: np.ndarray, cap: int = 64) -> tuple[np.ndarray, np.ndarray]:
    if len(t) <= cap:
        return t, y
    idx = np.unique(np.linspace(0, len(t) - 1, cap).round().astype(int))
    return t[idx], y[idx]


def fit_exponential(t, y, floor: float = 0.0) -> FitResult:
    """Fit y ~ prefactor * exp(value * t) on the positive part of y.

    `value` < 0 for decay.  Points at or below `floor` (machine noise) are
    dropped before the window selection.
    """
    t = np.asarray(t, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    keep = y > max(floor, 0.0)
    t, y = _thin(t[keep], y[keep])
    if len(t) < 2:
        return FitResult(math.nan, math.nan, 0.0, math.inf, (0, 0), len(t))
    logy = np.log(y)
    return _linear_fit(t, logy, stable_window(t, logy))


def fit_powerlaw(s, d, floor: float = 0.0) -> FitResult:
    """Fit d ~ prefactor * s^value via log-log least squares."""
    s = np.asarray(s, dtype=np.float64)
    d = np.asarray(d, dtype=np.float64)
    keep = (s > 0) & (d > max(floor, 0.0))
    s, d = _thin(s[keep], d[keep])
    if len(s) < 2:
        return FitResult(math.nan, math.nan, 0.0, math.inf, (0, 0), len(s))
    logs, logd = np.log(s), np.log(d)
    return _linear_fit(logs, logd, stable_window(logs, logd))
