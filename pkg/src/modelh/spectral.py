"""Real scalar and vector fields on a periodic square, and their spectral calculus.

Fields are stored as full complex Fourier coefficient arrays with the integral
normalization: the k=0 coefficient of a field equals its integral over the
domain, so mean values and mass bookkeeping read off directly.  All operators
are pure functions returning new immutable fields.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

TWO_THIRDS = 2.0 / 3.0

CHECKPOINT_MAGIC = "modelh-checkpoint"
CHECKPOINT_VERSION = 1


class GridMismatchError(ValueError):
    """Fields living on different grids were combined."""


class NonFiniteFieldError(ValueError):
    """Physical samples contain NaN or infinity."""


class CheckpointFormatError(ValueError):
    """A checkpoint file does not match the documented format."""


def _fmt(x: float) -> str:
    """Shortest decimal that round-trips the IEEE-754 double exactly."""
    return repr(float(x))


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid on [0, L)^2 with an even number of modes per axis.

    Wavevectors are k = (2*pi/L) * j with integer mode numbers j in the standard
    FFT layout; the dealias mask zeroes every mode with |j_i| above
    dealias_fraction * n_modes / 2 (the 2/3 rule by default).
    """

    n_modes: int
    length: float = 2.0 * math.pi
    dealias_fraction: float = TWO_THIRDS

    def __post_init__(self):
        if self.n_modes <= 0 or self.n_modes % 2 != 0:
            raise ValueError(f"n_modes must be even and positive, got {self.n_modes}")
        if not self.length > 0:
            raise ValueError(f"length must be positive, got {self.length}")
        if not 0.0 < self.dealias_fraction <= 1.0:
            raise ValueError(f"dealias_fraction must lie in (0, 1], got {self.dealias_fraction}")

    @cached_property
    def mode_numbers(self) -> np.ndarray:
        n = self.n_modes
        j = np.concatenate([np.arange(0, n // 2), np.arange(-n // 2, 0)])
        j.setflags(write=False)
        return j

    @cached_property
    def kx(self) -> np.ndarray:
        k = (2.0 * math.pi / self.length) * self.mode_numbers
        out = np.broadcast_to(k[:, None], (self.n_modes, self.n_modes))
        return out

    @cached_property
    def ky(self) -> np.ndarray:
        k = (2.0 * math.pi / self.length) * self.mode_numbers
        return np.broadcast_to(k[None, :], (self.n_modes, self.n_modes))

    @cached_property
    def k_sq(self) -> np.ndarray:
        out = self.kx**2 + self.ky**2
        out.setflags(write=False)
        return out

    @cached_property
    def k_sq_safe(self) -> np.ndarray:
        out = self.k_sq.copy()
        out[0, 0] = 1.0
        out.setflags(write=False)
        return out

    @cached_property
    def dealias_mask(self) -> np.ndarray:
        cut = self.dealias_fraction * self.n_modes / 2.0
        j = np.abs(self.mode_numbers)
        keep = (j[:, None] <= cut) & (j[None, :] <= cut)
        keep.setflags(write=False)
        return keep

    @property
    def area(self) -> float:
        return self.length * self.length

    @property
    def cell_area(self) -> float:
        return (self.length / self.n_modes) ** 2

    @cached_property
    def nodes(self) -> np.ndarray:
        x = np.arange(self.n_modes) * (self.length / self.n_modes)
        x.setflags(write=False)
        return x

    def meshgrid(self) -> tuple[np.ndarray, np.ndarray]:
        return np.meshgrid(self.nodes, self.nodes, indexing="ij")


def _freeze(coeffs: np.ndarray) -> np.ndarray:
    out = np.ascontiguousarray(coeffs, dtype=np.complex128)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class SpectralScalar:
    """Real scalar field through its Fourier coefficients (integral-scaled)."""

    grid: Grid
    coeffs: np.ndarray

    def __post_init__(self):
        n = self.grid.n_modes
        if self.coeffs.shape != (n, n):
            raise ValueError(f"coefficient array must be {(n, n)}, got {self.coeffs.shape}")
        object.__setattr__(self, "coeffs", _freeze(self.coeffs))

    @classmethod
    def from_physical(cls, grid: Grid, samples: np.ndarray) -> "SpectralScalar":
        samples = np.asarray(samples, dtype=np.float64)
        if samples.shape != (grid.n_modes, grid.n_modes):
            raise GridMismatchError(
                f"sample array must be {(grid.n_modes, grid.n_modes)}, got {samples.shape}"
            )
        if not np.all(np.isfinite(samples)):
            raise NonFiniteFieldError("physical samples contain non-finite values")
        return cls(grid, np.fft.fft2(samples) * grid.cell_area)

    @classmethod
    def constant(cls, grid: Grid, value: float) -> "SpectralScalar":
        c = np.zeros((grid.n_modes, grid.n_modes), dtype=np.complex128)
        c[0, 0] = value * grid.area
        return cls(grid, c)

    def to_physical(self) -> np.ndarray:
        return np.fft.ifft2(self.coeffs).real / self.grid.cell_area

    @property
    def mean(self) -> float:
        return self.coeffs[0, 0].real / self.grid.area

    def dealiased(self) -> "SpectralScalar":
        return SpectralScalar(self.grid, self.coeffs * self.grid.dealias_mask)

    def conjugate_flip(self) -> np.ndarray:
        """Coefficients at -k, conjugated; equals coeffs for a real field."""
        return np.conj(np.roll(self.coeffs[::-1, ::-1], 1, axis=(0, 1)))

    def hermitian_defect(self) -> float:
        return float(np.max(np.abs(self.coeffs - self.conjugate_flip())))

    def __add__(self, other: "SpectralScalar") -> "SpectralScalar":
        _require_same_grid(self, other)
        return SpectralScalar(self.grid, self.coeffs + other.coeffs)

    def __sub__(self, other: "SpectralScalar") -> "SpectralScalar":
        _require_same_grid(self, other)
        return SpectralScalar(self.grid, self.coeffs - other.coeffs)

    def __mul__(self, scalar: float) -> "SpectralScalar":
        return SpectralScalar(self.grid, self.coeffs * scalar)

    __rmul__ = __mul__


@dataclass(frozen=True)
class SpectralVector:
    """Real 2D vector field: two scalar components on a shared grid."""

    x: SpectralScalar
    y: SpectralScalar

    def __post_init__(self):
        if self.x.grid != self.y.grid:
            raise GridMismatchError("vector components must share a grid")

    @property
    def grid(self) -> Grid:
        return self.x.grid

    @classmethod
    def from_physical(cls, grid: Grid, sx: np.ndarray, sy: np.ndarray) -> "SpectralVector":
        return cls(SpectralScalar.from_physical(grid, sx), SpectralScalar.from_physical(grid, sy))

    @classmethod
    def zero(cls, grid: Grid) -> "SpectralVector":
        return cls(SpectralScalar.constant(grid, 0.0), SpectralScalar.constant(grid, 0.0))

    def to_physical(self) -> tuple[np.ndarray, np.ndarray]:
        return self.x.to_physical(), self.y.to_physical()

    def dealiased(self) -> "SpectralVector":
        return SpectralVector(self.x.dealiased(), self.y.dealiased())

    def divergence_defect(self) -> float:
        g = self.grid
        return float(np.max(np.abs(g.kx * self.x.coeffs + g.ky * self.y.coeffs)))

    def __add__(self, other: "SpectralVector") -> "SpectralVector":
        return SpectralVector(self.x + other.x, self.y + other.y)

    def __sub__(self, other: "SpectralVector") -> "SpectralVector":
        return SpectralVector(self.x - other.x, self.y - other.y)

    def __mul__(self, scalar: float) -> "SpectralVector":
        return SpectralVector(self.x * scalar, self.y * scalar)

    __rmul__ = __mul__


@dataclass(frozen=True)
class State:
    """Solver state z = (u, psi) at a given time; u solenoidal with zero mean."""

    velocity: SpectralVector
    order_parameter: SpectralScalar
    time: float = 0.0

    @property
    def grid(self) -> Grid:
        return self.order_parameter.grid

    def __add__(self, other: "State") -> "State":
        return State(self.velocity + other.velocity,
                     self.order_parameter + other.order_parameter, self.time)

    def __sub__(self, other: "State") -> "State":
        return State(self.velocity - other.velocity,
                     self.order_parameter - other.order_parameter, self.time)

    def __mul__(self, scalar: float) -> "State":
        return State(self.velocity * scalar, self.order_parameter * scalar, self.time)

    __rmul__ = __mul__


def _require_same_grid(a, b) -> None:
    ga = a.grid if not isinstance(a, Grid) else a
    gb = b.grid if not isinstance(b, Grid) else b
    if ga != gb:
        raise GridMismatchError("operands live on different grids")


# ---------------------------------------------------------------------------
# calculus operators


def gradient(f: SpectralScalar) -> SpectralVector:
    g = f.grid
    return SpectralVector(
        SpectralScalar(g, 1j * g.kx * f.coeffs),
        SpectralScalar(g, 1j * g.ky * f.coeffs),
    )


def divergence(v: SpectralVector) -> SpectralScalar:
    g = v.grid
    return SpectralScalar(g, 1j * (g.kx * v.x.coeffs + g.ky * v.y.coeffs))


def laplacian(f):
    if isinstance(f, SpectralVector):
        return SpectralVector(laplacian(f.x), laplacian(f.y))
    return SpectralScalar(f.grid, -f.grid.k_sq * f.coeffs)


def bilaplacian(f):
    if isinstance(f, SpectralVector):
        return SpectralVector(bilaplacian(f.x), bilaplacian(f.y))
    return SpectralScalar(f.grid, f.grid.k_sq**2 * f.coeffs)


def leray_project(v: SpectralVector) -> SpectralVector:
    """Remove the gradient part per mode and zero the mean flow."""
    g = v.grid
    k_dot = (g.kx * v.x.coeffs + g.ky * v.y.coeffs) / g.k_sq_safe
    px = v.x.coeffs - g.kx * k_dot
    py = v.y.coeffs - g.ky * k_dot
    px = px.copy()
    py = py.copy()
    px[0, 0] = 0.0
    py[0, 0] = 0.0
    return SpectralVector(SpectralScalar(g, px), SpectralScalar(g, py))


def dealias_product(a, b, contraction: str = "scalar"):
    """Pointwise product computed in physical space with 2/3-rule masking.

    Both factors are masked before the grid multiply and the result is masked
    again, so quadratic products are alias-free.  Contractions:
      "scalar"        scalar * scalar -> scalar
      "dot"           vector . vector -> scalar
      "scale_vector"  scalar * vector -> vector
    """
    _require_same_grid(a, b)
    g = a.grid if not isinstance(a, Grid) else a
    if contraction == "scalar":
        pa = a.dealiased().to_physical()
        pb = b.dealiased().to_physical()
        return SpectralScalar.from_physical(g, pa * pb).dealiased()
    if contraction == "dot":
        ax, ay = a.dealiased().to_physical()
        bx, by = b.dealiased().to_physical()
        return SpectralScalar.from_physical(g, ax * bx + ay * by).dealiased()
    if contraction == "scale_vector":
        pa = a.dealiased().to_physical()
        bx, by = b.dealiased().to_physical()
        return SpectralVector.from_physical(g, pa * bx, pa * by).dealiased()
    raise ValueError(f"unknown contraction {contraction!r}")


def inner(a, b) -> float:
    """L2 inner product via the Parseval pairing of coefficient arrays."""
    _require_same_grid(a, b)
    if isinstance(a, SpectralVector):
        s = np.vdot(b.x.coeffs, a.x.coeffs) + np.vdot(b.y.coeffs, a.y.coeffs)
    else:
        s = np.vdot(b.coeffs, a.coeffs)
    return float(s.real) / a.grid.area


def _weighted_l2(obj, weight: np.ndarray) -> float:
    if isinstance(obj, SpectralVector):
        s = np.sum(weight * (np.abs(obj.x.coeffs) ** 2 + np.abs(obj.y.coeffs) ** 2))
    else:
        s = np.sum(weight * np.abs(obj.coeffs) ** 2)
    return math.sqrt(max(float(s), 0.0) / obj.grid.area)


def norm(obj, kind: str = "L2", q: float = 2.0) -> float:
    """Norms of fields and states.

    L2, H1_semi (= |grad .|_2), H2_semi (= |lapl .|_2), H3_semi on fields;
    H0_pair = (|u|^2 + |grad psi|^2)^(1/2) and V_pair = (|grad u|^2 +
    |lapl psi|^2)^(1/2) on states; Linf and Lp evaluated on dealiased
    physical samples.
    """
    if kind == "H0_pair" or kind == "V_pair":
        if not isinstance(obj, State):
            raise ValueError(f"{kind} norm requires a State")
        if kind == "H0_pair":
            return math.hypot(norm(obj.velocity, "L2"), norm(obj.order_parameter, "H1_semi"))
        return math.hypot(norm(obj.velocity, "H1_semi"), norm(obj.order_parameter, "H2_semi"))
    if isinstance(obj, State):
        raise ValueError(f"norm kind {kind!r} applies to fields, not states")
    g = obj.grid
    if kind == "L2":
        return _weighted_l2(obj, np.ones_like(g.k_sq))
    if kind == "H1_semi":
        return _weighted_l2(obj, g.k_sq)
    if kind == "H2_semi":
        return _weighted_l2(obj, g.k_sq**2)
    if kind == "H3_semi":
        return _weighted_l2(obj, g.k_sq**3)
    if kind == "H4_semi":
        return _weighted_l2(obj, g.k_sq**4)
    if kind == "Linf":
        if isinstance(obj, SpectralVector):
            px, py = obj.dealiased().to_physical()
            return float(np.max(np.sqrt(px**2 + py**2)))
        return float(np.max(np.abs(obj.dealiased().to_physical())))
    if kind == "Lp":
        if isinstance(obj, SpectralVector):
            px, py = obj.dealiased().to_physical()
            mag = np.sqrt(px**2 + py**2)
        else:
            mag = np.abs(obj.dealiased().to_physical())
        return float(np.sum(mag**q) * g.cell_area) ** (1.0 / q)
    raise ValueError(f"unknown norm kind {kind!r}")


# ---------------------------------------------------------------------------
# random band-limited fields (deterministic given the generator)


def random_scalar(grid: Grid, rng: np.random.Generator, amplitude: float = 1.0,
                  decay: float = 2.0, zero_mean: bool = True) -> SpectralScalar:
    """Random real field supported inside the dealias mask.

    Mode amplitudes fall off like (1 + |j|)^(-decay); the L2 norm is scaled
    to `amplitude`.
    """
    white = rng.standard_normal((grid.n_modes, grid.n_modes))
    c = np.fft.fft2(white) * grid.cell_area
    j = np.abs(grid.mode_numbers)
    envelope = (1.0 + np.hypot(j[:, None], j[None, :])) ** (-decay)
    c = c * envelope * grid.dealias_mask
    if zero_mean:
        c[0, 0] = 0.0
    f = SpectralScalar(grid, c)
    size = norm(f, "L2")
    if size == 0.0:
        return f
    return f * (amplitude / size)


def random_solenoidal(grid: Grid, rng: np.random.Generator, amplitude: float = 1.0,
                      decay: float = 2.0) -> SpectralVector:
    raw = SpectralVector(
        random_scalar(grid, rng, 1.0, decay),
        random_scalar(grid, rng, 1.0, decay),
    )
    v = leray_project(raw).dealiased()
    size = norm(v, "L2")
    if size == 0.0:
        return v
    return v * (amplitude / size)


def random_state(grid: Grid, rng: np.random.Generator, amplitude: float = 1.0,
                 velocity_fraction: float = 0.5, decay: float = 2.0,
                 mean_psi: float = 0.0, time: float = 0.0) -> State:
    """Random state with H0_pair norm `amplitude`, split between u and psi."""
    frac = min(max(velocity_fraction, 0.0), 1.0)
    u = random_solenoidal(grid, rng, amplitude * math.sqrt(frac), decay)
    psi = random_scalar(grid, rng, 1.0, decay)
    h1 = norm(psi, "H1_semi")
    target = amplitude * math.sqrt(1.0 - frac)
    psi = psi * (target / h1 if h1 > 0 else 0.0)
    if mean_psi != 0.0:
        psi = psi + SpectralScalar.constant(grid, mean_psi)
    return State(u, psi, time)


# ---------------------------------------------------------------------------
# checkpoint format: text header + little-endian float64 coefficient payload


def write_checkpoint(path, state: State, physical_params: dict[str, float] | None = None,
                     potential_coefficients=None) -> None:
    g = state.grid
    lines = [
        f"{CHECKPOINT_MAGIC} {CHECKPOINT_VERSION}",
        f"n_modes {g.n_modes}",
        f"length {_fmt(g.length)}",
        f"dealias_fraction {_fmt(g.dealias_fraction)}",
        f"time {_fmt(state.time)}",
    ]
    for name in sorted(physical_params or {}):
        lines.append(f"param {name} {_fmt(physical_params[name])}")
    if potential_coefficients is not None:
        lines.append("potential " + " ".join(_fmt(c) for c in potential_coefficients))
    lines.append("fields velocity_x velocity_y order_parameter")
    lines.append("end-header")
    header = ("\n".join(lines) + "\n").encode("ascii")
    payload = b"".join(
        np.ascontiguousarray(c, dtype="<c16").tobytes()
        for c in (state.velocity.x.coeffs, state.velocity.y.coeffs, state.order_parameter.coeffs)
    )
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(payload)


def read_checkpoint(path) -> tuple[State, dict]:
    with open(path, "rb") as fh:
        blob = fh.read()
    marker = b"end-header\n"
    split = blob.find(marker)
    if split < 0:
        raise CheckpointFormatError("missing end-header marker")
    header_lines = blob[:split].decode("ascii").splitlines()
    payload = blob[split + len(marker):]
    if not header_lines or not header_lines[0].startswith(CHECKPOINT_MAGIC):
        raise CheckpointFormatError("bad magic line")
    meta: dict = {"params": {}, "potential": None}
    n_modes = None
    length = None
    frac = TWO_THIRDS
    time = 0.0
    for line in header_lines[1:]:
        tokens = line.split()
        key = tokens[0]
        if key == "n_modes":
            n_modes = int(tokens[1])
        elif key == "length":
            length = float(tokens[1])
        elif key == "dealias_fraction":
            frac = float(tokens[1])
        elif key == "time":
            time = float(tokens[1])
        elif key == "param":
            meta["params"][tokens[1]] = float(tokens[2])
        elif key == "potential":
            meta["potential"] = [float(t) for t in tokens[1:]]
        elif key == "fields":
            meta["fields"] = tokens[1:]
    if n_modes is None or length is None:
        raise CheckpointFormatError("header missing n_modes or length")
    grid = Grid(n_modes, length, frac)
    count = n_modes * n_modes
    expected = 3 * count * 16
    if len(payload) != expected:
        raise CheckpointFormatError(f"payload holds {len(payload)} bytes, expected {expected}")
    arrays = [
        np.frombuffer(payload, dtype="<c16", count=count, offset=i * count * 16)
        .reshape(n_modes, n_modes)
        .astype(np.complex128)
        for i in range(3)
    ]
    state = State(
        SpectralVector(SpectralScalar(grid, arrays[0]), SpectralScalar(grid, arrays[1])),
        SpectralScalar(grid, arrays[2]),
        time,
    )
    return state, meta
