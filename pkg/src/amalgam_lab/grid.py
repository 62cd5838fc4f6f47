"""Uniform origin-centred grids, sampled functions and the test-function families.

A grid with ``n`` samples per axis and spacing ``dx`` carries the points

    x_j = (j - n/2) * dx,    j = 0, ..., n-1

so ``x = 0`` sits exactly on sample ``n/2`` and the extent is
``[-n*dx/2, n*dx/2)``.  The reciprocal (frequency) grid has the same layout
with spacing ``1/(n*dx)``.
"""
from __future__ import annotations

import enum
import math
import struct
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from .errors import GridMismatch, InvalidParam, OffGridShift, TailTruncation

TAIL_TOL = 1e-12

_MAGIC = b"AMLGSF01"
_HEADER = struct.Struct("<8sIId8x")  # 32 bytes


@dataclass(frozen=True)
class Grid:
    d: int
    n: int
    dx: float

    def __post_init__(self):
        if self.d not in (1, 2):
            raise InvalidParam(f"grid dimension must be 1 or 2, got {self.d}")
        if self.n < 8 or self.n & (self.n - 1):
            raise InvalidParam(f"samples per axis must be a power of two >= 8, got {self.n}")
        if not (self.dx > 0 and math.isfinite(self.dx)):
            raise InvalidParam(f"spacing must be positive, got {self.dx}")
        object.__setattr__(self, "dx", float(self.dx))

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.n,) * self.d

    @property
    def size(self) -> int:
        return self.n**self.d

    @property
    def extent(self) -> float:
        """Half-width ``n*dx/2`` of the grid."""
        return self.n * self.dx / 2

    @property
    def origin_index(self) -> int:
        return self.n // 2

    @property
    def cell(self) -> float:
        """Volume element ``dx**d``."""
        return self.dx**self.d

    def axis(self) -> np.ndarray:
        return (np.arange(self.n) - self.n // 2) * self.dx

    def radius_squared(self) -> np.ndarray:
        """``|x|**2`` at every grid point, shaped like the grid."""
        x = self.axis()
        if self.d == 1:
            return x * x
        return x[:, None] ** 2 + x[None, :] ** 2

    def reciprocal(self) -> "Grid":
        return Grid(self.d, self.n, 1.0 / (self.n * self.dx))


@dataclass(frozen=True, eq=False)
class SampledFunction:
    """Complex samples on a :class:`Grid`, stored with the grid's shape.

    A flat array of length ``n**d`` in row-major order is accepted and
    reshaped.  The stored array is read-only.
    """

    grid: Grid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.array(self.values, dtype=np.complex128)
        if v.size != self.grid.size:
            raise InvalidParam(f"expected {self.grid.size} samples, got {v.size}")
        v = v.reshape(self.grid.shape)
        if not np.all(np.isfinite(v)):
            raise InvalidParam("sample values must be finite")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    def with_values(self, values) -> "SampledFunction":
        return SampledFunction(self.grid, values)

    def scaled(self, c: complex) -> "SampledFunction":
        return SampledFunction(self.grid, c * self.values)

    def conj(self) -> "SampledFunction":
        return SampledFunction(self.grid, np.conj(self.values))

    def __add__(self, other: "SampledFunction") -> "SampledFunction":
        if other.grid != self.grid:
            raise GridMismatch("cannot add functions on different grids")
        return SampledFunction(self.grid, self.values + other.values)

    def peak(self) -> float:
        return float(np.max(np.abs(self.values)))

    def edge_ratio(self) -> float:
        """Largest boundary magnitude relative to the peak (0 for the zero function)."""
        return edge_ratio(self.values)

    def to_bytes(self) -> bytes:
        head = _HEADER.pack(_MAGIC, self.grid.d, self.grid.n, self.grid.dx)
        flat = np.ascontiguousarray(self.values.reshape(-1))
        inter = np.empty(2 * flat.size, dtype="<f8")
        inter[0::2] = flat.real
        inter[1::2] = flat.imag
        return head + inter.tobytes()

    @classmethod
    def from_bytes(cls, blob: bytes) -> "SampledFunction":
        if len(blob) < _HEADER.size:
            raise InvalidParam("truncated header")
        magic, d, n, dx = _HEADER.unpack_from(blob)
        if magic != _MAGIC:
            raise InvalidParam("bad magic in sampled-function file")
        grid = Grid(d, n, dx)
        data = np.frombuffer(blob, dtype="<f8", offset=_HEADER.size)
        if data.size != 2 * grid.size:
            raise InvalidParam("payload length does not match header")
        return cls(grid, data[0::2] + 1j * data[1::2])

    def save(self, path) -> None:
        Path(path).write_bytes(self.to_bytes())

    @classmethod
    def load(cls, path) -> "SampledFunction":
        return cls.from_bytes(Path(path).read_bytes())


def edge_ratio(values: np.ndarray) -> float:
    mag = np.abs(values)
    peak = mag.max() if mag.size else 0.0
    if peak == 0:
        return 0.0
    edge = 0.0
    for axis in range(mag.ndim):
        edge = max(edge, np.take(mag, 0, axis=axis).max(), np.take(mag, -1, axis=axis).max())
    return float(edge / peak)


def check_tails(values: np.ndarray, what: str = "function", tol: float = TAIL_TOL) -> None:
    r = edge_ratio(values)
    if r >= tol:
        raise TailTruncation(f"{what} is {r:.3g} of its peak at the grid boundary (limit {tol:g})")


# --- exponents ---------------------------------------------------------------

INF = math.inf


def parse_exponent(text) -> float:
    """Parse ``"2"``, ``"3/2"``, ``"inf"`` or ``"∞"`` into a Lebesgue exponent."""
    if isinstance(text, (int, float)):
        value = float(text)
    else:
        s = str(text).strip().lower()
        if s in ("inf", "infinity", "∞", "+inf"):
            value = INF
        else:
            try:
                value = float(Fraction(s))
            except (ValueError, ZeroDivisionError) as exc:
                raise InvalidParam(f"not a Lebesgue exponent: {text!r}") from exc
    check_exponent(value)
    return value


def check_exponent(p: float) -> None:
    if not (p >= 1 and (math.isfinite(p) or p == INF)):
        raise InvalidParam(f"Lebesgue exponent must lie in [1, inf], got {p}")


def reciprocal(p: float) -> float:
    """``1/p`` with ``1/inf = 0``."""
    return 0.0 if p == INF else 1.0 / p


def conjugate(p: float) -> float:
    check_exponent(p)
    if p == 1:
        return INF
    if p == INF:
        return 1.0
    return p / (p - 1)


def format_exponent(p: float) -> str:
    if p == INF:
        return "inf"
    return repr(float(p))


@dataclass(frozen=True)
class ExponentPair:
    p: float
    q: float

    def __post_init__(self):
        object.__setattr__(self, "p", parse_exponent(self.p))
        object.__setattr__(self, "q", parse_exponent(self.q))

    def conjugate(self) -> "ExponentPair":
        return ExponentPair(conjugate(self.p), conjugate(self.q))


# --- function families -------------------------------------------------------


class Convention(enum.Enum):
    PHI = "phi"  # exp(-pi*lam*|x|^2)
    U0 = "u0"  # exp(-pi*lam^2*|x|^2)


@dataclass(frozen=True)
class GaussianFamilyParam:
    lam: float
    convention: Convention = Convention.PHI

    def __post_init__(self):
        if not self.lam > 0:
            raise InvalidParam(f"lambda must be positive, got {self.lam}")

    @property
    def rate(self) -> float:
        """Coefficient ``c`` in ``exp(-pi*c*|x|^2)``."""
        return self.lam if self.convention is Convention.PHI else self.lam**2


class WitnessKind(enum.Enum):
    SMALL_LAMBDA = "small"
    LARGE_LAMBDA = "large"


@dataclass(frozen=True)
class WitnessSpec:
    kind: WitnessKind
    exponent: float
    eps: float

    def __post_init__(self):
        check_exponent(self.exponent)
        if not self.eps > 0:
            raise InvalidParam(f"epsilon must be positive, got {self.eps}")

    @property
    def power(self) -> float:
        """Power of ``|t|`` on the support."""
        if self.kind is WitnessKind.SMALL_LAMBDA:
            return -reciprocal(self.exponent) + self.eps
        return -reciprocal(self.exponent) - self.eps


def make_gaussian(grid: Grid, param: GaussianFamilyParam) -> SampledFunction:
    values = np.exp(-math.pi * param.rate * grid.radius_squared())
    check_tails(values, "Gaussian")
    return SampledFunction(grid, values)


def make_complex_gaussian(grid: Grid, a: float, b: float) -> SampledFunction:
    """Samples of ``(a+ib)^(-d/2) exp(-pi|x|^2/(a+ib))``, principal branch."""
    if not a > 0:
        raise InvalidParam(f"a must be positive, got {a}")
    c = complex(a, b)
    values = c ** (-grid.d / 2) * np.exp(-math.pi * grid.radius_squared() / c)
    check_tails(values, "complex Gaussian")
    return SampledFunction(grid, values)


def witness_values(grid: Grid, spec: WitnessSpec, lam: float = 1.0) -> np.ndarray:
    if grid.d != 1:
        raise InvalidParam("witness functions are one-dimensional")
    if not lam > 0:
        raise InvalidParam(f"lambda must be positive, got {lam}")
    t = np.abs(grid.axis())
    # cell-midpoint sample replaces the singular/degenerate origin
    t[grid.origin_index] = grid.dx / 2
    s = lam * t
    with np.errstate(divide="ignore"):
        powered = s**spec.power
    if spec.kind is WitnessKind.SMALL_LAMBDA:
        return np.where(s <= 1.0, powered, 0.0)
    return np.where(s >= 1.0, powered, 0.0)


def make_witness(grid: Grid, spec: WitnessSpec, lam: float = 1.0) -> SampledFunction:
    """Truncated power function, evaluated at ``lam * t`` (``lam=1`` gives the witness itself)."""
    return SampledFunction(grid, witness_values(grid, spec, lam))


def make_indicator(grid: Grid, lo: float, hi: float, edge: float = 0.5) -> SampledFunction:
    """Indicator of ``[lo, hi]`` (per axis); samples exactly on an endpoint get ``edge``."""
    x = grid.axis()
    tol = 1e-9 * grid.dx
    inside = ((x > lo + tol) & (x < hi - tol)).astype(float)
    on_edge = (np.abs(x - lo) <= tol) | (np.abs(x - hi) <= tol)
    line = np.where(on_edge, edge, inside)
    if grid.d == 2:
        line = line[:, None] * line[None, :]
    return SampledFunction(grid, line)


def bump(x: np.ndarray) -> np.ndarray:
    """The smooth mollifier ``exp(-1/(1-x^2))`` on ``|x| < 1``, zero outside."""
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    inside = np.abs(x) < 1
    out[inside] = np.exp(-1.0 / (1.0 - x[inside] ** 2))
    return out


def make_bump(grid: Grid, radius: float = 1.0, lam: float = 1.0) -> SampledFunction:
    """``bump(lam*|x|/radius)``: a smooth function supported in ``|x| <= radius/lam``."""
    return SampledFunction(grid, bump(lam * np.sqrt(grid.radius_squared()) / radius))


# --- elementary operators ----------------------------------------------------


def dilate(f: SampledFunction, lam: float) -> SampledFunction:
    """``f(lam*x)`` by linear interpolation; points mapped off the grid read as 0."""
    if not lam > 0:
        raise InvalidParam(f"lambda must be positive, got {lam}")
    if lam == 1:
        return f
    grid = f.grid
    x = grid.axis()
    if grid.d == 1:
        xs = lam * x
        re = np.interp(xs, x, f.values.real, left=0.0, right=0.0)
        im = np.interp(xs, x, f.values.imag, left=0.0, right=0.0)
        return SampledFunction(grid, re + 1j * im)
    from scipy.interpolate import RegularGridInterpolator

    interp = RegularGridInterpolator((x, x), f.values, bounds_error=False, fill_value=0.0)
    xx, yy = np.meshgrid(lam * x, lam * x, indexing="ij")
    return SampledFunction(grid, interp(np.stack([xx, yy], axis=-1)))


def _shift_steps(x0: float, dx: float) -> int:
    k = x0 / dx
    r = round(k)
    if abs(k - r) > 1e-9 * max(1.0, abs(k)):
        raise OffGridShift(f"shift {x0} is not a multiple of the spacing {dx}")
    return int(r)


def shift_array(values: np.ndarray, steps, circular: bool = False) -> np.ndarray:
    """Move samples ``steps`` cells towards larger indices along each axis."""
    steps = tuple(steps)
    if circular:
        return np.roll(values, steps, axis=tuple(range(len(steps))))
    out = values
    for axis, k in enumerate(steps):
        if k == 0:
            continue
        moved = np.zeros_like(out)
        n = out.shape[axis]
        if abs(k) < n:
            src = [slice(None)] * out.ndim
            dst = [slice(None)] * out.ndim
            if k > 0:
                src[axis], dst[axis] = slice(0, n - k), slice(k, n)
            else:
                src[axis], dst[axis] = slice(-k, n), slice(0, n + k)
            moved[tuple(dst)] = out[tuple(src)]
        out = moved
    return out


def translate(f: SampledFunction, x0, circular: bool = False) -> SampledFunction:
    """``f(t - x0)`` for an on-grid shift; zero-filled unless ``circular``."""
    offsets = np.atleast_1d(np.asarray(x0, dtype=float))
    if offsets.size == 1 and f.grid.d > 1:
        offsets = np.repeat(offsets, f.grid.d)
    if offsets.size != f.grid.d:
        raise InvalidParam(f"shift needs {f.grid.d} components")
    steps = [_shift_steps(v, f.grid.dx) for v in offsets]
    return SampledFunction(f.grid, shift_array(f.values, steps, circular))


def modulate(f: SampledFunction, xi0) -> SampledFunction:
    """``exp(2*pi*i*xi0.t) f(t)``."""
    grid = f.grid
    xi = np.atleast_1d(np.asarray(xi0, dtype=float))
    if xi.size == 1 and grid.d > 1:
        xi = np.repeat(xi, grid.d)
    x = grid.axis()
    if grid.d == 1:
        phase = xi[0] * x
    else:
        phase = xi[0] * x[:, None] + xi[1] * x[None, :]
    return SampledFunction(grid, np.exp(2j * math.pi * phase) * f.values)
