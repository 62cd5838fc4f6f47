"""Discrete norm engines: Lebesgue, Fourier-Lebesgue, mixed, amalgam and modulation.

All integrals are Riemann sums with the grid's cell volume; an infinite
exponent is a maximum over samples.  The amalgam and modulation engines
translate the window over every grid point (zero fill), so no lattice
equivalence constant enters the comparison with closed forms.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .errors import InvalidParam, SupportViolation, TailTruncation
from .grid import (
    INF,
    TAIL_TOL,
    ExponentPair,
    Grid,
    SampledFunction,
    bump,
    check_exponent,
    check_tails,
)
from .transforms import PhaseSpaceArray, fourier, inverse_fourier, iter_stft

# Gaussian window weights below this fraction of the peak are dropped.
_WINDOW_CUTOFF = 1e-20


class Space(enum.Enum):
    LP = "Lp"
    FLP = "FLp"
    W_LP_LQ = "W_Lp_Lq"
    W_FLP_LQ = "W_FLp_Lq"
    MPQ = "Mpq"


class Window(enum.Enum):
    GAUSSIAN = "gaussian"  # exp(-pi|x|^2)
    BOX = "box"  # indicator of the closed unit ball


_WINDOWED = (Space.W_LP_LQ, Space.W_FLP_LQ, Space.MPQ)


@dataclass(frozen=True)
class NormSpec:
    space: Space
    exponents: ExponentPair
    window: Window | None = None

    def __post_init__(self):
        if (self.space in _WINDOWED) != (self.window is not None):
            need = "requires" if self.space in _WINDOWED else "takes no"
            raise InvalidParam(f"{self.space.value} {need} a window")

    @property
    def p(self) -> float:
        return self.exponents.p

    @property
    def q(self) -> float:
        return self.exponents.q

    def evaluate(self, f: SampledFunction) -> float:
        p, q = self.p, self.q
        if self.space is Space.LP:
            return lp_norm(f, p)
        if self.space is Space.FLP:
            return flp_norm(f, p)
        if self.space is Space.W_LP_LQ:
            return amalgam_norm(f, Space.LP, p, q, self.window)
        if self.space is Space.W_FLP_LQ:
            return amalgam_norm(f, Space.FLP, p, q, self.window)
        return modulation_norm(f, p, q, self.window)


def _lp(values: np.ndarray, p: float, cell: float, axis=None) -> np.ndarray:
    mag = np.abs(values)
    if p == INF:
        return mag.max(axis=axis) if mag.size else 0.0
    if p == 1:
        return cell * mag.sum(axis=axis)
    return (cell * (mag**p).sum(axis=axis)) ** (1.0 / p)


def lp_norm(f: SampledFunction, p: float) -> float:
    check_exponent(p)
    return float(_lp(f.values, p, f.grid.cell))


def flp_norm(f: SampledFunction, p: float) -> float:
    return lp_norm(fourier(f), p)


def mixed_norm(V: PhaseSpaceArray, p: float, q: float) -> float:
    """Inner ``L^p`` over ``x`` (axis 0), outer ``L^q`` over ``xi``."""
    check_exponent(p)
    check_exponent(q)
    inner = _lp(V.values, p, V.x_grid.dx, axis=0)
    return float(_lp(inner, q, V.xi_grid.dx))


# --- windows -----------------------------------------------------------------


def window_function(grid: Grid, window: Window, normalized: bool = False) -> SampledFunction:
    """Window samples on ``grid``; BOX takes the value 1/2 on the unit sphere.

    ``normalized`` rescales to unit ``L^2`` norm (analytically, not from samples).
    """
    r2 = grid.radius_squared()
    if window is Window.GAUSSIAN:
        values = np.exp(-math.pi * r2)
        check_tails(values, "Gaussian window")
        scale = 2.0 ** (grid.d / 4) if normalized else 1.0
        return SampledFunction(grid, scale * values)
    if grid.d != 1:
        raise InvalidParam("the BOX window is implemented for d = 1")
    tol = 1e-9 * grid.dx
    r = np.sqrt(r2)
    values = np.where(r < 1 - tol, 1.0, np.where(np.abs(r - 1) <= tol, 0.5, 0.0))
    scale = 2.0**-0.5 if normalized else 1.0
    return SampledFunction(grid, scale * values)


def _offset_weights(window: Window, p: float, dx: float, n: int) -> np.ndarray:
    """Weights ``|g(s*dx)|^p`` for offsets ``s = -S..S`` (``|g|`` itself when p = inf).

    BOX uses trapezoid weights (1/2 on the sphere) for finite ``p`` so that the
    discrete Fubini identity is exact; for ``p = inf`` the closed ball counts fully.
    """
    if window is Window.GAUSSIAN:
        reach = math.sqrt(-math.log(_WINDOW_CUTOFF) / math.pi)
        s = np.arange(-min(n, math.ceil(reach / dx)), min(n, math.ceil(reach / dx)) + 1)
        base = np.exp(-math.pi * (s * dx) ** 2)
        return base if p == INF else base**p
    s_max = min(n, math.floor(1 / dx + 1e-9))
    s = np.arange(-s_max, s_max + 1)
    x = np.abs(s * dx)
    edge = np.abs(x - 1) <= 1e-9 * dx
    return np.where(edge, 1.0 if p == INF else 0.5, 1.0)


def _local_lp(f: SampledFunction, p: float, window: Window) -> np.ndarray:
    """``F(x_m) = ||f T_{x_m} g||_{L^p}`` for every grid translate."""
    mag = np.abs(f.values)
    w = _offset_weights(window, p, f.grid.dx, f.grid.n)
    if p == INF:
        if window is Window.BOX:
            return ndimage.maximum_filter1d(mag, size=w.size, mode="constant", cval=0.0)
        out = np.zeros_like(mag)
        half = w.size // 2
        for i, weight in enumerate(w):
            k = i - half
            shifted = np.zeros_like(mag)
            if k >= 0:
                shifted[: mag.size - k] = mag[k:]
            else:
                shifted[-k:] = mag[: mag.size + k]
            np.maximum(out, weight * shifted, out=out)
        return out
    acc = ndimage.correlate1d(mag**p, w, mode="constant", cval=0.0)
    np.maximum(acc, 0.0, out=acc)
    return (f.grid.dx * acc) ** (1.0 / p)


def _check_phase_space_input(f: SampledFunction) -> None:
    if f.grid.d != 1:
        raise InvalidParam("amalgam and modulation engines are implemented for d = 1")


def amalgam_norm(
    f: SampledFunction, local: Space, p: float, q: float, window: Window = Window.GAUSSIAN
) -> float:
    """Wiener amalgam norm with local component ``L^p`` or ``FL^p`` and global ``L^q``."""
    check_exponent(p)
    check_exponent(q)
    _check_phase_space_input(f)
    g = window_function(f.grid, window)
    if not np.any(f.values):
        return 0.0
    if local is Space.LP:
        F = _local_lp(f, p, window)
    elif local is Space.FLP:
        dxi = f.grid.reciprocal().dx
        F = np.empty(f.grid.n)
        for rows, block in iter_stft(f, g):
            F[rows.start : rows.stop] = _lp(block, p, dxi, axis=1)
    else:
        raise InvalidParam(f"local component must be Lp or FLp, got {local}")
    return float(_lp(F, q, f.grid.dx))


def modulation_norm(
    f: SampledFunction,
    p: float,
    q: float,
    window: Window = Window.GAUSSIAN,
    normalized: bool = True,
    tail_tol: float | None = TAIL_TOL,
) -> float:
    """``||V_g f||_{L^{p,q}}`` streamed block-wise over translates.

    With ``normalized`` the window has unit ``L^2`` norm, so ``p = q = 2``
    reproduces ``||f||_{L^2}``.  ``tail_tol=None`` skips the boundary check.
    """
    return modulation_norms(f, [(p, q)], window, normalized, tail_tol)[0]


def modulation_norms(
    f: SampledFunction,
    pairs,
    window: Window = Window.GAUSSIAN,
    normalized: bool = True,
    tail_tol: float | None = TAIL_TOL,
) -> list[float]:
    """:func:`modulation_norm` for several ``(p, q)`` from a single pass over the STFT."""
    pairs = [(float(p), float(q)) for p, q in pairs]
    for p, q in pairs:
        check_exponent(p)
        check_exponent(q)
    _check_phase_space_input(f)
    g = window_function(f.grid, window, normalized=normalized)
    if not np.any(f.values):
        return [0.0] * len(pairs)
    if tail_tol is not None:
        check_tails(f.values, "function", tail_tol)
    ps = sorted({p for p, _ in pairs})
    acc = {p: np.zeros(f.grid.n) for p in ps}
    for _, block in iter_stft(f, g):
        mag = np.abs(block)
        for p in ps:
            if p == INF:
                np.maximum(acc[p], mag.max(axis=0), out=acc[p])
            else:
                acc[p] += (mag**p).sum(axis=0)
    dxi = f.grid.reciprocal().dx
    out = []
    for p, q in pairs:
        inner = acc[p] if p == INF else (f.grid.dx * acc[p]) ** (1.0 / p)
        out.append(float(_lp(inner, q, dxi)))
    return out


# --- partition of unity in frequency ------------------------------------------


@dataclass(frozen=True)
class PartitionWindow:
    """Smooth ``nu`` with ``sum_k nu(xi - k) = 1``, built from the mollifier.

    ``nu = psi / sum_k psi(. - k)`` with ``psi(xi) = bump(xi/support)``; it is
    supported in ``|xi| < support`` and identically 1 on ``|xi| <= 1 - support``.
    Lattice points ``|k| <= radius`` are used.
    """

    radius: int
    support: float = 1.0

    def __post_init__(self):
        if self.radius < 1:
            raise InvalidParam("lattice radius must be at least 1")
        if not 0.5 < self.support <= 1.0:
            raise InvalidParam("support must lie in (1/2, 1]")

    def __call__(self, xi) -> np.ndarray:
        xi = np.asarray(xi, dtype=float)
        base = np.rint(xi)
        total = sum(bump((xi - base - k) / self.support) for k in range(-2, 3))
        return bump(xi / self.support) / total

    def lattice(self) -> range:
        return range(-self.radius, self.radius + 1)


def modulation_norm_partition(
    f: SampledFunction, p: float, q: float, nu: PartitionWindow, tail_tol: float = TAIL_TOL
) -> float:
    """``(sum_k ||nu(D-k) f||_{L^p}^q)^{1/q}`` over ``|k| <= nu.radius``."""
    check_exponent(p)
    check_exponent(q)
    _check_phase_space_input(f)
    F = fourier(f)
    xi = F.grid.axis()
    if F.grid.extent < nu.radius + nu.support:
        raise InvalidParam("frequency grid does not cover the partition lattice")
    if not np.any(F.values):
        return 0.0
    mag = np.abs(F.values)
    outside = np.abs(xi) > nu.radius - 1
    if outside.any() and mag[outside].max() > tail_tol * mag.max():
        raise TailTruncation(f"spectrum not negligible beyond |xi| = {nu.radius - 1}")
    pieces = np.array(
        [lp_norm(inverse_fourier(F.with_values(F.values * nu(xi - k)), f.grid), p) for k in nu.lattice()]
    )
    return float(_lp(pieces, q, 1.0))


class Side(enum.Enum):
    TIME = "time"
    FREQUENCY = "frequency"


@dataclass(frozen=True)
class EquivalenceReport:
    side: Side
    modulation: float
    reference: float  # ||f||_{FL^q} (time side) or ||f||_{L^p} (frequency side)
    ratio: float  # modulation / reference
    inverse_ratio: float
    zero: bool


def compact_support_equivalence_check(
    f: SampledFunction,
    p: float,
    q: float,
    side: Side = Side.TIME,
    radius: float = 1.0,
    window: Window = Window.GAUSSIAN,
    tail_tol: float | None = TAIL_TOL,
    support_tol: float = 1e-12,
) -> EquivalenceReport:
    """Compare ``M^{p,q}`` with ``FL^q`` (time support) or ``L^p`` (frequency support)."""
    return equivalence_reports(f, [(p, q)], side, radius, window, tail_tol, support_tol)[0]


def equivalence_reports(
    f: SampledFunction,
    pairs,
    side: Side = Side.TIME,
    radius: float = 1.0,
    window: Window = Window.GAUSSIAN,
    tail_tol: float | None = TAIL_TOL,
    support_tol: float = 1e-12,
) -> list[EquivalenceReport]:
    """:func:`compact_support_equivalence_check` for several ``(p, q)`` at once."""
    pairs = list(pairs)
    if side is Side.TIME:
        r = np.sqrt(f.grid.radius_squared())
        mag = np.abs(f.values)
    else:
        F = fourier(f)
        r = np.sqrt(F.grid.radius_squared())
        mag = np.abs(F.values)
    peak = mag.max() if mag.size else 0.0
    if peak == 0:
        return [EquivalenceReport(side, 0.0, 0.0, math.nan, math.nan, True) for _ in pairs]
    outside = r > radius * (1 + 1e-12)
    if outside.any() and mag[outside].max() > support_tol * peak:
        raise SupportViolation(f"{side.value} support exceeds radius {radius}")
    mods = modulation_norms(f, pairs, window, tail_tol=tail_tol)
    reports = []
    for (p, q), m in zip(pairs, mods):
        ref = flp_norm(f, q) if side is Side.TIME else lp_norm(f, p)
        reports.append(EquivalenceReport(side, m, ref, m / ref, ref / m, False))
    return reports
