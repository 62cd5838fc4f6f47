"""Discrete stand-ins for the continuous Fourier transform, convolution and STFT.

Conventions (``d = 1`` shown, tensor products otherwise)::

    fourier(f)(xi_k) = dx * sum_j f(x_j) exp(-2 pi i xi_k x_j)
    inverse(F)(x_j)  = dxi * sum_k F(xi_k) exp(+2 pi i xi_k x_j)
    V_g f(x_m, xi_k) = dx * sum_j f(x_j) conj(g(x_j - x_m)) exp(-2 pi i xi_k x_j)

Both grids are origin-centred with even ``n``, so the phase factors reduce to
``ifftshift`` before and ``fftshift`` after the FFT.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from .errors import GridMismatch, InvalidParam
from .grid import Grid, SampledFunction, check_tails

STFT_BLOCK = 256


def _axes(d: int) -> tuple[int, ...]:
    return tuple(range(-d, 0))


def _fwd(values: np.ndarray, d: int) -> np.ndarray:
    ax = _axes(d)
    return np.fft.fftshift(np.fft.fftn(np.fft.ifftshift(values, axes=ax), axes=ax), axes=ax)


def _inv(values: np.ndarray, d: int) -> np.ndarray:
    ax = _axes(d)
    return np.fft.fftshift(np.fft.ifftn(np.fft.ifftshift(values, axes=ax), axes=ax), axes=ax)


def fourier(f: SampledFunction) -> SampledFunction:
    """Transform onto the reciprocal grid, ``xi = 0`` at the centre sample."""
    grid = f.grid
    return SampledFunction(grid.reciprocal(), grid.cell * _fwd(f.values, grid.d))


def inverse_fourier(F: SampledFunction, grid: Grid | None = None) -> SampledFunction:
    """Inverse of :func:`fourier`; ``grid`` (if given) must be reciprocal to ``F.grid``."""
    fgrid = F.grid
    target = fgrid.reciprocal()
    if grid is not None:
        if grid.d != fgrid.d or grid.n != fgrid.n or not math.isclose(
            grid.dx * fgrid.dx * grid.n, 1.0, rel_tol=1e-12
        ):
            raise GridMismatch("target grid is not reciprocal to the frequency grid")
        target = grid
    scale = (fgrid.n * fgrid.dx) ** fgrid.d
    return SampledFunction(target, scale * _inv(F.values, fgrid.d))


def _same_grid(f: SampledFunction, g: SampledFunction) -> Grid:
    if f.grid != g.grid:
        raise GridMismatch(f"{f.grid} != {g.grid}")
    return f.grid


def convolve(f: SampledFunction, g: SampledFunction) -> SampledFunction:
    """Linear convolution ``int f(t-s) g(s) ds`` via a zero-padded FFT."""
    grid = _same_grid(f, g)
    check_tails(f.values, "convolution factor")
    check_tails(g.values, "convolution factor")
    n, d = grid.n, grid.d
    ax = _axes(d)
    shape = (2 * n,) * d
    full = np.fft.ifftn(np.fft.fftn(f.values, shape, axes=ax) * np.fft.fftn(g.values, shape, axes=ax), axes=ax)
    # full index m sits at (m - n)*dx; keep m = n/2 .. 3n/2 - 1
    window = tuple(slice(n // 2, n // 2 + n) for _ in range(d))
    return SampledFunction(grid, grid.cell * full[window])


def pointwise_product(f: SampledFunction, g: SampledFunction) -> SampledFunction:
    grid = _same_grid(f, g)
    return SampledFunction(grid, f.values * g.values)


@dataclass(frozen=True, eq=False)
class PhaseSpaceArray:
    """``values[m, k] = V_g f(x_m, xi_k)`` on ``x_grid`` x ``xi_grid``."""

    x_grid: Grid
    xi_grid: Grid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        if not math.isclose(self.x_grid.dx * self.xi_grid.dx * self.x_grid.n, 1.0, rel_tol=1e-12):
            raise GridMismatch("phase-space grids violate dx*dxi = 1/n")
        v = np.asarray(self.values, dtype=np.complex128)
        if v.shape != (self.x_grid.n, self.xi_grid.n):
            raise GridMismatch(f"phase-space array has shape {v.shape}")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)


def _translate_matrix(g: np.ndarray, rows: range) -> np.ndarray:
    """Rows ``g(t - x_m)`` (zero-filled) for ``m`` in ``rows``."""
    n = g.size
    padded = np.zeros(3 * n, dtype=g.dtype)
    padded[n : 2 * n] = g
    # row m needs padded[n + j - (m - n/2)], j = 0..n-1
    starts = np.array([3 * n // 2 - m for m in rows])
    idx = starts[:, None] + np.arange(n)[None, :]
    return padded[idx]


def iter_stft(
    f: SampledFunction, g: SampledFunction, block: int = STFT_BLOCK
) -> Iterator[tuple[range, np.ndarray]]:
    """Yield ``(rows, V[rows, :])`` blocks of the STFT in increasing ``x`` order."""
    grid = _same_grid(f, g)
    if grid.d != 1:
        raise InvalidParam("the short-time Fourier transform is implemented for d = 1")
    n = grid.n
    gc = np.conj(g.values)
    for start in range(0, n, block):
        rows = range(start, min(start + block, n))
        prod = f.values[None, :] * _translate_matrix(gc, rows)
        yield rows, grid.dx * _fwd(prod, 1)


def stft(f: SampledFunction, g: SampledFunction) -> PhaseSpaceArray:
    """Full phase-space array; memory is ``16*n**2`` bytes, so keep ``n`` moderate."""
    grid = _same_grid(f, g)
    out = np.empty((grid.n, grid.n), dtype=np.complex128)
    for rows, block in iter_stft(f, g):
        out[rows.start : rows.stop] = block
    return PhaseSpaceArray(grid, grid.reciprocal(), out)
