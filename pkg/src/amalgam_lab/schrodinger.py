"""Free Schrödinger flow as the Fourier multiplier ``exp(-i t |2 pi xi|^2)``."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .grid import TAIL_TOL, Grid, SampledFunction, check_tails
from .norms import Window, modulation_norm
from .transforms import fourier, inverse_fourier


@dataclass(frozen=True)
class PropagatorSpec:
    t: float
    grid: Grid

    def symbol(self) -> np.ndarray:
        xi2 = self.grid.reciprocal().radius_squared()
        return np.exp(-1j * self.t * (2 * math.pi) ** 2 * xi2)


def evolve(u0: SampledFunction, t: float, tail_tol: float = TAIL_TOL) -> SampledFunction:
    """``e^{it Delta} u0`` on the periodic grid.

    The multiplier is applied exactly; the only error is aliasing of whatever
    part of the solution spreads past the grid edge.
    """
    U = fourier(u0)
    if np.any(U.values):
        check_tails(U.values, "initial spectrum", tail_tol)
    if t == 0:
        return u0
    return inverse_fourier(U.with_values(U.values * PropagatorSpec(t, u0.grid).symbol()), u0.grid)


def evolve_and_norm(
    u0: SampledFunction, t: float, p: float, q: float, window: Window = Window.GAUSSIAN, **kw
) -> float:
    """``||e^{it Delta} u0||_{M^{p,q}}``; keyword arguments go to :func:`modulation_norm`."""
    return modulation_norm(evolve(u0, t), p, q, window, **kw)
