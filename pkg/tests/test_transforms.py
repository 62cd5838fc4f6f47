import math

import numpy as np
import pytest

from amalgam_lab.errors import GridMismatch, InvalidParam, TailTruncation
from amalgam_lab.grid import Grid, SampledFunction, make_indicator, translate
from amalgam_lab.transforms import (
    PhaseSpaceArray,
    convolve,
    fourier,
    inverse_fourier,
    iter_stft,
    pointwise_product,
    stft,
)

from conftest import gaussian_mixture, phi

FINE = Grid(1, 4096, 1 / 64)


def test_gaussian_is_self_dual():
    F = fourier(phi(FINE, 1.0))
    xi = F.grid.axis()
    assert F.grid == FINE.reciprocal()
    assert np.max(np.abs(F.values - np.exp(-np.pi * xi**2))) <= 1e-8


@pytest.mark.parametrize("lam", [0.5, 2.0, 4.0])
def test_dilated_gaussian_transform(lam):
    F = fourier(phi(FINE, lam))
    expected = lam**-0.5 * phi(F.grid, 1 / lam).values
    assert np.max(np.abs(F.values - expected)) <= 1e-8


def test_box_transform_is_sinc():
    F = fourier(make_indicator(FINE, -0.5, 0.5))
    xi = F.grid.axis()
    near = np.abs(xi) <= 4
    assert np.max(np.abs(F.values[near] - np.sinc(xi[near]))) <= 1e-3


def test_inverse_round_trips(grid):
    f = gaussian_mixture(grid, 1)
    back = inverse_fourier(fourier(f), grid)
    assert back.grid == grid
    assert np.max(np.abs(back.values - f.values)) <= 1e-12 * f.peak()
    F = fourier(f)
    again = fourier(inverse_fourier(F))
    assert np.max(np.abs(again.values - F.values)) <= 1e-12 * F.peak()
    xi = FINE.reciprocal()
    g = inverse_fourier(SampledFunction(xi, np.exp(-np.pi * xi.axis() ** 2)))
    assert np.max(np.abs(g.values - phi(FINE, 1.0).values)) <= 1e-8


def test_inverse_rejects_non_reciprocal_target(grid):
    F = fourier(phi(grid, 1.0))
    with pytest.raises(GridMismatch):
        inverse_fourier(F, Grid(1, grid.n, grid.dx * 2))


def test_two_dimensional_transform():
    g = Grid(2, 128, 1 / 8)
    F = fourier(phi(g, 1.0))
    assert np.max(np.abs(F.values - phi(F.grid, 1.0).values)) <= 1e-10


def test_gaussian_self_convolution():
    f = phi(FINE, 1.0)
    h = convolve(f, f)
    expected = 2**-0.5 * phi(FINE, 0.5).values
    assert np.max(np.abs(h.values - expected)) / np.max(np.abs(expected)) <= 1e-6


def test_box_convolution_is_triangle():
    g = Grid(1, 1024, 1 / 64)
    box = make_indicator(g, -0.5, 0.5)
    tri = convolve(box, box).values.real
    x = g.axis()
    # the half-weight edge samples leave an O(dx) error at the apex
    assert np.max(np.abs(tri - np.clip(1 - np.abs(x), 0, None))) <= g.dx


def test_convolution_with_narrow_mollifier():
    g = Grid(1, 16384, 1 / 2048)  # resolves the width 1/sqrt(lam)
    f = phi(g, 1.0)
    lam = 1e4
    delta = phi(g, lam).scaled(math.sqrt(lam))  # unit mass
    assert np.max(np.abs(convolve(f, delta).values - f.values)) <= 1e-2


def test_convolution_rejects_tails_and_grids():
    g = Grid(1, 64, 1 / 8)
    wide = SampledFunction(g, np.ones(64))
    with pytest.raises(TailTruncation):
        convolve(wide, wide)
    with pytest.raises(GridMismatch):
        convolve(phi(FINE, 1.0), phi(Grid(1, 4096, 1 / 32), 1.0))


def test_pointwise_product(grid):
    f = phi(grid, 1.5)
    assert np.allclose(pointwise_product(f, f).values, phi(grid, 3.0).values, rtol=1e-14, atol=0)
    one = SampledFunction(grid, np.ones(grid.n))
    assert np.array_equal(pointwise_product(f, one).values, f.values)
    zero = SampledFunction(grid, np.zeros(grid.n))
    assert not np.any(pointwise_product(f, zero).values)
    with pytest.raises(GridMismatch):
        pointwise_product(f, phi(Grid(1, 256, 1 / 16), 1.0))


def test_stft_of_gaussian_pair():
    g = Grid(1, 512, 1 / 16)
    f = phi(g, 1.0)
    V = stft(f, f)
    x, xi = g.axis(), g.reciprocal().axis()
    expected = 2**-0.5 * np.exp(-np.pi * (x[:, None] ** 2 + xi[None, :] ** 2) / 2)
    assert np.max(np.abs(np.abs(V.values) - expected)) <= 1e-6
    o = g.origin_index
    assert V.values[o, o] == pytest.approx(g.dx * np.sum(f.values * np.conj(f.values)), abs=1e-15)


def test_stft_orthogonality():
    g = Grid(1, 512, 1 / 16)
    f = gaussian_mixture(g, 3)
    w = phi(g, 1.0)
    V = stft(f, w)
    total = math.sqrt(g.dx * g.reciprocal().dx * np.sum(np.abs(V.values) ** 2))
    l2 = lambda h: math.sqrt(g.dx * np.sum(np.abs(h.values) ** 2))  # noqa: E731
    assert total == pytest.approx(l2(f) * l2(w), rel=1e-6)


def test_stft_blocks_cover_all_rows():
    g = Grid(1, 64, 1 / 4)
    f = phi(g, 1.0)
    rows = [r for r, _ in iter_stft(f, f, block=24)]
    assert [(r.start, r.stop) for r in rows] == [(0, 24), (24, 48), (48, 64)]
    full = np.vstack([b for _, b in iter_stft(f, f, block=24)])
    assert np.array_equal(full, stft(f, f).values)


def test_stft_covariance_under_translation():
    g = Grid(1, 256, 1 / 16)
    f = phi(g, 2.0)
    w = phi(g, 1.0)
    s = 16
    V = np.abs(stft(f, w).values)
    Vt = np.abs(stft(translate(f, s * g.dx), w).values)
    assert np.max(np.abs(Vt[s + 40 : -40] - V[40 : -40 - s])) <= 1e-14


def test_stft_rejects_two_dimensions():
    g = Grid(2, 16, 1.0)
    f = SampledFunction(g, np.zeros(256))
    with pytest.raises(InvalidParam):
        stft(f, f)


def test_phase_space_array_validation():
    g = Grid(1, 8, 1.0)
    PhaseSpaceArray(g, g.reciprocal(), np.zeros((8, 8)))
    with pytest.raises(GridMismatch):
        PhaseSpaceArray(g, g, np.zeros((8, 8)))
    with pytest.raises(GridMismatch):
        PhaseSpaceArray(g, g.reciprocal(), np.zeros((8, 4)))
