import numpy as np
import pytest

from amalgam_lab.grid import Convention, GaussianFamilyParam, Grid, SampledFunction, make_gaussian


@pytest.fixture
def grid():
    return Grid(1, 512, 1 / 16)


@pytest.fixture
def gauss(grid):
    return make_gaussian(grid, GaussianFamilyParam(1.0))


def phi(grid, lam):
    return make_gaussian(grid, GaussianFamilyParam(lam, Convention.PHI))


def gaussian_mixture(grid, seed, terms=3):
    """Random sum of modulated, translated Gaussians that stays well inside ``grid``."""
    rng = np.random.default_rng(seed)
    x = grid.axis()
    values = np.zeros(grid.n, dtype=complex)
    for _ in range(terms):
        c = rng.normal() + 1j * rng.normal()
        x0 = rng.uniform(-2, 2)
        xi0 = rng.uniform(-2, 2)
        rate = rng.uniform(0.5, 2.0)
        values += c * np.exp(-np.pi * rate * (x - x0) ** 2 + 2j * np.pi * xi0 * x)
    return SampledFunction(grid, values)
