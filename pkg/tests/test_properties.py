import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from amalgam_lab.grid import INF, Grid, SampledFunction, modulate, translate
from amalgam_lab.norms import Space, Window, amalgam_norm, flp_norm, lp_norm, modulation_norm, window_function
from amalgam_lab.schrodinger import evolve
from amalgam_lab.transforms import convolve, fourier, stft

from conftest import gaussian_mixture

G = Grid(1, 256, 1 / 16)
seeds = st.integers(0, 2**32 - 1)
exponents = st.sampled_from([1.0, 1.5, 2.0, 4.0, INF])
scalars = st.complex_numbers(min_magnitude=1e-3, max_magnitude=1e3, allow_nan=False, allow_infinity=False)
profile = settings(max_examples=25, deadline=None)


def norms(f, p, q):
    return (
        lp_norm(f, p),
        flp_norm(f, p),
        amalgam_norm(f, Space.LP, p, q, Window.GAUSSIAN),
        amalgam_norm(f, Space.FLP, p, q, Window.BOX),
        modulation_norm(f, p, q),
    )


@profile
@given(seeds, scalars, exponents, exponents)
def test_homogeneity(seed, c, p, q):
    f = gaussian_mixture(G, seed)
    cf = SampledFunction(G, c * f.values)
    for a, b in zip(norms(cf, p, q), norms(f, p, q)):
        assert a == pytest.approx(abs(c) * b, rel=1e-12)


@profile
@given(seeds, seeds, exponents, exponents)
def test_triangle_inequality(s1, s2, p, q):
    f, g = gaussian_mixture(G, s1), gaussian_mixture(G, s2)
    h = SampledFunction(G, f.values + g.values)
    for nh, nf, ng in zip(norms(h, p, q), norms(f, p, q), norms(g, p, q)):
        assert nh <= (nf + ng) * (1 + 1e-12)


@profile
@given(seeds)
def test_plancherel_and_unit_window(seed):
    f = gaussian_mixture(G, seed)
    assert flp_norm(f, 2) == pytest.approx(lp_norm(f, 2), rel=1e-10)
    assert modulation_norm(f, 2, 2) == pytest.approx(lp_norm(f, 2), rel=1e-10)


@profile
@given(seeds, exponents)
def test_fubini_for_box_window(seed, p):
    f = gaussian_mixture(G, seed)
    lhs = amalgam_norm(f, Space.LP, p, p, Window.BOX)
    rhs = (2.0 ** (1 / p) if p != INF else 1.0) * lp_norm(f, p)
    assert lhs == pytest.approx(rhs, rel=1e-10)


@profile
@given(seeds, seeds)
def test_convolution_theorem(s1, s2):
    f, g = gaussian_mixture(G, s1), gaussian_mixture(G, s2)
    lhs = fourier(convolve(f, g)).values
    rhs = fourier(f).values * fourier(g).values
    assert np.max(np.abs(lhs - rhs)) <= 1e-8 * np.max(np.abs(rhs))


@profile
@given(seeds, st.integers(-16, 16), st.integers(-8, 8))
def test_stft_covariance(seed, shift, freq):
    # |V_g(M_eta T_y f)(x, xi)| = |V_g f(x - y, xi - eta)| for on-grid y, eta
    f = gaussian_mixture(G, seed)
    g = window_function(G, Window.GAUSSIAN)
    y, eta = shift * G.dx, freq * G.reciprocal().dx
    moved = modulate(translate(f, y, circular=True), eta)
    a = np.abs(stft(moved, g).values)
    b = np.abs(np.roll(stft(f, g).values, (shift, freq), axis=(0, 1)))
    inner = slice(48, -48)  # away from the rows where the circular shift wraps
    assert np.max(np.abs(a[inner, inner] - b[inner, inner])) <= 1e-10 * np.max(b)


@profile
@given(seeds, st.floats(-0.05, 0.05), st.floats(-0.05, 0.05))
def test_schrodinger_group_law_and_reversal(seed, s, t):
    f = gaussian_mixture(G, seed)
    assert np.max(np.abs(evolve(evolve(f, s), t).values - evolve(f, s + t).values)) < 1e-10
    assert np.max(np.abs(evolve(evolve(f, t), -t).values - f.values)) < 1e-10
    assert lp_norm(evolve(f, t), 2) == pytest.approx(lp_norm(f, 2), rel=1e-10)
