import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from muhs import evolution, geometry as geo, spectral
from muhs.errors import DegeneratePlane
from muhs.spectral import PeriodicGrid, RealField

from conftest import TWO_PI, cos1, sin1

seeds = st.integers(min_value=0, max_value=2**32 - 1)
G = PeriodicGrid(64)
ONE = G.constant(1.0)
HORIZONTAL_FLOOR = 0.25 * (1 - 3 / np.pi ** 2)


def random_pair(seed, zero_mean=False, n=64, kmax=6):
    rng = np.random.default_rng(seed)
    grid = PeriodicGrid(n)
    return tuple(spectral.random_bandlimited(grid, rng, kmax=kmax, zero_mean=zero_mean) for _ in range(2))


def mu_ux_v(u, v):
    return spectral.mean(spectral.derivative(u) * v)


def test_metric_examples():
    assert geo.metric_inner(ONE, ONE) == pytest.approx(1.0, abs=1e-15)
    assert geo.metric_inner(ONE, sin1(64)) == pytest.approx(0.0, abs=1e-15)
    assert geo.metric_inner(cos1(64), cos1(64)) == pytest.approx(2 * np.pi ** 2, rel=1e-14)


def test_christoffel_examples():
    assert spectral.sup_norm(geo.christoffel(ONE, ONE)) == 0.0
    u = cos1(64)
    np.testing.assert_allclose(geo.christoffel(u, u).samples, -np.pi / 4 * np.sin(2 * TWO_PI * u.x), atol=1e-13)


@settings(max_examples=20, deadline=None)
@given(seeds)
def test_christoffel_symmetric(seed):
    u, v = random_pair(seed)
    assert spectral.sup_norm(geo.christoffel(u, v) - geo.christoffel(v, u)) < 1e-12 * max(1.0, spectral.c1_norm(u) * spectral.c1_norm(v))


def test_christoffel_matches_spectral_composition():
    u, v = random_pair(7, kmax=5)
    mu_u, mu_v = spectral.mean(u), spectral.mean(v)
    inner = mu_u * v + mu_v * u + 0.5 * spectral.derivative(u) * spectral.derivative(v)
    ref = -spectral.ainv_dx(inner)
    assert spectral.sup_norm(geo.christoffel(u, v) - ref) < 1e-10


def test_coadjoint_of_constant_is_translation():
    u = RealField(G, np.cos(TWO_PI * G.x) + 0.3 * np.sin(3 * TWO_PI * G.x))
    ad = geo.coadjoint(G.constant(2.5), u)
    assert spectral.sup_norm(ad - 2.5 * spectral.derivative(u)) < 1e-10


@settings(max_examples=20, deadline=None)
@given(seeds)
def test_coadjoint_duality(seed):
    rng = np.random.default_rng(seed)
    u, v, w = (spectral.random_bandlimited(G, rng, kmax=5) for _ in range(3))
    bracket = spectral.derivative(v) * w - v * spectral.derivative(w)
    lhs = geo.metric_inner(geo.coadjoint(v, u), w)
    rhs = geo.metric_inner(u, bracket)
    scale = max(1.0, abs(lhs), abs(rhs))
    assert abs(lhs - rhs) < 1e-9 * scale


@settings(max_examples=10, deadline=None)
@given(seeds)
def test_euler_equation_is_coadjoint_flow(seed):
    u, _ = random_pair(seed, n=128, kmax=6)
    residual = evolution.rhs(u, 0.0) + geo.coadjoint(u, u)
    assert spectral.sup_norm(residual) < 1e-10 * max(1.0, spectral.sup_norm(evolution.rhs(u, 0.0)))


def test_curvature_degenerate_when_equal():
    u, _ = random_pair(3)
    assert geo.curvature_quadratic(u, u) == pytest.approx(0.0, abs=1e-10)


@pytest.mark.parametrize("seed", range(20))
def test_two_formulas_agree(seed):
    u, v = random_pair(seed)
    a, b = geo.curvature_quadratic(u, v), geo.curvature_expanded(u, v)
    assert abs(a - b) <= 1e-10 * max(1.0, abs(a))


def test_vertical_plane_formula():
    rng = np.random.default_rng(11)
    for _ in range(10):
        v = spectral.random_bandlimited(G, rng, kmax=6, zero_mean=True)
        v = v * (1.0 / np.sqrt(spectral.mean(spectral.derivative(v) ** 2)))
        assert geo.curvature_quadratic(ONE, v) == pytest.approx(spectral.mean(v * v), abs=1e-9)
        unnormalised = 3.7 * v
        ratio = spectral.mean(unnormalised ** 2) / spectral.mean(spectral.derivative(unnormalised) ** 2)
        assert geo.sectional(ONE, unnormalised) == pytest.approx(ratio, abs=1e-9)


@pytest.mark.parametrize("n", range(1, 6))
def test_vanishing_curvature_sequence(n):
    grid = PeriodicGrid(128)
    v = grid.from_function(lambda x: np.sqrt(2) * np.sin(TWO_PI * n * x) / (TWO_PI * n))
    assert geo.curvature_expanded(grid.constant(1.0), v) == pytest.approx(1 / (4 * np.pi ** 2 * n ** 2), abs=1e-9)
    assert geo.sectional(grid.constant(1.0), v) == pytest.approx(1 / (4 * np.pi ** 2 * n ** 2), abs=1e-9)


def test_horizontal_planes_positive():
    rng = np.random.default_rng(12345)
    for _ in range(200):
        u, v = (spectral.random_bandlimited(G, rng, kmax=8, zero_mean=True) for _ in range(2))
        pair = geo.orthonormal_pair(u, v)
        k = geo.curvature_quadratic(pair.u, pair.v)
        assert k == pytest.approx(0.25 - 3 * mu_ux_v(pair.u, pair.v) ** 2, abs=1e-9)
        assert k >= HORIZONTAL_FLOOR - 1e-9
        assert geo.sectional(u, v) == pytest.approx(k, abs=1e-9)


@settings(max_examples=20, deadline=None)
@given(seeds, st.floats(-3, 3), st.floats(0.2, 3))
def test_recombination_invariance(seed, a, b):
    u, v = random_pair(seed)
    k = geo.sectional(u, v)
    assert geo.sectional(u + v, v) == pytest.approx(k, abs=1e-9, rel=1e-9)
    assert geo.sectional(b * u + a * v, v) == pytest.approx(k, abs=1e-9, rel=1e-9)


@settings(max_examples=20, deadline=None)
@given(seeds)
def test_orthonormal_pair(seed):
    u, v = random_pair(seed)
    pair = geo.orthonormal_pair(u, v)
    np.testing.assert_allclose(pair.gram, np.eye(2), atol=1e-12)
    assert spectral.mean(pair.v) == pytest.approx(0.0, abs=1e-12)
    assert geo.sectional(pair.u, pair.v) == pytest.approx(geo.sectional(u, v), abs=1e-9, rel=1e-9)


def test_orthonormal_pair_example():
    s = sin1(64)
    pair = geo.orthonormal_pair(ONE, ONE + s)
    assert spectral.sup_norm(pair.u - ONE) < 1e-14
    assert spectral.sup_norm(pair.v - s * (1 / (np.sqrt(2) * np.pi))) < 1e-14


def test_degenerate_planes():
    u = cos1(64)
    with pytest.raises(DegeneratePlane):
        geo.sectional(u, 2.0 * u)
    with pytest.raises(DegeneratePlane):
        geo.orthonormal_pair(u, -u)
