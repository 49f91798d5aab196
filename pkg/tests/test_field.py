import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from normsol import field as fld
from normsol.exceptions import DomainError
from normsol.field import RadialGrid


def test_weights_sum_to_ball_volume():
    ball = 4 / 3 * math.pi * 125
    # uniform cells use the midpoint rule, clustered cells exact shell volumes
    assert RadialGrid(N=3, r_max=5.0, n=300).weights.sum() == pytest.approx(ball, rel=1e-5)
    for stretch in (3.0, 12.0):
        g = RadialGrid(N=3, r_max=5.0, n=300, stretch=stretch)
        assert g.weights.sum() == pytest.approx(ball, rel=1e-13)


def test_uniform_stretch_zero_identical():
    a = RadialGrid(N=3, r_max=10.0, n=64)
    assert a.uniform
    np.testing.assert_array_equal(a.r, (np.arange(64) + 0.5) * a.h)


def test_gaussian_norms_match_closed_form():
    g = RadialGrid(N=3, r_max=12.0, n=4096)
    w = 1.3
    u = g.gaussian(w)
    # u = exp(-r^2 / (2 w^2))
    assert fld.mass_squared(u) == pytest.approx(math.pi**1.5 * w**3, rel=1e-6)
    assert fld.grad_norm_squared(u) == pytest.approx(1.5 * math.pi**1.5 * w, rel=1e-5)


@settings(max_examples=25, deadline=None)
@given(s=st.floats(0.6, 1.8))
def test_scale_star_preserves_mass_and_scales_gradient(s):
    g = RadialGrid(N=3, r_max=30.0, n=2048)
    u = g.gaussian(1.5)
    v = fld.scale_star(s, u)
    assert fld.mass(v) == pytest.approx(fld.mass(u), rel=1e-5)
    assert fld.grad_norm_squared(v) == pytest.approx(s * s * fld.grad_norm_squared(u), rel=1e-4)


def test_dilate_mass_multiplies_mass():
    g = RadialGrid(N=3, r_max=30.0, n=2048)
    u = g.gaussian(1.0)
    assert fld.mass(fld.dilate_mass(2.0, u)) == pytest.approx(2.0 * fld.mass(u), rel=1e-5)
    with pytest.raises(DomainError):
        fld.dilate_mass(0.5, u)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10_000))
def test_rearrangement_is_decreasing_and_equimeasurable(seed):
    rng = np.random.default_rng(seed)
    g = RadialGrid(N=3, r_max=8.0, n=256)
    u = g.field(rng.uniform(-1.0, 1.0, g.n) * np.exp(-g.r / 3))
    v = fld.rearrange_decreasing(u)
    assert np.all(np.diff(v.values) <= 0)
    assert fld.mass(v) == pytest.approx(fld.mass(u), rel=1e-10)
    assert fld.lp_norm(v, 4) <= fld.lp_norm(u, 4) * (1 + 1e-2)


def test_laplacian_of_gaussian():
    g = RadialGrid(N=3, r_max=12.0, n=4096)
    u = g.gaussian(1.0)
    exact = (g.r**2 - 3) * np.exp(-(g.r**2) / 2)
    lap = fld.laplacian(u).values
    # midpoint weights leave an O(1) pointwise error in the first few cells only
    away = (g.r > 0.1) & (g.r < 6)
    assert np.max(np.abs(lap - exact)[away]) < 1e-3
    # the weak form is exact: <Lap u, u>_W = -|grad u|^2
    assert np.sum(g.weights * lap * u.values) == pytest.approx(-fld.grad_norm_squared(u), rel=1e-12)


def test_energy_of_zero_field(model):
    g = RadialGrid(N=3, r_max=5.0, n=32)
    assert fld.energy_J(model, g.field(np.zeros(32))) == 0.0


def test_bad_grid_rejected():
    with pytest.raises(DomainError):
        RadialGrid(N=3, r_max=-1.0, n=10)
    with pytest.raises(DomainError):
        RadialGrid(N=3, r_max=1.0, n=10, stretch=-1.0)
