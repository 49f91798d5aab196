from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from normsol import fibering as fib
from normsol import field as fld
from normsol.exceptions import DomainError, PreconditionError
from normsol.field import RadialGrid

GRID = RadialGrid(N=3, r_max=30.0, n=1024)


@settings(max_examples=25, deadline=None)
@given(s=st.floats(0.3, 3.0), width=st.floats(0.7, 3.0))
def test_phi_prime_is_M_of_scaled_field(model, s, width):
    u = GRID.gaussian(width)
    lhs = fib.phi_prime(model, u, s) * s
    h = 1e-6 * s
    fd = (fib.phi(model, u, s + h) - fib.phi(model, u, s - h)) / (2 * h)
    assert fd == pytest.approx(lhs / s, rel=1e-5, abs=1e-8)


def test_phi_at_one_is_energy(model):
    u = GRID.gaussian(1.3)
    assert fib.phi(model, u, 1.0) == pytest.approx(fld.energy_J(model, u), rel=1e-12)


def test_scan_finds_max_and_min(model, rho):
    u = GRID.gaussian(2.0)
    u = u * (rho / fld.mass(u))
    scan = fib.fiber_scan(model, u)
    assert len(scan.local_max) == 1 and len(scan.local_min) == 1
    assert scan.local_min[0] < scan.t_u
    cert = fib.check_J1_J2(scan)
    assert cert.j1 and cert.j2


def test_projected_field_is_in_M_minus(model, rho):
    grid = RadialGrid(N=3, r_max=30.0, n=4096)
    u = grid.gaussian(2.0)
    u = u * (rho / fld.mass(u))
    t_u, v = fib.fiber_project(model, u)
    A = fld.grad_norm_squared(v)
    assert abs(fib.M_functional(model, v)) <= 1e-6 * A
    assert fib.classify(model, v) is fib.Branch.MINUS
    # exact in the continuum; resampling onto the grid costs O(h^2)
    assert fld.mass(v) == pytest.approx(rho, rel=1e-4)


def test_second_derivative_needs_membership(model):
    with pytest.raises(PreconditionError):
        fib.phi_second_derivative_at_1(model, GRID.gaussian(1.0))


def test_descartes_two_power_exact(rho):
    spec = fib.MultiPowerSpec([(1.0, Fraction(7, 3))], [(1.0, Fraction(13, 3))])
    u = GRID.gaussian(1.0)
    cert = fib.descartes_certificate(spec, 3, fib.descartes_norms(spec, u))
    assert cert.m == 2
    assert cert.exponents == (1, 4, 7)
    assert cert.sign_changes == 2 and cert.at_most_two
    assert cert.j2_pattern == "+...+-...-"
    assert all(isinstance(c, Fraction) for c in cert.coefficients)


def test_descartes_rejects_irrational():
    spec = fib.MultiPowerSpec([(1.0, 2.5)], [(1.0, 2 + np.sqrt(2))])
    with pytest.raises(DomainError):
        fib.descartes_certificate(spec, 3, {"grad": 1.0, "lp": {2.5: 1.0, 2 + np.sqrt(2): 1.0}})


def test_mempty_guard_value(model):
    guard = fib.mempty_guard(model)
    assert 0 < guard.rho_guard < 1.0
    assert all(guard.conditions(0.5 * guard.rho_guard, 3, model.a, model.b, model.two_sharp, model.two_star).values())
