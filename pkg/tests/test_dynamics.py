import math

import numpy as np
import pytest

from normsol import RadialGrid
from normsol import dynamics as dyn
from normsol import field as fld
from normsol.exceptions import DomainError, StepSizeError


def test_standing_wave(model, ground):
    psi0 = ground.field.with_values(ground.field.values.astype(complex))
    trace = dyn.evolve(model, psi0, 1e-3, 2.0, record_every=20, reference=ground.field)
    assert np.max(np.abs(np.abs(trace.final.values) - ground.field.values)) < 1e-6
    assert trace.mass_drift() < 1e-12
    assert trace.energy_drift() < 1e-10
    assert np.nanmax(trace.dist) < 1e-6
    # e^{+i lambda t} under i psi_t + Lap psi + f(psi) = 0
    assert dyn.phase_rate(trace) == pytest.approx(ground.lam, rel=1e-7)


def test_orbital_distance_ignores_phase(ground):
    u = ground.field
    rotated = u.with_values(u.values * np.exp(1j * 0.7))
    assert dyn.orbital_distance(rotated, u) < 1e-12
    assert dyn.orbital_distance(u * 1.1, u) == pytest.approx(0.1 * dyn.h1_norm(u), rel=1e-9)


def test_virial_identity_small_run(model):
    # the defect is dominated by the O(h^2) spatial error, so refine
    for n, bound in ((1024, 2e-3), (4096, 1e-4)):
        grid = RadialGrid(N=3, r_max=30.0, n=n)
        psi0 = grid.gaussian(1.5) * 0.8
        psi0 = psi0.with_values(psi0.values.astype(complex))
        trace = dyn.evolve(model, psi0, 2e-3, 0.5, record_every=5)
        assert trace.mass_drift() < 1e-12
        assert np.max(trace.virial_defect()) < bound


def test_step_size_error_without_halvings(model, excited):
    psi0 = fld.scale_star(1.1, excited.field)
    psi0 = psi0.with_values(psi0.values.astype(complex))
    with pytest.raises(StepSizeError) as info:
        dyn.evolve(model, psi0, 0.05, 1.0, record_every=1, energy_tol=1e-10, max_halvings=0)
    assert info.value.suggested_dt < 0.05


def test_integrator_rejects_even_model_dimension_mismatch(model):
    with pytest.raises(DomainError):
        dyn.Integrator(model, RadialGrid(N=4, r_max=5.0, n=32))


def test_stability_probe_short(model, ground, geo):
    rep = dyn.stability_probe(model, ground.field, 1e-3, 2.0, 4e-3, geo.R0, seed=1)
    assert rep.in_well and rep.stable
    assert rep.sup_distance < 1e-2
    again = dyn.stability_probe(model, ground.field, 1e-3, 2.0, 4e-3, geo.R0, seed=1)
    assert again.to_dict() == rep.to_dict()


def test_virial_root():
    # V0 + V1 t - 4 delta t^2 = 0
    T = dyn.virial_root(1.0, 0.0, 0.25)
    assert T == pytest.approx(1.0)
    assert dyn.virial_root(2.0, 1.0, 1.0) == pytest.approx((1 + math.sqrt(33)) / 8)
