import numpy as np
import pytest
from sklearn.base import clone

from normsol import LocalMinimizer, MMinusMinimizer, RadialGrid
from normsol import field as fld
from normsol import solver as sol
from normsol.exceptions import DomainError


def test_ground_state_checks(ground, rho, geo):
    assert ground.converged
    assert ground.energy < 0 < ground.lam
    assert ground.mass == pytest.approx(rho, abs=1e-8)
    assert ground.grad_norm < geo.R0
    assert np.all(ground.field.values > 0)
    assert ground.residuals.max() <= 1e-5
    assert "th:locmin:lambda_positive" in ground.summary()["tags"]


def test_excited_state_checks(excited, ground, rho):
    assert excited.converged
    assert excited.energy > 0 > ground.energy
    assert excited.lam > 0
    assert excited.branch == "M-minus"
    assert excited.residuals.max() <= 1e-4
    assert excited.mass == pytest.approx(rho, rel=1e-10)


def test_multiplier_matches_residual(model, ground):
    lam = sol.lagrange_multiplier(model, ground.field)
    assert lam == pytest.approx(ground.lam, rel=1e-12)
    res = sol.residuals(model, ground.field, lam)
    assert res.pde <= 1e-5


def test_ground_state_on_small_grid(model, rho):
    res = sol.minimize_local(model, 0.5 * rho, RadialGrid(N=3, r_max=60.0, n=1024))
    assert res.converged and res.energy < 0


def test_estimator_interface(model, rho):
    est = LocalMinimizer(model=model, rho=rho, n=1024, r_max=40.0)
    params = est.get_params()
    assert params["rho"] == rho and params["stretch"] == 0.0
    twin = clone(est).set_params(n=512)
    assert twin.n == 512 and est.n == 1024
    est.fit()
    assert est.converged_ and est.energy_ < 0
    assert est.score() <= 0
    assert fld.mass(est.field_) == pytest.approx(rho, rel=1e-8)


def test_estimator_requires_model():
    with pytest.raises(DomainError):
        MMinusMinimizer().fit()


def test_m_curve_threads_match_serial(model, rho):
    grid = RadialGrid(N=3, r_max=40.0, n=512)
    rhos = [0.4 * rho, 0.7 * rho]
    a = sol.m_curve(model, rhos, grid, jobs=1)
    b = sol.m_curve(model, rhos, grid, jobs=2)
    assert [r.m for r in a] == [r.m for r in b]
    assert a[1].m < a[0].m < 0
