import warnings
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from normsol import nonlinearity as nl
from normsol.exceptions import InvalidSpecError, UnboundedC0Warning

positive = st.floats(1e-3, 50.0)


def test_critical_exponents():
    assert nl.critical_exponents(3) == (Fraction(10, 3), Fraction(6))
    assert nl.critical_exponents(4) == (Fraction(3), Fraction(4))


@settings(max_examples=60, deadline=None)
@given(t=positive)
def test_primitive_matches_f(t):
    m = nl.two_power_model()
    h = 1e-6 * t
    slope = (m.F(np.array(t + h)) - m.F(np.array(t - h))) / (2 * h)
    assert slope == pytest.approx(float(m.f(np.array(t))), rel=1e-6)


@settings(max_examples=60, deadline=None)
@given(t=positive)
def test_H_split_and_oddness(t):
    m = nl.two_power_model()
    x = np.array([t, -t])
    H = m.f(x) * x - 2 * m.F(x)
    np.testing.assert_allclose(m.H(x), H, rtol=1e-12)
    np.testing.assert_allclose(m.f(-x), -m.f(x), rtol=0, atol=0)
    assert m.G(np.array(t)) == pytest.approx(float(m.G(np.array(-t))), rel=1e-12)


@pytest.mark.parametrize(
    "sub,sup",
    [
        ([(1.0, Fraction(4))], []),  # subcritical term above 2_#
        ([], [(1.0, Fraction(3))]),  # supercritical term below 2_#
        ([], [(1.0, Fraction(7))]),  # above 2^*
        ([(-1.0, Fraction(7, 3))], []),  # negative coefficient
        ([], []),
    ],
)
def test_invalid_specs_rejected(sub, sup):
    with pytest.raises(InvalidSpecError):
        nl.make_multipower(nl.MultiPowerSpec(sub, sup), 3)


def test_two_power_assumptions_all_pass():
    m = nl.two_power_model()
    report = nl.check_assumptions(m)
    assert all(entry["pass"] for key, entry in report.items() if isinstance(entry, dict))
    G = nl.check_G_conditions(m)
    assert all(e["pass"] for e in G.values())


def test_logpower_example_closed_form_G():
    m = nl.make_logpower_example()
    t = np.geomspace(1e-3, 1e3, 50)
    np.testing.assert_allclose(m.G(t), nl.logpower_G_closed_form(t), rtol=1e-8, atol=1e-14)
    assert all(e["pass"] for e in nl.check_G_conditions(m).values())


def test_C0_two_power_is_interior_max():
    m = nl.two_power_model()
    c0 = nl.compute_C0(m)
    t = np.geomspace(1e-4, 1e4, 20001)
    ratio = m.F(t) / (t**2 + t**6)
    assert c0.value >= ratio.max() * (1 - 1e-12)
    assert c0.value == pytest.approx(ratio.max(), rel=1e-6)
    assert not c0.unbounded_flag


def test_C0_flags_edge_supremum():
    m = nl.pure_power_model(Fraction(2) + Fraction(1, 100), 3)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        c0 = nl.compute_C0(m, t_min=1e-2, t_max=1e2)
    assert c0.unbounded_flag or not caught or issubclass(caught[0].category, UnboundedC0Warning)


def test_tabulated_matches_closed_form():
    m = nl.two_power_model()
    t = np.linspace(0.0, 5.0, 4001)
    tab = nl.make_tabulated(t, m.F(t), 3)
    x = np.linspace(0.1, 4.9, 37)
    np.testing.assert_allclose(tab.F(x), m.F(x), rtol=1e-8)
    np.testing.assert_allclose(tab.f(x), m.f(x), rtol=1e-4)


def test_digest_is_stable():
    assert nl.two_power_model().digest == nl.two_power_model().digest
    assert nl.two_power_model().digest != nl.pure_power_model(Fraction(4), 3).digest
