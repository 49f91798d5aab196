import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from normsol import scalar_bounds as sb
from normsol.exceptions import DomainError

mag = st.floats(1e-4, 1e4)


@settings(max_examples=300, deadline=None)
@given(A=mag, B=mag, p=st.floats(0.01, 1.99))
def test_upper_root_solves_equation(A, B, p):
    out = sb.bound_from_above(A, B, p)
    assert out.holds()
    if math.isinf(out.t1):
        # root beyond the double range: only possible when the condition fails
        assert not out.admissible
        return
    # compare in logs so that roots near the top of the double range still count
    lhs = 2 * math.log(out.t1)
    rhs = np.logaddexp(math.log(A), math.log(B) + p * math.log(out.t1))
    assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-12)
    if out.admissible:
        assert out.t1 <= math.sqrt(A) + 0.5 + 1e-12


@settings(max_examples=300, deadline=None)
@given(A=mag, B=mag, p=st.floats(2.01, 6.0), gap=st.floats(0.01, 4.0))
def test_lower_root_is_smallest_solution(A, B, p, gap):
    q = p + gap
    out = sb.bound_from_below(A, B, p, q)
    assert out.holds()
    if out.x_min < 1e-300:
        # subnormal or underflowed root: below the double range, nothing to compare
        return
    y = math.log(out.x_min)
    rhs = np.logaddexp(math.log(A) + p * y, math.log(B) + q * y)
    assert 2 * y == pytest.approx(rhs, rel=1e-10, abs=1e-10)
    assert out.holds()


def test_boundary_case_is_exact():
    out = sb.bound_from_above(1.0, 5.0 / 6.0, 1.0)
    assert out.admissible
    assert abs(out.t1 - 1.5) <= 1e-12


def test_huge_roots_do_not_overflow():
    out = sb.bound_from_above(1.0, 1216.0, 1.99)
    assert not out.admissible and math.isinf(out.t1)
    assert sb.bound_from_below(1e-4, 1e-4, 2.0117, 3.0117).xi == 1.0


def test_turning_point_minimises():
    t0 = sb.turning_point(2.0, 1.0)
    fn = lambda t: t * t - 2.0 * t
    assert fn(t0) <= min(fn(t0 * 0.99), fn(t0 * 1.01))


@pytest.mark.parametrize("args", [(1.0, 1.0, 2.0), (1.0, 1.0, 0.0), (-1.0, 1.0, 1.0), (1.0, float("nan"), 1.0)])
def test_above_domain(args):
    with pytest.raises(DomainError):
        sb.bound_from_above(*args)


@pytest.mark.parametrize("args", [(1.0, 1.0, 2.0, 3.0), (1.0, 1.0, 3.0, 3.0), (0.0, 1.0, 3.0, 4.0)])
def test_below_domain(args):
    with pytest.raises(DomainError):
        sb.bound_from_below(*args)
