"""Two elementary scalar inequalities used to rule out degenerate fibers.

``bound_from_above``: if ``x^2 <= A + B x^p`` with ``0 < p < 2`` and
``B (sqrt(A) + 1/2)^p <= sqrt(A) + 1/4`` then ``x <= sqrt(A) + 1/2``.

``bound_from_below``: if ``x^2 <= A x^p + B x^q`` with ``2 < p < q`` then
``x >= min(1, (A + B)^{1/(2-p)})``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from scipy.optimize import brentq

from .exceptions import DomainError

__all__ = ["AboveBound", "BelowBound", "bound_from_above", "bound_from_below", "turning_point"]

ROOT_XTOL = 1e-14


@dataclass(frozen=True)
class AboveBound:
    admissible: bool
    bound: float
    t1: float
    t0: float

    def holds(self) -> bool:
        """The lemma's conclusion, vacuous when the condition fails."""
        return (not self.admissible) or self.t1 <= self.bound * (1 + 1e-15) + ROOT_XTOL


@dataclass(frozen=True)
class BelowBound:
    xi: float
    x_min: float

    def holds(self) -> bool:
        # roots below 1 are found in log x, good to ~1e-13 relative
        return self.x_min >= self.xi * (1 - 1e-12) - ROOT_XTOL


def _positive(**kwargs):
    for name, value in kwargs.items():
        if not (value > 0 and math.isfinite(value)):
            raise DomainError(f"{name} must be a positive finite number, got {value}")


# beyond this the direct bracket is abandoned and the root is found in log t
DIRECT_LIMIT = 1e150


def _exp(x):
    return math.exp(x) if x < 709.0 else math.inf


def turning_point(B: float, p: float) -> float:
    """Minimiser ``t0 = (p B / 2)^{1/(2-p)}`` of ``t^2 - A - B t^p`` on ``t > 0``.

    Returns ``inf`` when ``t0`` exceeds the double range.
    """
    return _exp(math.log(p * B / 2.0) / (2.0 - p))


def _root(fn, lo, hi, xtol=ROOT_XTOL):
    return brentq(fn, lo, hi, xtol=xtol, rtol=4 * 2.220446049250313e-16, maxiter=500)


def _log_root(gn, y_lo):
    """Root of the increasing-at-infinity ``gn(y)`` to the right of ``y_lo``; returns ``exp(y)``."""
    step = 1.0
    y_hi = y_lo + step
    while gn(y_hi) <= 0:
        step *= 2.0
        y_hi = y_lo + step
    return _exp(_root(gn, y_lo, y_hi, xtol=1e-15))


def bound_from_above(A: float, B: float, p: float) -> AboveBound:
    """Check the upper-bound lemma and return the exact positive root ``t1``.

    ``t -> t^2 - A - B t^p`` is negative at 0, decreases up to ``t0`` and then
    increases to infinity, so it has exactly one positive root, located to the
    right of ``t0``.
    """
    _positive(A=A, B=B)
    if not 0 < p < 2:
        raise DomainError(f"p must lie in (0, 2), got {p}")
    sqA = math.sqrt(A)
    admissible = B * (sqA + 0.5) ** p <= sqA + 0.25
    t0 = turning_point(B, p)

    def fn(t):
        return t * t - A - B * t**p

    lo = t0
    hi = max(2.0 * t0, sqA + 1.0)
    while hi < DIRECT_LIMIT and fn(hi) <= 0:
        hi *= 2.0
    if hi < DIRECT_LIMIT:
        t1 = _root(fn, lo, hi)
    else:
        # t^2 = A + B t^p with t = e^y, compared in logs
        lA, lB = math.log(A), math.log(B)

        def gn(y):
            a, b = lA, lB + p * y
            big = max(a, b)
            return 2.0 * y - big - math.log1p(math.exp(min(a, b) - big))

        t1 = _log_root(gn, math.log(p * B / 2.0) / (2.0 - p))
    out = AboveBound(admissible, sqA + 0.5, t1, t0)
    if admissible and not out.holds():
        raise AssertionError(f"upper bound violated: t1={t1!r} > {sqA + 0.5!r}")
    return out


def bound_from_below(A: float, B: float, p: float, q: float) -> BelowBound:
    """Check the lower-bound lemma and return the smallest positive solution.

    ``x^2 = A x^p + B x^q`` on ``x > 0`` is equivalent to
    ``1 - A x^{p-2} - B x^{q-2} = 0`` whose left side decreases strictly from 1.
    Roots below the normal double range come back subnormal or as 0.
    """
    _positive(A=A, B=B)
    if not 2 < p < q:
        raise DomainError(f"need 2 < p < q, got p={p}, q={q}")
    # (A + B)^{1/(2-p)} >= 1 exactly when A + B <= 1
    xi = 1.0 if A + B <= 1.0 else (A + B) ** (1.0 / (2.0 - p))

    def fn(x):
        return 1.0 - A * x ** (p - 2) - B * x ** (q - 2)

    lA, lB = math.log(A), math.log(B)

    def gn(y):
        # fn(e^y), decreasing in y
        return 1.0 - _exp(lA + (p - 2) * y) - _exp(lB + (q - 2) * y)

    f1 = fn(1.0)
    if f1 == 0.0:
        x_min = 1.0
    elif f1 < 0:
        # root in (0, 1), possibly far below the absolute tolerance: solve in log x
        y_lo = -1.0
        while gn(y_lo) <= 0:
            y_lo *= 2.0
        x_min = math.exp(_root(gn, y_lo, 0.0, xtol=1e-15))
    else:
        lo, hi = 1.0, 2.0
        while hi < DIRECT_LIMIT and fn(hi) > 0:
            lo, hi = hi, 2.0 * hi
        if hi < DIRECT_LIMIT:
            x_min = _root(fn, lo, hi)
        else:
            x_min = _log_root(lambda y: -gn(y), math.log(lo))
    out = BelowBound(xi, x_min)
    if not out.holds():
        raise AssertionError(f"lower bound violated: x_min={x_min!r} < xi={xi!r}")
    return out
