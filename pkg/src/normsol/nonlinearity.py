"""Nonlinearity models ``f``, their primitives and structural checks.

A :class:`NonlinearityModel` is the single source of truth for ``f``, ``F``,
the split ``H = H1 + H2`` of ``H(t) = f(t) t - 2 F(t)`` and the derivatives
``h_j = H_j'``.  Built-in families are sums of powers (:func:`make_multipower`)
and the logarithmic example (:func:`make_logpower_example`); arbitrary
primitives can be supplied as tables (:func:`make_tabulated`).
"""

from __future__ import annotations

import hashlib
import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import integrate
from scipy.interpolate import CubicSpline
from scipy.optimize import minimize_scalar

from .exceptions import InvalidSpecError, NoPositiveFError, UnboundedC0Warning

__all__ = [
    "NonlinearityModel",
    "MultiPowerSpec",
    "PowerTerm",
    "critical_exponents",
    "make_multipower",
    "make_logpower_example",
    "logpower_G_closed_form",
    "two_power_model",
    "pure_power_model",
    "make_tabulated",
    "compute_C0",
    "C0Result",
    "check_assumptions",
    "eval_G",
    "check_G_conditions",
    "default_sample_grid",
]

DEFAULT_TOL = 1e-9
Array = np.ndarray


def critical_exponents(N: int) -> tuple[Fraction, Fraction]:
    """Return ``(2_#, 2^*) = (2 + 4/N, 2N/(N-2))`` as exact fractions."""
    return Fraction(2) + Fraction(4, N), Fraction(2 * N, N - 2)


def _zero(t):
    return np.zeros_like(np.asarray(t, dtype=float))


@dataclass(frozen=True, eq=False)
class NonlinearityModel:
    """Scalar nonlinearity with its primitive and the ``H1 + H2`` split.

    All callables are vectorised over real arrays.  For odd models, complex
    arguments are handled through the modulus extension ``f(z) = f(|z|) z/|z|``
    by :meth:`f_complex`.
    """

    f: Callable[[Array], Array]
    F: Callable[[Array], Array]
    H1: Callable[[Array], Array]
    H2: Callable[[Array], Array]
    h1: Callable[[Array], Array]
    h2: Callable[[Array], Array]
    N: int
    a: Optional[float] = None
    b: Optional[float] = None
    is_odd: bool = True
    name: str = "custom"
    description: dict = field(default_factory=dict)
    approximate_derivatives: bool = False
    fprime: Optional[Callable[[Array], Array]] = None

    @property
    def two_sharp(self) -> float:
        return 2.0 + 4.0 / self.N

    @property
    def two_star(self) -> float:
        return 2.0 * self.N / (self.N - 2)

    def H(self, t):
        return self.H1(t) + self.H2(t)

    def h(self, t):
        return self.h1(t) + self.h2(t)

    def G(self, t):
        """``G(t) = h(t) t - (2 + 2/N) H(t)``."""
        t = np.asarray(t, dtype=float)
        return self.h(t) * t - (2.0 + 2.0 / self.N) * self.H(t)

    def theta(self, modulus):
        """Phase rate ``f(m)/m`` used by the exact nonlinear substep (0 at m=0)."""
        m = np.asarray(modulus, dtype=float)
        out = np.zeros_like(m)
        nz = m > 0
        out[nz] = self.f(m[nz]) / m[nz]
        return out

    def f_complex(self, z):
        z = np.asarray(z)
        return self.theta(np.abs(z)) * z

    def derivative(self, t):
        """``f'(t)``: closed form when available, else a centred difference."""
        t = np.asarray(t, dtype=float)
        if self.fprime is not None:
            return self.fprime(t)
        step = 1e-6 * np.maximum(1.0, np.abs(t))
        return (self.f(t + step) - self.f(t - step)) / (2 * step)

    @property
    def digest(self) -> str:
        payload = repr(sorted(self.description.items())) + f"|N={self.N}|{self.name}"
        return hashlib.sha256(payload.encode()).hexdigest()[:16]


# ---------------------------------------------------------------------------
# multi-power family


@dataclass(frozen=True)
class PowerTerm:
    coefficient: float
    exponent: float | Fraction

    @property
    def is_rational(self) -> bool:
        return isinstance(self.exponent, Rational)


def _as_exponent(value):
    if isinstance(value, PowerTerm):
        return value
    coef, *exp = value
    if len(exp) == 2:
        num, den = exp
        if int(num) != num or int(den) != den or den <= 0:
            raise InvalidSpecError(f"exponent fraction {num}/{den} is not a ratio of integers")
        q = Fraction(int(num), int(den))
    elif len(exp) == 1:
        q = exp[0]
        if isinstance(q, int):
            q = Fraction(q)
    else:
        raise InvalidSpecError(f"cannot read power term {value!r}")
    return PowerTerm(float(coef), q)


@dataclass(frozen=True)
class MultiPowerSpec:
    """Sum of powers ``f(t) = sum alpha_k |t|^{q_k-2} t + sum beta_l |t|^{p_l-2} t``.

    Terms are given as ``(coefficient, exponent)`` or
    ``(coefficient, numerator, denominator)``; rational exponents are stored as
    reduced :class:`fractions.Fraction` objects.
    """

    subcritical: tuple = ()
    supercritical: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "subcritical", tuple(_as_exponent(t) for t in self.subcritical))
        object.__setattr__(
            self, "supercritical", tuple(_as_exponent(t) for t in self.supercritical)
        )

    @property
    def terms(self) -> tuple:
        return self.subcritical + self.supercritical

    @property
    def is_rational(self) -> bool:
        return all(t.is_rational for t in self.terms)

    def validate(self, N: int) -> None:
        sharp, star = critical_exponents(N)
        if not self.terms:
            raise InvalidSpecError("a multi-power nonlinearity needs at least one term")
        for term in self.terms:
            if not term.coefficient > 0:
                raise InvalidSpecError(f"coefficient {term.coefficient} must be positive")
        q = [t.exponent for t in self.subcritical]
        p = [t.exponent for t in self.supercritical]
        for seq, label in ((q, "subcritical"), (p, "supercritical")):
            if any(b <= a for a, b in zip(seq, seq[1:])):
                raise InvalidSpecError(f"{label} exponents must be strictly increasing: {seq}")
        if q and not (q[0] > 2 and q[-1] < sharp):
            raise InvalidSpecError(
                f"subcritical exponents must lie in (2, 2_# = {sharp}); got {[str(x) for x in q]}"
            )
        if p and not p[0] > sharp:
            raise InvalidSpecError(
                f"supercritical exponents must exceed 2_# = {sharp}; got {[str(x) for x in p]}"
            )
        if p and p[-1] > star:
            raise InvalidSpecError(f"largest exponent {p[-1]} exceeds 2^* = {star}")

    def to_dict(self) -> dict:
        def enc(term):
            q = term.exponent
            if isinstance(q, Fraction):
                return [term.coefficient, q.numerator, q.denominator]
            return [term.coefficient, float(q)]

        return {
            "subcritical": [enc(t) for t in self.subcritical],
            "supercritical": [enc(t) for t in self.supercritical],
        }


def _power_sum(terms, kind):
    coefs = np.array([t.coefficient for t in terms], dtype=float)
    exps = np.array([float(t.exponent) for t in terms], dtype=float)

    def fn(t):
        t = np.asarray(t, dtype=float)
        a = np.abs(t)
        out = np.zeros_like(a)
        for c, q in zip(coefs, exps):
            if kind == "f":
                out = out + c * a ** (q - 2) * t
            elif kind == "F":
                out = out + c / q * a**q
            elif kind == "H":
                out = out + c * (q - 2) / q * a**q
            elif kind == "h":
                out = out + c * (q - 2) * a ** (q - 2) * t
            elif kind == "fprime":
                out = out + c * (q - 1) * a ** (q - 2)
        return out

    return fn


def make_multipower(spec: MultiPowerSpec, N: int) -> NonlinearityModel:
    """Build the closed-form model of a sum of powers in dimension ``N``."""
    if int(N) != N or N < 3:
        raise InvalidSpecError(f"dimension N must be an integer >= 3, got {N}")
    if not isinstance(spec, MultiPowerSpec):
        spec = MultiPowerSpec(**spec)
    spec.validate(N)
    sub, sup = spec.subcritical, spec.supercritical
    return NonlinearityModel(
        f=_power_sum(spec.terms, "f"),
        F=_power_sum(spec.terms, "F"),
        H1=_power_sum(sub, "H") if sub else _zero,
        H2=_power_sum(sup, "H") if sup else _zero,
        h1=_power_sum(sub, "h") if sub else _zero,
        h2=_power_sum(sup, "h") if sup else _zero,
        fprime=_power_sum(spec.terms, "fprime"),
        N=int(N),
        a=float(sub[-1].exponent) if sub else None,
        b=float(sup[0].exponent) if sup else None,
        is_odd=True,
        name="multipower",
        description={"family": "multipower", **spec.to_dict()},
    )


def two_power_model(q=Fraction(7, 3), p=Fraction(13, 3), N=3, mu=1.0, nu=1.0):
    """``f(t) = mu |t|^{q-2} t + nu |t|^{p-2} t`` with one term on each side of 2_#."""
    return make_multipower(MultiPowerSpec([(mu, q)], [(nu, p)]), N)


def pure_power_model(p, N=3, coefficient=1.0):
    """Single power; placed on the side of 2_# it belongs to."""
    sharp, _ = critical_exponents(N)
    p = Fraction(p) if isinstance(p, int) else p
    if p < sharp:
        spec = MultiPowerSpec([(coefficient, p)], [])
    elif p > sharp:
        spec = MultiPowerSpec([], [(coefficient, p)])
    else:
        # mass-critical power: no H1/H2 side, keep it as a bare H2 term
        spec = None
    if spec is None:
        terms = (PowerTerm(coefficient, p),)
        return NonlinearityModel(
            f=_power_sum(terms, "f"),
            F=_power_sum(terms, "F"),
            H1=_zero,
            H2=_power_sum(terms, "H"),
            h1=_zero,
            h2=_power_sum(terms, "h"),
            fprime=_power_sum(terms, "fprime"),
            N=int(N),
            is_odd=True,
            name="power",
            description={"family": "power", "exponent": str(p), "coefficient": coefficient},
        )
    return make_multipower(spec, N)


# ---------------------------------------------------------------------------
# logarithmic example (N = 3)


def make_logpower_example() -> NonlinearityModel:
    """``F(t) = 3/7 |t|^{7/3} ln(e+|t|) + 3/13 |t|^{13/3}`` in dimension 3.

    ``H1`` collects the two terms coming from the logarithmic part and ``H2``
    is the pure ``|t|^{13/3}`` term.  The ratio ``h1(t) t / H1(t)`` tends to
    ``2_# = 10/3`` as ``t -> 0``, so the split only satisfies the growth chain
    with ``a = 2_#`` (reported by :func:`check_assumptions`).
    """
    e = math.e

    def F(t):
        a = np.abs(np.asarray(t, dtype=float))
        return 3 / 7 * a ** (7 / 3) * np.log(e + a) + 3 / 13 * a ** (13 / 3)

    def f(t):
        t = np.asarray(t, dtype=float)
        a = np.abs(t)
        s = np.sign(t)
        return s * (
            a ** (4 / 3) * np.log(e + a) + 3 / 7 * a ** (7 / 3) / (e + a) + a ** (10 / 3)
        )

    def fprime(t):
        a = np.abs(np.asarray(t, dtype=float))
        return (
            4 / 3 * a ** (1 / 3) * np.log(e + a)
            + 2 * a ** (4 / 3) / (e + a)
            - 3 / 7 * a ** (7 / 3) / (e + a) ** 2
            + 10 / 3 * a ** (7 / 3)
        )

    def H1(t):
        a = np.abs(np.asarray(t, dtype=float))
        return 1 / 7 * a ** (7 / 3) * np.log(e + a) + 3 / 7 * a ** (10 / 3) / (e + a)

    def h1(t):
        t = np.asarray(t, dtype=float)
        a = np.abs(t)
        s = np.sign(t)
        return s * (
            1 / 3 * a ** (4 / 3) * np.log(e + a)
            + 1 / 7 * a ** (7 / 3) / (e + a)
            + 10 / 7 * a ** (7 / 3) / (e + a)
            - 3 / 7 * a ** (10 / 3) / (e + a) ** 2
        )

    def H2(t):
        a = np.abs(np.asarray(t, dtype=float))
        return 7 / 13 * a ** (13 / 3)

    def h2(t):
        t = np.asarray(t, dtype=float)
        return 7 / 3 * np.abs(t) ** (10 / 3) * np.sign(t)

    return NonlinearityModel(
        f=f,
        F=F,
        H1=H1,
        H2=H2,
        h1=h1,
        h2=h2,
        fprime=fprime,
        N=3,
        a=10 / 3,
        b=13 / 3,
        is_odd=True,
        name="logpower",
        description={"family": "logpower"},
    )


def logpower_G_closed_form(t):
    """The closed form of ``G`` for the logarithmic example, written out term by term."""
    a = np.abs(np.asarray(t, dtype=float))
    e = math.e
    return (
        -1 / 21 * a ** (7 / 3) * np.log(e + a)
        + 3 / 7 * a ** (10 / 3) / (e + a)
        - 3 / 7 * a ** (13 / 3) / (e + a) ** 2
        + 35 / 39 * a ** (13 / 3)
    )


# ---------------------------------------------------------------------------
# tabulated primitives


def make_tabulated(t_values: Sequence[float], F_values: Sequence[float], N: int, odd=True):
    """Model from samples of ``F`` (spline-interpolated, ``f = F'``).

    With ``odd=True`` the table is read on ``t >= 0`` and extended evenly; the
    whole of ``H`` is assigned to ``H1``.  Derivative-based checks on such a
    model are flagged as approximate.
    """
    t = np.asarray(t_values, dtype=float)
    Fv = np.asarray(F_values, dtype=float)
    order = np.argsort(t)
    t, Fv = t[order], Fv[order]
    if odd:
        if t[0] < 0:
            raise InvalidSpecError("odd tabulated models take samples on t >= 0 only")
        if t[0] > 0:
            t = np.concatenate([[0.0], t])
            Fv = np.concatenate([[0.0], Fv])
        spline = CubicSpline(np.concatenate([-t[:0:-1], t]), np.concatenate([Fv[:0:-1], Fv]))
    else:
        spline = CubicSpline(t, Fv)
    dspline = spline.derivative()
    d2spline = spline.derivative(2)
    t_lo, t_hi = t[0] if not odd else -t[-1], t[-1]

    def clip(x):
        return np.clip(np.asarray(x, dtype=float), t_lo, t_hi)

    def F(x):
        return spline(clip(x))

    def f(x):
        return dspline(clip(x))

    def H(x):
        x = np.asarray(x, dtype=float)
        return f(x) * x - 2 * F(x)

    def h(x):
        x = np.asarray(x, dtype=float)
        return d2spline(clip(x)) * x - dspline(clip(x))

    return NonlinearityModel(
        f=f,
        F=F,
        H1=H,
        H2=_zero,
        h1=h,
        h2=_zero,
        fprime=lambda x: d2spline(clip(x)),
        N=int(N),
        is_odd=bool(odd),
        name="tabulated",
        description={
            "family": "tabulated",
            "table": hashlib.sha256(np.concatenate([t, Fv]).tobytes()).hexdigest()[:16],
        },
        approximate_derivatives=True,
    )


# ---------------------------------------------------------------------------
# C0


@dataclass(frozen=True)
class C0Result:
    value: float
    t_max: float
    unbounded_flag: bool = False

    def __float__(self):
        return self.value


def compute_C0(
    model: NonlinearityModel,
    t_min: float = 1e-6,
    t_max: float = 1e6,
    n_scan: int = 4001,
    xtol: float = 1e-12,
) -> C0Result:
    """``C0 = sup_{t != 0} F(t) / (t^2 + |t|^{2^*})`` by log scan plus golden refinement."""
    star = model.two_star
    mags = np.geomspace(t_min, t_max, n_scan)
    ts = mags if model.is_odd else np.concatenate([-mags[::-1], mags])

    def ratio(t):
        return model.F(t) / (t**2 + np.abs(t) ** star)

    values = ratio(ts)
    k = int(np.argmax(values))
    if not values[k] > 0:
        raise NoPositiveFError("F is not positive anywhere on the scan range")
    unbounded = False
    sign = np.sign(ts[k])
    # bracket in log|t| between neighbouring scan points
    logs = np.log(np.abs(ts))
    lo = logs[max(k - 1, 0)]
    hi = logs[min(k + 1, len(ts) - 1)]
    if lo > hi:
        lo, hi = hi, lo
    edge = abs(ts[k]) in (mags[0], mags[-1]) or abs(ts[k]) in (mags[1], mags[-2])
    if edge:
        unbounded = True
        warnings.warn(
            f"C0 supremum found at the edge of the scan (|t| = {abs(ts[k]):.3g})",
            UnboundedC0Warning,
            stacklevel=2,
        )
        return C0Result(float(values[k]), float(ts[k]), True)

    def neg(logt):
        return -float(ratio(sign * np.exp(logt)))

    mid = logs[k]
    res = minimize_scalar(
        neg, bracket=(lo, mid, hi), method="golden", options={"xtol": xtol}
    )
    t_best = sign * math.exp(res.x)
    best = -res.fun
    if best < values[k]:
        best, t_best = float(values[k]), float(ts[k])
    return C0Result(float(best), float(t_best), unbounded)


# ---------------------------------------------------------------------------
# assumption checks


def default_sample_grid(n_geom: int = 241, n_lin: int = 401, t_min=1e-6, t_max=1e6) -> Array:
    """Symmetric sample: geometric edges ``[t_min, t_max]`` plus a dense interior."""
    pos = np.unique(np.concatenate([np.geomspace(t_min, t_max, n_geom), np.linspace(0.0, 10.0, n_lin)[1:]]))
    return np.concatenate([-pos[::-1], pos])


def _edge_windows(ts: Array, decades: float = 1.5):
    """Positive sample points in the small- and large-|t| edge windows, ordered toward the edge."""
    pos = np.unique(np.abs(ts[ts != 0]))
    lo_edge, hi_edge = pos[0], pos[-1]
    small = pos[pos <= lo_edge * 10**decades][::-1]
    large = pos[pos >= hi_edge / 10**decades]
    return small, large


def _signed(model, mags):
    """Evaluation points on both signs unless the model is odd."""
    return mags if model.is_odd else np.concatenate([mags, -mags])


def _trend(values: Array, kind: str, rel=1e-9):
    """Check that ``values`` (ordered toward an edge) follow the requested trend."""
    v = np.asarray(values, dtype=float)
    if not np.all(np.isfinite(v)):
        return False
    d = np.diff(v)
    scale = np.maximum(np.abs(v[:-1]), np.abs(v[1:])) * rel + 1e-300
    if kind == "to_zero":  # |v| decreases toward the edge
        return bool(np.all(np.diff(np.abs(v)) <= scale)) and abs(v[-1]) < abs(v[0])
    if kind == "to_inf":  # v increases without bound toward the edge
        return bool(np.all(d >= -scale)) and v[-1] > v[0] and v[-1] > 0
    if kind == "bounded":  # saturates or decays toward the edge
        tail = np.abs(v[-6:]) + 1e-300
        return bool(tail[-1] <= tail[0] * 1.01)
    raise ValueError(kind)


def _entry(name, ok, status_ok="consistent", witness=None, **extra):
    entry = {"assumption": name, "pass": bool(ok), "status": status_ok if ok else "violated"}
    if witness is not None and not ok:
        entry["witness_t"] = float(witness)
    entry.update(extra)
    return entry


def _pointwise(name, lhs, rhs, ts, tol, scale=None):
    """Entry for the pointwise inequality ``lhs <= rhs`` up to a relative tolerance."""
    if scale is None:
        scale = np.maximum(np.abs(lhs), np.abs(rhs))
    bad = lhs - rhs > tol * (scale + 1e-300)
    witness = ts[np.argmax(bad)] if bad.any() else None
    return _entry(name, not bad.any(), "holds", witness)


def check_assumptions(model: NonlinearityModel, ts: Optional[Array] = None, tol: float = DEFAULT_TOL):
    """Sampled verification of the structural assumptions on ``f``.

    Pointwise statements are checked at every sample.  Limit statements are
    checked as monotone trends on the edge windows of the grid and reported as
    ``consistent``, never as proved.  Returns a dict with one entry per check.
    """
    ts = default_sample_grid() if ts is None else np.asarray(ts, dtype=float)
    N = model.N
    sharp, star = model.two_sharp, model.two_star
    small, large = _edge_windows(ts)
    approx = model.approximate_derivatives
    report = {}

    f, F = model.f(ts), model.F(ts)
    a = np.abs(ts)

    # model-internal identities
    quad = np.array([integrate.quad(lambda x: float(model.f(x)), 0.0, t, limit=200)[0] for t in ts[np.abs(ts) <= 50]])
    ts_q = ts[np.abs(ts) <= 50]
    Fq = model.F(ts_q)
    qtol = max(tol, 1e-8) * (1 + np.abs(Fq))
    bad = np.abs(quad - Fq) > qtol
    report["F_primitive"] = _entry(
        "F(0)=0 and F=int f", (abs(float(model.F(0.0))) == 0.0) and not bad.any(), "holds",
        ts_q[np.argmax(bad)] if bad.any() else None, approximate=approx,
    )
    Hsum = model.H1(ts) + model.H2(ts)
    Hdef = f * ts - 2 * F
    bad = np.abs(Hsum - Hdef) > tol * (1 + a**star + np.abs(Hdef))
    report["H_split"] = _entry("H1+H2 = f(t)t - 2F(t)", not bad.any(), "holds",
                               ts[np.argmax(bad)] if bad.any() else None)
    hstep = 1e-5 * np.maximum(1.0, a)
    for j, (H, h) in enumerate(((model.H1, model.h1), (model.H2, model.h2)), start=1):
        fd = (H(ts + hstep) - H(ts - hstep)) / (2 * hstep)
        hv = h(ts)
        bad = np.abs(fd - hv) > 1e-5 * (1 + np.abs(hv))
        report[f"h{j}_derivative"] = _entry(
            f"h{j} = H{j}'", not bad.any(), "holds", ts[np.argmax(bad)] if bad.any() else None,
            approximate=True,
        )
    if model.is_odd:
        ok = np.array_equal(model.F(-ts), F) and np.array_equal(model.f(-ts), -f)
        report["odd"] = _entry("f odd, F even", ok, "holds")

    # (F0) |f(t)| <= C (|t| + |t|^{2^*-1})
    def r0(m):
        m = _signed(model, m)
        return np.abs(model.f(m)) / (np.abs(m) + np.abs(m) ** (star - 1))

    ratio_all = r0(np.abs(ts))
    ok = np.all(np.isfinite(ratio_all)) and _trend(r0(small), "bounded") and _trend(r0(large), "bounded")
    witness = large[-1] if not _trend(r0(large), "bounded") else small[-1]
    report["F0"] = _entry("F0", ok, witness=witness, sup_ratio=float(np.max(ratio_all)), approximate=approx)

    # (F1) F(t)/t^2 -> 0 as t -> 0
    vals = [model.F(_signed(model, np.array([m]))) / m**2 for m in small]
    v = np.array([np.max(np.abs(x)) for x in vals])
    report["F1"] = _entry("F1", _trend(v, "to_zero"), witness=small[-1])

    # (F2) F(t)/|t|^{2_#} -> +inf as t -> 0
    v = np.array([np.min(model.F(_signed(model, np.array([m])))) / m**sharp for m in small])
    report["F2"] = _entry("F2", _trend(v, "to_inf"), witness=small[-1])

    # (F3) F(t)/|t|^{2^*} -> 0 as |t| -> inf
    v = np.array([np.max(np.abs(model.F(_signed(model, np.array([m]))))) / m**star for m in large])
    report["F3"] = _entry("F3", _trend(v, "to_zero"), witness=large[-1])

    # (F4) f(t) t <= 2^* F(t)
    report["F4"] = _pointwise("F4", f * ts, star * F, ts, tol)

    # (F5a)/(F5b): local Lipschitz growth, tried with each model exponent
    candidates = sorted(
        {float(x) for x in (model.a, model.b) if x is not None}
        | set(np.linspace(2.0, star, 41)[1:-1].tolist())
    )
    fp = np.abs(model.derivative(ts))
    f5a = f5b = None
    for q in candidates:
        if not 2 < q < star + 1e-12:
            continue
        ra = fp / (1 + a) ** (q - 2)
        if f5a is None and np.all(np.isfinite(ra)) and _trend(np.abs(model.derivative(large)) / (1 + large) ** (q - 2), "bounded") and _trend(np.abs(model.derivative(small)), "bounded"):
            f5a = q
        rb = fp / (a ** (q - 2) + a ** (star - 2))
        if f5b is None and np.all(np.isfinite(rb)) and _trend(np.abs(model.derivative(small)) / small ** (q - 2), "bounded") and _trend(np.abs(model.derivative(large)) / large ** (star - 2), "bounded"):
            f5b = q
    report["F5a"] = _entry("F5a", f5a is not None, witness=large[-1], q=f5a, approximate=True)
    report["F5b"] = _entry("F5b", f5b is not None, witness=small[-1], q=f5b, approximate=True)

    # (H0n): exponents and growth of H1, H2
    H1, H2 = model.H1(ts), model.H2(ts)
    a_exp, b_exp = model.a, model.b
    a_ok = a_exp is None or 2 < a_exp < sharp
    b_ok = b_exp is None or sharp < b_exp < star
    aa = a_exp if a_exp is not None else 2.0
    bb = b_exp if b_exp is not None else star
    g1 = lambda m: np.max(np.abs(model.H1(_signed(model, np.array([m]))))) / (m**2 + m**aa)  # noqa: E731
    g2 = lambda m: np.max(np.abs(model.H2(_signed(model, np.array([m]))))) / (m**bb + m**star)  # noqa: E731
    growth_ok = all(
        _trend(np.array([g(m) for m in window]), "bounded")
        for g in (g1, g2)
        for window in (small, large)
    )
    report["H0n"] = _entry(
        "H0n", a_ok and b_ok and growth_ok, witness=small[-1], a=a_exp, b=b_exp,
        exponent_a_in_range=a_ok, exponent_b_in_range=b_ok,
    )

    # (H2n): 2 H1 <= h1 t <= a H1, b H2 <= h2 t <= 2^* H2
    h1t, h2t = model.h1(ts) * ts, model.h2(ts) * ts
    parts = [
        _pointwise("2H1<=h1t", 2 * H1, h1t, ts, tol),
        _pointwise("h1t<=aH1", h1t, aa * H1, ts, tol),
        _pointwise("bH2<=h2t", bb * H2, h2t, ts, tol),
        _pointwise("h2t<=2*H2", h2t, star * H2, ts, tol),
    ]
    bad = [p for p in parts if not p["pass"]]
    report["H2n"] = _entry(
        "H2n", not bad and a_ok and b_ok, "holds",
        bad[0].get("witness_t") if bad else None, chains=parts,
    )
    report["N"] = N
    return report


def eval_G(model: NonlinearityModel, t):
    """``G(t) = h(t) t - (2 + 2/N) H(t)``."""
    return model.G(t)


def check_G_conditions(model: NonlinearityModel, ts: Optional[Array] = None):
    """Sampled checks of (G0)-(G3) for ``G``.

    (G0) evenness on the sample, (G1) non-positive small-t trend of
    ``G/|t|^{2_#}``, (G2) unbounded large-t growth, (G3) strict increase of
    ``G(t)/t^{2_#}`` on the positive samples.
    """
    ts = default_sample_grid() if ts is None else np.asarray(ts, dtype=float)
    sharp = model.two_sharp
    small, large = _edge_windows(ts)
    G = model.G(ts)
    report = {}
    report["G0"] = _entry("G0", np.allclose(model.G(-ts), G, rtol=1e-12, atol=0), "holds")
    ratio_small = model.G(small) / small**sharp
    limsup_ok = ratio_small[-1] <= 1e-9 * np.max(np.abs(ratio_small)) or _trend(ratio_small, "to_zero")
    report["G1"] = _entry("G1", bool(limsup_ok), witness=small[-1])
    report["G2"] = _entry("G2", _trend(model.G(large) / large**sharp, "to_inf"), witness=large[-1])
    pos = np.unique(np.abs(ts))
    q = model.G(pos) / pos**sharp
    bad = np.diff(q) <= 0
    report["G3"] = _entry("G3", not bad.any(), "holds", pos[1:][np.argmax(bad)] if bad.any() else None)
    return report
