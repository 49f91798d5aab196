"""Fibering maps ``phi(s) = J(s * u)`` and the Nehari-Pohozaev set ``M``.

Along a fiber the energy has the closed form

    phi(s) = s^2 |grad u|_2^2 / 2 - s^{-N} int F(s^{N/2} u),

which is evaluated on the grid of ``u`` itself (change of variables), so
scans never resample.  ``phi'(s) = M(s * u) / s``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from math import lcm
from typing import Optional

import numpy as np
from scipy.optimize import brentq

from . import field as fld
from .exceptions import DomainError, EvaluationError, NotProjectableError, PreconditionError
from .field import RadialField
from .nonlinearity import MultiPowerSpec, NonlinearityModel
from .scalar_bounds import bound_from_above, bound_from_below
from .thresholds import gn_constant, sobolev_constant

__all__ = [
    "Branch",
    "M_functional",
    "ProjectionResult",
    "project_to_M",
    "fiber_project",
    "phi_second_derivative_at_1",
    "classify",
    "phi",
    "FiberingScan",
    "fiber_scan",
    "J1J2Certificate",
    "check_J1_J2",
    "DescartesCertificate",
    "descartes_certificate",
    "descartes_norms",
    "phi_prime",
    "phi_second",
    "h1_h2_margin",
    "grad_floor",
    "MemptyGuard",
    "mempty_guard",
]

DEAD_BAND = 1e-8
MEMBERSHIP_TOL = 1e-6


class Branch(str, enum.Enum):
    MINUS = "M-"
    ZERO = "M0"
    PLUS = "M+"


def _same_dimension(model, u):
    if model.N != u.N:
        raise DomainError(f"model dimension {model.N} differs from field dimension {u.N}")


def M_functional(model: NonlinearityModel, u: RadialField) -> float:
    """``M(u) = |grad u|_2^2 - (N/2) int H(u)``."""
    _same_dimension(model, u)
    return fld.grad_norm_squared(u) - 0.5 * model.N * fld.integral_of(model.H, u)


@dataclass(frozen=True)
class ProjectionResult:
    r: float
    field: RadialField
    mass: float
    mass_ratio: float  # r^{-N/2}, mass(projected) / mass(u)


def _projection_radius(model, u):
    integral = fld.integral_of(model.H, u)
    if not integral > 0:
        raise NotProjectableError(f"int H(u) = {integral:.3e} is not positive")
    return math.sqrt(model.N * integral / (2.0 * fld.grad_norm_squared(u)))


def project_to_M(model: NonlinearityModel, u: RadialField) -> ProjectionResult:
    """Radial dilation ``u(r .)`` with ``r = (N int H(u) / (2 |grad u|_2^2))^{1/2}``.

    The dilated field lies in ``M``; its mass is ``r^{-N/2}`` times that of ``u``.
    """
    _same_dimension(model, u)
    r = _projection_radius(model, u)
    v = fld.dilate(u, r)
    # resampling perturbs M slightly; repeat with the (now tiny) correction
    for _ in range(4):
        if abs(M_functional(model, v)) <= 1e-12 * fld.grad_norm_squared(v):
            break
        step = _projection_radius(model, v)
        v = fld.dilate(v, step)
        r *= step
    return ProjectionResult(r, v, fld.mass(v), r ** (-model.N / 2))


# ---------------------------------------------------------------------------
# fiber quantities in closed form


def _fiber_terms(model, u, s, which):
    vals = np.abs(u.values) if u.is_complex else u.values
    w = u.grid.weights
    v = s ** (u.N / 2) * vals
    fn = {"F": model.F, "H": model.H, "hu": lambda t: model.h(t) * t}[which]
    return s ** (-u.N) * float(np.sum(w * fn(v)))


def phi(model: NonlinearityModel, u: RadialField, s: float) -> float:
    """``J(s * u)`` without resampling."""
    A = fld.grad_norm_squared(u)
    return 0.5 * s * s * A - _fiber_terms(model, u, s, "F")


def phi_prime(model, u, s):
    A = fld.grad_norm_squared(u)
    return s * A - 0.5 * u.N / s * _fiber_terms(model, u, s, "H")


def phi_second(model, u, s):
    N = u.N
    A = fld.grad_norm_squared(u)
    H = _fiber_terms(model, u, s, "H")
    hu = _fiber_terms(model, u, s, "hu")
    return A + (0.5 * N * (N + 1) * H - 0.25 * N * N * hu) / (s * s)


def phi_second_derivative_at_1(model: NonlinearityModel, u: RadialField, tol: float = MEMBERSHIP_TOL) -> float:
    """``(N^2/4)(2_# int H(u) - int h(u) u)`` for ``u`` in ``M``.

    Raises :class:`PreconditionError` when ``|M(u)| > tol |grad u|_2^2``.
    """
    _same_dimension(model, u)
    g2 = fld.grad_norm_squared(u)
    m = M_functional(model, u)
    if abs(m) > tol * g2:
        raise PreconditionError(f"field is not on M: |M(u)|/|grad u|^2 = {abs(m) / g2:.2e}")
    H = fld.integral_of(model.H, u)
    hu = fld.integral_of(lambda t: model.h(t) * t, u)
    return 0.25 * model.N**2 * (model.two_sharp * H - hu)


def classify(model: NonlinearityModel, u: RadialField, tol: float = MEMBERSHIP_TOL, dead_band: float = DEAD_BAND) -> Branch:
    value = phi_second_derivative_at_1(model, u, tol)
    if abs(value) <= dead_band * fld.grad_norm_squared(u):
        return Branch.ZERO
    return Branch.MINUS if value < 0 else Branch.PLUS


# ---------------------------------------------------------------------------
# scans


@dataclass
class FiberingScan:
    s: np.ndarray
    phi: np.ndarray
    dphi: np.ndarray
    d2phi: np.ndarray
    local_max: list
    local_min: list
    t_u: Optional[float]
    classification: Optional[Branch] = None
    grad_norm_sq: float = 0.0

    def to_rows(self):
        return [
            {"s": float(s), "phi": float(p), "dphi": float(d)}
            for s, p, d in zip(self.s, self.phi, self.dphi)
        ]


def _refine_root(fn, lo, hi):
    return brentq(fn, lo, hi, xtol=1e-14, rtol=4 * np.finfo(float).eps, maxiter=200)


def fiber_scan(
    model: NonlinearityModel,
    u: RadialField,
    s_range: tuple = (1e-3, 1e2),
    n_s: int = 2001,
) -> FiberingScan:
    """Sample ``phi`` on a log grid and locate its critical points.

    Critical points are the sign changes of ``phi' = M(s * u)/s``, refined with
    Brent's method; ``t_u`` is the largest local maximum when exactly one exists.
    """
    _same_dimension(model, u)
    if fld.grad_norm_squared(u) == 0:
        raise DomainError("fiber of the zero field is trivial")
    s = np.geomspace(s_range[0], s_range[1], n_s)
    with np.errstate(all="ignore"):
        p = np.array([phi(model, u, x) for x in s])
        dp = np.array([phi_prime(model, u, x) for x in s])
        d2 = np.array([phi_second(model, u, x) for x in s])
    if not (np.all(np.isfinite(p)) and np.all(np.isfinite(dp))):
        raise EvaluationError("fibering map is not finite on the scan range")
    maxima, minima = [], []
    for i in np.nonzero(np.sign(dp[:-1]) * np.sign(dp[1:]) < 0)[0]:
        root = _refine_root(lambda x: phi_prime(model, u, x), s[i], s[i + 1])
        (maxima if dp[i] > 0 else minima).append(root)
    t_u = maxima[0] if len(maxima) == 1 else None
    cls = None
    A = fld.grad_norm_squared(u)
    if abs(phi_prime(model, u, 1.0)) <= MEMBERSHIP_TOL * A:
        cls = classify(model, u)
    return FiberingScan(s, p, dp, d2, maxima, minima, t_u, cls, A)


@dataclass(frozen=True)
class J1J2Certificate:
    j1: bool
    n_local_max: int
    j2: bool
    t_u: Optional[float]
    worst_curvature: float
    note: str = "per-field numeric check"


def check_J1_J2(scan: FiberingScan) -> J1J2Certificate:
    """(J1): one strict local maximum; (J2): ``phi`` concave to its right.

    Concavity is read from centred second differences on the (non-uniform)
    scan grid with tolerance ``1e-7 |phi| + 1e-12``.
    """
    n_max = len(scan.local_max)
    j1 = n_max == 1
    if not j1:
        return J1J2Certificate(False, n_max, False, None, float("nan"))
    s, p = scan.s, scan.phi
    hl = s[1:-1] - s[:-2]
    hr = s[2:] - s[1:-1]
    d2 = 2.0 * (hl * p[2:] - (hl + hr) * p[1:-1] + hr * p[:-2]) / (hl * hr * (hl + hr))
    mask = s[1:-1] > scan.t_u
    if not mask.any():
        return J1J2Certificate(True, 1, True, scan.t_u, float("-inf"))
    excess = d2[mask] - (1e-7 * np.abs(p[1:-1][mask]) + 1e-12)
    return J1J2Certificate(True, 1, bool(np.all(excess <= 0)), scan.t_u, float(d2[mask].max()))


def fiber_project(model: NonlinearityModel, u: RadialField, s_range=(1e-3, 1e3), n_s: int = 400):
    """Mass-preserving projection ``t_u * u`` onto the maximum of the fiber.

    Returns ``(t_u, t_u * u)``.  Unlike :func:`project_to_M` this never changes
    the mass, so it is the projection used inside ``M_-`` minimisation.
    """
    scan = fiber_scan(model, u, s_range, n_s)
    if not scan.local_max:
        raise NotProjectableError("fiber has no interior maximum on the scan range")
    t_u = scan.local_max[-1]
    v = fld.scale_star(t_u, u)
    for _ in range(4):
        if abs(phi_prime(model, v, 1.0)) <= 1e-12 * fld.grad_norm_squared(v):
            break
        step = _refine_root(lambda x: phi_prime(model, v, x), 0.9, 1.1)
        v = fld.scale_star(step, v)
        t_u *= step
    return t_u, v


# ---------------------------------------------------------------------------
# exact Descartes analysis for sums of powers


@dataclass(frozen=True)
class DescartesCertificate:
    m: int
    exponents: tuple  # exponents of P in the variable t = s^{1/m}
    coefficients: tuple  # exact rationals when the norms are rational, else floats
    sign_changes: int
    max_positive_roots: int
    at_most_two: bool
    second_derivative_signs: tuple
    second_derivative_changes: int
    near_zero: str  # "convex" or "concave"
    j2_pattern: Optional[str]
    exact: bool

    def to_dict(self) -> dict:
        return {
            "m": self.m,
            "exponents": [str(e) for e in self.exponents],
            "coefficients": [str(c) for c in self.coefficients],
            "sign_changes": self.sign_changes,
            "max_positive_roots": self.max_positive_roots,
            "at_most_two": self.at_most_two,
            "second_derivative_signs": list(self.second_derivative_signs),
            "near_zero": self.near_zero,
            "j2_pattern": self.j2_pattern,
            "exact": self.exact,
            "tags": ["appB1:descartes"],
        }


def _sign_changes(signs):
    nz = [x for x in signs if x != 0]
    return sum(1 for a, b in zip(nz, nz[1:]) if a != b)


def _to_fraction(x):
    if isinstance(x, Fraction):
        return x
    return Fraction(x)  # floats convert exactly


def descartes_certificate(spec: MultiPowerSpec, N: int, norms: dict) -> DescartesCertificate:
    """Exact sign analysis of ``P`` with ``phi'(s) = s^{-1} P(s^{1/m})``.

    ``norms`` holds ``"grad"`` (``|grad u|_2^2``) and ``"lp"``, a mapping from
    exponent to ``|u|_q^q``.  Exponents must be rational; coefficients are built
    from exact conversions of the supplied floats, so the sign pattern is exact.
    """
    if not isinstance(spec, MultiPowerSpec):
        spec = MultiPowerSpec(**spec)
    spec.validate(N)
    if not spec.is_rational:
        raise DomainError("irrational exponents: use fiber_scan for a numeric-only check")
    grad = _to_fraction(norms["grad"])
    if not grad > 0:
        raise DomainError("|grad u|_2^2 must be positive")
    lp = {Fraction(k) if not isinstance(k, Fraction) else k: _to_fraction(v) for k, v in norms["lp"].items()}
    half_N = Fraction(N, 2)
    terms = []  # (s-exponent e, phi' coefficient, phi'' coefficient)
    for term in spec.terms:
        q = term.exponent
        e = half_N * (q - 2)  # a_k/b_k or c_l/d_l, already reduced
        norm = lp.get(q)
        if norm is None or not norm > 0:
            raise DomainError(f"missing or non-positive |u|_q^q for q = {q}")
        c = -_to_fraction(term.coefficient) / q * e * norm
        terms.append((e, c, c * (e - 1)))
    terms.append((Fraction(2), grad, grad))
    terms.sort(key=lambda t: t[0])
    m = lcm(*[t[0].denominator for t in terms])
    exps = tuple(int(t[0] * m) for t in terms)
    coefs = tuple(t[1] for t in terms)
    signs = [int(np.sign(float(c))) if c != 0 else 0 for c in coefs]
    changes = _sign_changes(signs)
    d2_signs = tuple(int(np.sign(float(t[2]))) if t[2] != 0 else 0 for t in terms)
    d2_changes = _sign_changes(d2_signs)
    # behaviour near s = 0 from the lowest exponent of phi''
    q_sub = [t.exponent for t in spec.subcritical]
    conv = Fraction(2) + Fraction(2, N)
    if q_sub:
        q0, qK = q_sub[0], q_sub[-1]
        if q0 < conv or (q0 == conv and len(q_sub) == 1):
            near_zero = "convex"
        else:
            near_zero = "concave"
        nz = [x for x in d2_signs if x != 0]
        if qK <= conv and _is_block(nz, (1, -1)):
            j2 = "+...+-...-"
        elif (q0 > conv or (q0 == conv and len(q_sub) > 1)) and _is_block(nz, (-1, 1, -1)):
            j2 = "-...-+-...-"
        else:
            j2 = None
    else:
        near_zero = "convex"
        j2 = "+...+-...-" if _is_block([x for x in d2_signs if x != 0], (1, -1)) else None
    return DescartesCertificate(
        m=m,
        exponents=exps,
        coefficients=coefs,
        sign_changes=changes,
        max_positive_roots=changes,
        at_most_two=changes <= 2,
        second_derivative_signs=d2_signs,
        second_derivative_changes=d2_changes,
        near_zero=near_zero,
        j2_pattern=j2,
        exact=True,
    )


def _is_block(signs, pattern):
    """True when ``signs`` is a run-length expansion of ``pattern``."""
    runs = [s for i, s in enumerate(signs) if i == 0 or signs[i - 1] != s]
    return tuple(runs) == tuple(pattern)


def descartes_norms(spec: MultiPowerSpec, u: RadialField) -> dict:
    """The norm inputs of :func:`descartes_certificate` for a field ``u``."""
    return {
        "grad": fld.grad_norm_squared(u),
        "lp": {t.exponent: fld.lp_norm(u, float(t.exponent)) ** float(t.exponent) for t in spec.terms},
    }


# ---------------------------------------------------------------------------
# diagnostics on M_-


def h1_h2_margin(model: NonlinearityModel, u: RadialField) -> float:
    """``int H2(u) - (2_# - a)/(2^* - 2_#) int H1(u)``; positive on ``M_-``."""
    if model.a is None:
        return fld.integral_of(model.H2, u)
    k = (model.two_sharp - model.a) / (model.two_star - model.two_sharp)
    return fld.integral_of(model.H2, u) - k * fld.integral_of(model.H1, u)


def _sup_ratio(num, den, ts):
    with np.errstate(all="ignore"):
        r = num(ts) / den(ts)
    r = r[np.isfinite(r)]
    return float(r.max()) if r.size else 0.0


def _positive_grid():
    return np.unique(np.concatenate([np.geomspace(1e-6, 1e6, 2401), np.linspace(0.0, 10.0, 2001)[1:]]))


def _h1_constant(model, ts):
    """A constant with ``H1(t) <= C (t^2 + |t|^a)``.

    For sums of powers ``2 < q <= a`` gives ``|t|^q <= t^2 + |t|^a``, so the sum
    of the H1 coefficients is an exact choice.  Other models use the sampled
    supremum, which is only an estimate.
    """
    desc = model.description
    if desc.get("family") == "multipower":
        return sum(c * (q - 2) / q for c, q in _described_terms(desc["subcritical"]))
    return _sup_ratio(model.H1, lambda t: t**2 + t**model.a, ts)


def _described_terms(entries):
    for entry in entries:
        coef, *exp = entry
        q = exp[0] / exp[1] if len(exp) == 2 else exp[0]
        yield float(coef), float(q)


def grad_floor(model: NonlinearityModel, rho: float, S: Optional[float] = None, C2: Optional[float] = None):
    """Positive lower bound for ``|grad u|_2`` on ``M_- cap D_rho``.

    Chains ``|grad u|^2 = (N/2) int H < K int H2``, ``H2 <= C2 (|t|^b + |t|^{2^*})``
    and the Gagliardo-Nirenberg and Sobolev inequalities into
    ``x^2 <= A x^p + B x^{2^*}`` and returns the smallest positive root from
    :func:`bound_from_below`.  ``C2`` defaults to a sampled supremum.
    """
    N, a, b = model.N, model.a, model.b
    sharp, star = model.two_sharp, model.two_star
    if a is None or b is None or not a < sharp < b:
        raise DomainError("grad floor needs exponents a < 2_# < b")
    S = sobolev_constant(N) if S is None else S
    if C2 is None:
        C2 = _sup_ratio(model.H2, lambda t: t**b + t**star, _positive_grid())
    K = 0.5 * N * (star - a) / (sharp - a)
    p = 0.5 * N * (b - 2)
    Cb = gn_constant(N, b)
    A = K * C2 * Cb**b * rho ** (b - p)
    B = K * C2 * S ** (-star / 2)
    if b >= star:
        return (A + B) ** (1.0 / (2.0 - p))
    return bound_from_below(A, B, p, star).x_min


@dataclass(frozen=True)
class MemptyGuard:
    """Sufficient smallness conditions that rule out ``M_0`` in ``D_rho``."""

    rho_guard: float
    C: float
    C_eps: float
    eps: float
    D: float
    C_Na: float
    C_Nb: float
    constants_source: str  # "user" or "sampled"

    def conditions(self, rho: float, N: int, a: float, b: float, two_sharp: float, two_star: float) -> dict:
        k = 0.5 * N * (a - 2)
        A = self.D * rho**2
        B = self.D * self.C_Na**a * rho ** (a - k)
        above = bound_from_above(A, B, k) if A > 0 and B > 0 else None
        below = 0.5 * N * (two_star - a) / (two_sharp - a) * self.C_eps * self.C_Nb**b * rho ** (
            b - 0.5 * N * (b - 2)
        )
        return {
            "upper_lemma": bool(above.admissible) if above else False,
            "lower_lemma": below <= 0.5,
            "contradiction": math.sqrt(self.D) * rho + 0.5 < 1.0,
        }


def mempty_guard(
    model: NonlinearityModel,
    C: Optional[float] = None,
    C_eps: Optional[float] = None,
    eps: Optional[float] = None,
    rho_hi: float = 1e3,
) -> MemptyGuard:
    """Largest ``rho`` for which the sufficient conditions excluding ``M_0`` hold.

    ``C`` bounds ``H1(t) <= C (t^2 + |t|^a)`` and ``C_eps`` bounds
    ``H2(t) <= eps |t|^{2^*} + C_eps |t|^b``.  Either may be supplied; missing
    ones are taken as suprema over a sampled grid (``constants_source``
    records which).  All three conditions are monotone in ``rho`` except the
    upper-bound lemma, so the guard is found by a log scan followed by bisection
    on the first failure.
    """
    N, a, b = model.N, model.a, model.b
    sharp, star = model.two_sharp, model.two_star
    if a is None or b is None or not a < sharp < b:
        raise DomainError("the guard needs exponents a < 2_# < b")
    S = sobolev_constant(N)
    source = "user" if (C is not None and C_eps is not None) else "sampled"
    ts = _positive_grid()
    if C is None:
        C = _h1_constant(model, ts)
    if eps is None:
        eps = S ** (star / 2) / N * (sharp - a) / (star - a)
    if C_eps is None:
        C_eps = max(_sup_ratio(lambda t: model.H2(t) - eps * t**star, lambda t: t**b, ts), 0.0)
    D = C * 0.5 * N * (b - 2) / (b - sharp)
    guard = MemptyGuard(0.0, C, C_eps, eps, D, gn_constant(N, a), gn_constant(N, b) if b < star else 1.0 / math.sqrt(S), source)

    def ok(rho):
        return all(guard.conditions(rho, N, a, b, sharp, star).values())

    rhos = np.geomspace(1e-8, rho_hi, 400)
    flags = [ok(r) for r in rhos]
    if not flags[0]:
        return guard
    bad = next((i for i, f in enumerate(flags) if not f), None)
    if bad is None:
        rho_guard = rho_hi
    else:
        lo, hi = rhos[bad - 1], rhos[bad]
        for _ in range(100):
            mid = 0.5 * (lo + hi)
            lo, hi = (mid, hi) if ok(mid) else (lo, mid)
        rho_guard = float(lo)
    return MemptyGuard(rho_guard, C, C_eps, eps, D, guard.C_Na, guard.C_Nb, source)
