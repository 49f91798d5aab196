"""Geometric constants of the local-minimum regime.

``g(alpha, t) = 1/2 - C0 alpha^2 t^-2 - C0 S^{-2^*/2} t^{2^*-2}`` bounds the
energy from below through ``J(u) >= g(rho, |grad u|_2) |grad u|_2^2``.  Its two
roots ``R0 < R1`` exist exactly when ``rho^2`` is below
``2/(N-2) (S / (2^* C0))^{N/2}``.
"""

from __future__ import annotations

import functools
import math
import threading
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.integrate import simpson, solve_ivp
from scipy.optimize import bisect

from .exceptions import AccuracyError, DomainError, ShootingError
from .field import sphere_area
from .nonlinearity import NonlinearityModel, compute_C0

__all__ = [
    "g_value",
    "g_times_t2",
    "s_max",
    "rho_threshold",
    "find_R0_R1",
    "RootPair",
    "root_sensitivity",
    "sobolev_constant",
    "sobolev_quotient",
    "gn_constant",
    "gn_ground_state",
    "gamma_q",
    "GeometryReport",
    "geometry_report",
]

ROOT_RTOL = 1e-12


def _two_star(N):
    return 2.0 * N / (N - 2)


def _check_positive(**kwargs):
    for name, value in kwargs.items():
        if not value > 0:
            raise DomainError(f"{name} must be positive, got {value}")


def _check_N(N):
    if int(N) != N or N < 3:
        raise DomainError(f"dimension N must be an integer >= 3, got {N}")


def g_value(C0: float, S: float, N: int, alpha: float, t: float) -> float:
    """``1/2 - C0 alpha^2 t^-2 - C0 S^{-2^*/2} t^{2^*-2}``."""
    _check_N(N)
    _check_positive(C0=C0, S=S, alpha=alpha)
    t = np.asarray(t, dtype=float)
    if np.any(t <= 0):
        raise DomainError("g is defined for t > 0 only")
    star = _two_star(N)
    out = 0.5 - C0 * alpha**2 / t**2 - C0 * S ** (-star / 2) * t ** (star - 2)
    return float(out) if out.ndim == 0 else out


def g_times_t2(C0, S, N, alpha, t):
    t = np.asarray(t, dtype=float)
    return g_value(C0, S, N, alpha, t) * t**2


def s_max(C0: float, S: float, N: int) -> float:
    """The unique maximiser of ``t -> g(alpha, t) t^2`` (independent of alpha)."""
    star = _two_star(N)
    return (S ** (star / 2) / (star * C0)) ** (1.0 / (star - 2))


def rho_threshold(C0: float, S: float, N: int) -> float:
    """Upper bound for ``rho^2``: ``2/(N-2) (S / (2^* C0))^{N/2}``."""
    _check_N(N)
    _check_positive(C0=C0, S=S)
    return 2.0 / (N - 2) * (S / (_two_star(N) * C0)) ** (N / 2)


@dataclass(frozen=True)
class RootPair:
    R0: Optional[float]
    R1: Optional[float]
    s_max: float
    no_threshold: bool = False

    def __iter__(self):
        return iter((self.R0, self.R1))


def find_R0_R1(C0: float, S: float, N: int, rho: float, rtol: float = ROOT_RTOL) -> RootPair:
    """Roots of ``g(rho, .)`` bracketed by ``(0, s_max)`` and ``(s_max, inf)``.

    Returns a pair with ``no_threshold=True`` when ``rho^2`` reaches the
    threshold, in which case ``g(rho, .) <= 0`` everywhere.
    """
    _check_N(N)
    _check_positive(C0=C0, S=S, rho=rho)
    sm = s_max(C0, S, N)
    if rho**2 >= rho_threshold(C0, S, N) or g_value(C0, S, N, rho, sm) <= 0:
        return RootPair(None, None, sm, True)

    def g(t):
        return g_value(C0, S, N, rho, t)

    lo = sm
    while g(lo) > 0:
        lo *= 0.5
    hi = sm
    while g(hi) > 0:
        hi *= 2.0
    R0 = bisect(g, lo, sm, xtol=1e-300, rtol=max(rtol, 4 * np.finfo(float).eps), maxiter=400)
    R1 = bisect(g, sm, hi, xtol=1e-300, rtol=max(rtol, 4 * np.finfo(float).eps), maxiter=400)
    return RootPair(R0, R1, sm, False)


def root_sensitivity(C0, S, N, rho, step=1e-6):
    """Centred finite-difference ``(dR0/drho, dR1/drho)``."""
    up = find_R0_R1(C0, S, N, rho * (1 + step))
    dn = find_R0_R1(C0, S, N, rho * (1 - step))
    if up.no_threshold or dn.no_threshold:
        raise DomainError("rho too close to the threshold for a centred difference")
    d = 2 * rho * step
    return (up.R0 - dn.R0) / d, (up.R1 - dn.R1) / d


# ---------------------------------------------------------------------------
# Sobolev constant from the Aubin-Talenti profile


def sobolev_quotient(N: int, mu: float = 1.0, n_nodes: int = 200) -> float:
    """``|grad U|_2^2 / |U|_{2^*}^2`` for ``U = (1 + |x/mu|^2)^{-(N-2)/2}``.

    Integrals are taken after the substitution ``r = mu tan(theta)``, which maps
    the half line onto ``(0, pi/2)`` with smooth integrands, by Gauss-Legendre
    quadrature with ``n_nodes`` points.
    """
    _check_N(N)
    _check_positive(mu=mu)
    star = _two_star(N)
    x, w = leggauss(n_nodes)
    theta = 0.25 * math.pi * (x + 1.0)
    w = 0.25 * math.pi * w
    sin, cos = np.sin(theta), np.cos(theta)
    omega = sphere_area(N)
    # r = mu tan(theta): U = cos^{N-2}, U' = -(N-2) sin cos^{N-1} / mu, dr = mu sec^2
    grad_sq = omega * (N - 2) ** 2 * mu ** (N - 2) * np.sum(w * sin ** (N + 1) * cos ** (N - 3))
    crit = omega * mu**N * np.sum(w * sin ** (N - 1) * cos ** (N - 1))
    return float(grad_sq / crit ** (2.0 / star))


def sobolev_constant(N: int, mus: Sequence[float] = (0.5, 1.0, 2.0), n_nodes: int = 200, tol: float = 1e-10) -> float:
    """Best Sobolev constant ``S`` from the Aubin-Talenti quotient.

    The quotient is evaluated at several scales ``mu`` and at two quadrature
    resolutions; all must agree to ``tol`` (relative) or
    :class:`AccuracyError` is raised.  Returns the smallest value.
    """
    values = [sobolev_quotient(N, mu, n_nodes) for mu in mus]
    coarse = sobolev_quotient(N, 1.0, n_nodes // 2)
    spread = max(abs(v - values[0]) for v in values + [coarse]) / values[0]
    if spread > tol:
        raise AccuracyError(f"Sobolev quotient not converged (spread {spread:.2e})", achieved=spread)
    return float(min(values))


# ---------------------------------------------------------------------------
# Gagliardo-Nirenberg constant by shooting


def gamma_q(N: int, q: float) -> float:
    return N * (q - 2) / (2 * q)


@dataclass
class ShootingResult:
    w0: float
    r: np.ndarray
    w: np.ndarray
    dw: np.ndarray
    bracket_trace: list = field(default_factory=list)


def _shoot(w0, N, q, r_end, r_start=1e-6):
    """Integrate the radial ODE from near 0; classify as overshoot (+1) or undershoot (-1)."""
    w2 = (w0 - w0 ** (q - 1)) / N  # w''(0)

    def rhs(r, y):
        w, dw = y
        return [dw, -(N - 1) / r * dw + w - abs(w) ** (q - 2) * w]

    def crosses_zero(r, y):
        return y[0]

    crosses_zero.terminal = True
    crosses_zero.direction = -1

    def turns_up(r, y):
        return y[1]

    turns_up.terminal = True
    turns_up.direction = 1

    y0 = [w0 + 0.5 * w2 * r_start**2, w2 * r_start]
    sol = solve_ivp(
        rhs, (r_start, r_end), y0, method="DOP853", rtol=1e-13, atol=1e-15,
        events=(crosses_zero, turns_up), dense_output=True,
    )
    if sol.t_events[0].size:
        return 1, sol
    if sol.t_events[1].size:
        return -1, sol
    return 0, sol


def gn_ground_state(N: int, q: float, r_end: float = 40.0, h: float = 1e-3) -> ShootingResult:
    """Positive decaying solution of ``-Delta w + w = |w|^{q-2} w`` by bisection on ``w(0)``."""
    _check_N(N)
    star = _two_star(N)
    if not 2 < q < star:
        raise DomainError(f"shooting needs 2 < q < 2^* = {star}, got {q}")
    trace = []
    lo = 1.0 + 1e-9
    hi = 2.0
    while True:
        kind, _ = _shoot(hi, N, q, r_end)
        trace.append((hi, kind))
        if kind == 1:
            break
        lo = hi
        hi *= 2.0
        if hi > 1e8:
            raise ShootingError("no overshooting initial value found", trace=trace)
    last = None
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        kind, sol = _shoot(mid, N, q, r_end)
        trace.append((mid, kind))
        if kind == 1:
            hi = mid
        else:
            lo = mid
            last = sol
    if last is None:
        raise ShootingError("bisection produced no undershooting profile", trace=trace)
    # the undershoot from the lower bracket follows the ground state until it turns up
    r_stop = last.t[-1]
    kind, sol_hi = _shoot(hi, N, q, r_end)
    r_stop = min(r_stop, sol_hi.t[-1])
    n_pts = int(round((r_stop - 1e-6) / h))
    r = np.linspace(0.0, n_pts * h, n_pts + 1)
    r_eval = np.maximum(r, 1e-6)
    y_lo = last.sol(r_eval)
    y_hi = sol_hi.sol(r_eval)
    w = 0.5 * (y_lo[0] + y_hi[0])
    dw = 0.5 * (y_lo[1] + y_hi[1])
    w[0] = lo
    dw[0] = 0.0
    # cut where the two brackets separate (trajectory no longer trustworthy)
    split = np.nonzero(np.abs(y_lo[0] - y_hi[0]) > 1e-8 * lo)[0]
    if split.size:
        cut = split[0]
        w, dw, r = w[:cut], dw[:cut], r[:cut]
    if w[-1] > 1e-5 * w[0]:
        raise ShootingError(
            f"ground state has not decayed at r={r[-1]:.2f} (w={w[-1]:.2e})", trace=trace
        )
    return ShootingResult(lo, r, w, dw, trace)


def _radial_integral(r, values, N):
    return sphere_area(N) * simpson(values * r ** (N - 1), x=r)


def gn_constant(N: int, q: float, h: float = 1e-3, r_end: float = 40.0, return_state: bool = False):
    """Optimal constant in ``|u|_q <= C |grad u|_2^gamma |u|_2^{1-gamma}``.

    ``q = 2`` gives 1.  Otherwise the optimiser is the ground state of
    ``-Delta w + w = |w|^{q-2} w``, computed by shooting, and the norms are
    integrated with Simpson's rule on a uniform grid of spacing ``h``.
    """
    if return_state:
        return _gn_constant(N, float(q), h, r_end)
    return _gn_constant(N, float(q), h, r_end)[0]


@functools.lru_cache(maxsize=64)
def _gn_constant(N, q, h, r_end):
    # cached: callers must not mutate the returned state arrays
    _check_N(N)
    if q == 2:
        return 1.0, None
    state = gn_ground_state(N, q, r_end=r_end, h=h)
    r, w, dw = state.r, state.w, state.dw
    lq = _radial_integral(r, np.abs(w) ** q, N) ** (1 / q)
    grad = math.sqrt(_radial_integral(r, dw**2, N))
    l2 = math.sqrt(_radial_integral(r, w**2, N))
    g = gamma_q(N, q)
    C = lq / (grad**g * l2 ** (1 - g))
    return C, state


# ---------------------------------------------------------------------------
# report


@dataclass(frozen=True)
class GeometryReport:
    C0: float
    S: float
    rho: float
    rho_max_sq: float
    R0: Optional[float]
    R1: Optional[float]
    s_max: float
    no_threshold: bool
    N: int
    C0_argmax: Optional[float] = None
    gamma_q: dict = field(default_factory=dict)
    C_Nq: dict = field(default_factory=dict)

    @property
    def rho_max(self) -> float:
        return math.sqrt(self.rho_max_sq)

    def g(self, t):
        return g_value(self.C0, self.S, self.N, self.rho, t)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["gamma_q"] = {str(k): v for k, v in self.gamma_q.items()}
        d["C_Nq"] = {str(k): v for k, v in self.C_Nq.items()}
        d["tags"] = ["eq:C0", "eq:gns", "eq:rho", "le:g:g2"]
        return d


_REPORT_CACHE: dict = {}
_CACHE_LOCK = threading.Lock()


def geometry_report(
    model: NonlinearityModel, rho: float, qs: Sequence[float] = (), use_cache: bool = True
) -> GeometryReport:
    """Collect ``C0``, ``S``, the threshold, ``R0``, ``R1`` and ``s_max`` for ``(model, rho)``."""
    _check_positive(rho=rho)
    key = (model.digest, model.N, float(rho), tuple(float(q) for q in qs))
    if use_cache:
        with _CACHE_LOCK:
            cached = _REPORT_CACHE.get(key)
        if cached is not None:
            return cached
    N = model.N
    c0 = compute_C0(model)
    S = sobolev_constant(N)
    roots = find_R0_R1(c0.value, S, N, rho)
    report = GeometryReport(
        C0=c0.value,
        S=S,
        rho=float(rho),
        rho_max_sq=rho_threshold(c0.value, S, N),
        R0=roots.R0,
        R1=roots.R1,
        s_max=roots.s_max,
        no_threshold=roots.no_threshold,
        N=N,
        C0_argmax=c0.t_max,
        gamma_q={float(q): gamma_q(N, q) for q in qs},
        C_Nq={float(q): gn_constant(N, q) for q in qs},
    )
    if use_cache:
        with _CACHE_LOCK:
            _REPORT_CACHE[key] = report
    return report
