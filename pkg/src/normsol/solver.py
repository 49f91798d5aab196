"""Normalized solutions: the stable local minimiser and the ``M_-`` minimiser.

Both solvers work with the discrete energy ``E(u) = u.K u / 2 - sum w F(u)`` on
the grid of :mod:`normsol.field`, whose Euclidean gradient is
``K u - W f(u)`` (``W`` the quadrature weights).  Descent directions are
preconditioned by the H^1-type operator ``K + sigma W`` and projected onto
the tangent space of the mass sphere in the preconditioner metric.  After the
descent has found the basin, a Newton iteration on ``(u, lambda)`` (the
bordered Euler-Lagrange system) drives the discrete residual to round-off.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.linalg import solveh_banded
from scipy.sparse import bmat, csc_matrix, diags
from scipy.sparse.linalg import spsolve
from sklearn.base import BaseEstimator

from . import field as fld
from .exceptions import (
    DomainError,
    EscapedWellError,
    NormsolError,
    NotProjectableError,
    RhoTooLargeError,
    StallError,
    WrongBranchError,
)
from .fibering import DEAD_BAND, Branch, M_functional, fiber_project, mempty_guard, phi
from .field import RadialField, RadialGrid
from .nonlinearity import NonlinearityModel
from .thresholds import geometry_report

__all__ = [
    "SolverOptions",
    "Residuals",
    "GroundStateResult",
    "lagrange_multiplier",
    "residuals",
    "minimize_local",
    "minimize_on_Mminus",
    "newton_polish",
    "m_curve",
    "MCurveRow",
    "LocalMinimizer",
    "MMinusMinimizer",
]

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SolverOptions:
    max_iter: int = 20000
    tol: float = 1e-8  # projected gradient, relative to |u|_2
    stall_tol: float = 1e-10  # relative energy change (M_- branch)
    M_tol: float = 1e-8  # |M(u)| relative to |grad u|^2 (M_- branch)
    tau0: float = 0.1
    tau_max: float = 4.0
    armijo: float = 1e-4
    max_backtracks: int = 40
    guard_fraction: float = 1e-3  # epsilon = guard_fraction * R0
    polish: bool = True
    polish_tol: float = 1e-9
    polish_max_iter: int = 30
    descent_tol_before_polish: float = 1e-5
    max_plus_streak: int = 25
    record_trajectory: bool = False


@dataclass(frozen=True)
class Residuals:
    pde: float
    nehari: float
    pohozaev: float

    def max(self) -> float:
        return max(self.pde, self.nehari, self.pohozaev)


@dataclass
class GroundStateResult:
    field: RadialField
    lam: float
    energy: float
    mass: float
    grad_norm: float
    residuals: Residuals
    iterations: int
    converged: bool
    branch: str  # "local-min" or "M-minus"
    history: list = field(default_factory=list)
    info: dict = field(default_factory=dict)

    def summary(self) -> dict:
        vals = self.field.values.real
        return {
            "branch": self.branch,
            "converged": self.converged,
            "lambda": self.lam,
            "energy": self.energy,
            "mass": self.mass,
            "grad_norm": self.grad_norm,
            "residuals": {
                "pde": self.residuals.pde,
                "nehari": self.residuals.nehari,
                "pohozaev": self.residuals.pohozaev,
            },
            "iterations": self.iterations,
            "min_value": float(vals.min()),
            "max_value": float(vals.max()),
            **{k: v for k, v in self.info.items() if _jsonable(v)},
        }


def _jsonable(v):
    return isinstance(v, (int, float, str, bool, list, dict, type(None)))


# ---------------------------------------------------------------------------
# multiplier and residuals


def lagrange_multiplier(model: NonlinearityModel, u: RadialField) -> float:
    """``lambda = (int f(u) u - |grad u|_2^2) / |u|_2^2`` from the Nehari identity."""
    m2 = fld.mass_squared(u)
    if m2 == 0:
        raise DomainError("multiplier of the zero field is undefined")
    return (fld.integral_of(lambda t: model.f(t) * t, u) - fld.grad_norm_squared(u)) / m2


def residuals(model: NonlinearityModel, u: RadialField, lam: float) -> Residuals:
    """Relative PDE, Nehari and Pohozaev residuals of ``(u, lambda)``."""
    grid = u.grid
    vals = u.values.real
    w = grid.weights
    g2 = fld.grad_norm_squared(u)
    m2 = fld.mass_squared(u)
    norm = math.sqrt(m2) if m2 > 0 else 1.0
    pde_vec = -fld.laplacian(u).values.real + lam * vals - model.f(vals)
    pde = math.sqrt(float(np.sum(w * pde_vec**2))) / norm
    fu = float(np.sum(w * model.f(vals) * vals))
    Fu = float(np.sum(w * model.F(vals)))
    star = model.two_star
    nehari = abs(g2 + lam * m2 - fu) / max(g2 + abs(lam) * m2 + abs(fu), 1e-300)
    poho = abs(g2 - star * (Fu - 0.5 * lam * m2)) / max(g2 + star * (abs(Fu) + 0.5 * abs(lam) * m2), 1e-300)
    return Residuals(pde, nehari, poho)


# ---------------------------------------------------------------------------
# discrete machinery


class _Discrete:
    """Energy, gradient and preconditioner on one grid."""

    def __init__(self, model: NonlinearityModel, grid: RadialGrid):
        if model.N != grid.N:
            raise DomainError(f"model dimension {model.N} differs from grid dimension {grid.N}")
        self.model = model
        self.grid = grid
        self.w = grid.weights
        self.main, self.off = grid.stiffness_bands
        self.K = grid.stiffness_matrix()

    def Kdot(self, u):
        out = self.main * u
        out[:-1] += self.off * u[1:]
        out[1:] += self.off * u[:-1]
        return out

    def energy(self, u):
        return 0.5 * float(u @ self.Kdot(u)) - float(np.sum(self.w * self.model.F(u)))

    def gradient(self, u):
        return self.Kdot(u) - self.w * self.model.f(u)

    def mass(self, u):
        return math.sqrt(float(np.sum(self.w * u * u)))

    def grad_norm(self, u):
        return math.sqrt(float(u @ self.Kdot(u)))

    def precondition(self, rhs, sigma):
        ab = np.zeros((2, rhs.shape[0]))
        ab[0, 1:] = self.off
        ab[1] = self.main + sigma * self.w
        return solveh_banded(ab, rhs, lower=False, check_finite=False)

    def residual_floor(self, u):
        """Round-off level of :meth:`pde_residual` at ``u``.

        ``K u`` and ``W f(u)`` nearly cancel, so the attainable residual is set
        by ``eps |K| |u|`` measured in the same ``W^{-1}`` norm.
        """
        a = np.abs(u)
        mag = np.abs(self.main) * a
        mag[:-1] += np.abs(self.off) * a[1:]
        mag[1:] += np.abs(self.off) * a[:-1]
        eps = np.finfo(float).eps
        return eps * math.sqrt(float(np.sum(mag * mag / self.w))) / max(self.mass(u), 1e-300)

    def multiplier(self, u, e):
        return -float(u @ e) / float(np.sum(self.w * u * u))

    def pde_residual(self, u, e, lam):
        r = e + lam * self.w * u
        return math.sqrt(float(np.sum(r * r / self.w))) / self.mass(u)

    def tangent_direction(self, u, e, sigma):
        d = self.precondition(e, sigma)
        z = self.precondition(self.w * u, sigma)
        wu = self.w * u
        return d - (float(wu @ d) / float(wu @ z)) * z

    def field(self, u):
        return RadialField(self.grid, u)


def _sigma(lam, u_d: _Discrete, u):
    # shift of the preconditioner: tracks lambda, bounded below for robustness
    scale = u_d.grad_norm(u) ** 2 / max(float(np.sum(u_d.w * u * u)), 1e-300)
    return max(lam, 1e-2 * scale, 1e-8)


def newton_polish(
    model: NonlinearityModel,
    u: RadialField,
    rho: float,
    lam: Optional[float] = None,
    tol: float = 1e-12,
    max_iter: int = 30,
    max_relative_change: float = 0.05,
):
    """Newton iteration on ``K u + lambda W u - W f(u) = 0``, ``|u|_2 = rho``.

    Returns ``(u, lambda, converged)``.  Iterates that move further than
    ``max_relative_change`` (relative L^2) from the starting field are rejected
    and the input is returned unchanged, so the polish can only refine a state
    already found by descent.
    """
    disc = _Discrete(model, u.grid)
    x = u.values.real.astype(float).copy()
    x0 = x.copy()
    lam = lagrange_multiplier(model, u) if lam is None else lam
    w = disc.w
    # below this the residual is round-off and Newton cannot improve it
    tol = max(tol, 10.0 * disc.residual_floor(x))
    for _ in range(max_iter):
        e = disc.gradient(x)
        R = e + lam * w * x
        c = 0.5 * (float(np.sum(w * x * x)) - rho * rho)
        res = disc.pde_residual(x, e, lam)
        if res <= tol and abs(c) <= 1e-12 * rho * rho:
            return disc.field(x), lam, True
        jac = disc.K + diags(w * (lam - model.derivative(x)), 0, format="csc")
        wu = csc_matrix((w * x)[:, None])
        A = bmat([[jac, wu], [wu.T, None]], format="csc")
        step = spsolve(A, -np.concatenate([R, [c]]))
        if not np.all(np.isfinite(step)):
            break
        x = x + step[:-1]
        lam = lam + step[-1]
        if disc.mass(x - x0) > max_relative_change * rho:
            break
    else:
        e = disc.gradient(x)
        if disc.pde_residual(x, e, lam) <= 10 * tol:
            return disc.field(x), lam, True
    return u, lagrange_multiplier(model, u), False


def _normalize(disc, u, rho):
    return u * (rho / disc.mass(u))


STALL_WINDOW = 10


def _stalled(history, tol):
    if len(history) <= STALL_WINDOW:
        return False
    return history[-STALL_WINDOW - 1] - history[-1] <= tol * abs(history[-1])


def _grid_for(grid, model):
    if grid is None:
        grid = RadialGrid(N=model.N)
    if grid.N != model.N:
        raise DomainError(f"grid dimension {grid.N} differs from model dimension {model.N}")
    return grid


# ---------------------------------------------------------------------------
# first solution: local minimiser in the well


def _local_initial_guess(model, grid, rho, guard):
    """Gaussian of mass ``rho`` dilated by ``s * .`` until ``J < 0`` inside the well."""
    base = grid.gaussian(1.0)
    base = base * (rho / fld.mass(base))
    g = fld.grad_norm(base)
    s = min(1.0, 0.5 * guard / g)
    while s > 1e-3:
        if phi(model, base, s) < 0 and s * g < guard:
            try:
                return fld.scale_star(s, base), s
            except NormsolError:
                break
        s *= 0.8
    raise EscapedWellError("no initial guess with negative energy fits on the grid")


def minimize_local(
    model: NonlinearityModel,
    rho: float,
    grid: Optional[RadialGrid] = None,
    options: Optional[SolverOptions] = None,
    initial: Optional[RadialField] = None,
) -> GroundStateResult:
    """Minimise ``J`` on ``S_rho`` inside the well ``|grad u|_2 < R0``.

    Preconditioned projected gradient descent with Armijo backtracking; every
    accepted iterate is renormalised to mass ``rho``.  Leaving the well (the
    gradient norm reaching ``R0 - eps``) raises :class:`EscapedWellError`.
    """
    opts = options or SolverOptions()
    grid = _grid_for(grid, model)
    geo = geometry_report(model, rho)
    if geo.no_threshold:
        raise DomainError(
            f"rho^2 = {rho * rho:.6g} is not below the threshold {geo.rho_max_sq:.6g}"
        )
    guard = geo.R0 * (1.0 - opts.guard_fraction)
    disc = _Discrete(model, grid)
    if initial is None:
        u0, s0 = _local_initial_guess(model, grid, rho, guard)
    else:
        u0, s0 = initial, None
    x = _normalize(disc, np.abs(u0.values.real), rho)
    if disc.grad_norm(x) >= guard:
        raise EscapedWellError("initial guess lies outside the well", trace=[])
    E = disc.energy(x)
    history = [E]
    trajectory = []
    tau = opts.tau0
    converged = settled = False
    it = 0
    res = float("inf")
    target = opts.descent_tol_before_polish if opts.polish else opts.tol
    for it in range(1, opts.max_iter + 1):
        e = disc.gradient(x)
        lam = disc.multiplier(x, e)
        res = disc.pde_residual(x, e, lam)
        if res <= target:
            converged = True
            break
        g = disc.tangent_direction(x, e, _sigma(lam, disc, x))
        slope = float(e @ g)
        for _ in range(opts.max_backtracks):
            trial = _normalize(disc, x - tau * g, rho)
            E_trial = disc.energy(trial)
            if E_trial <= E - opts.armijo * tau * slope:
                break
            tau *= 0.5
        else:
            raise StallError(f"no energy decrease after {opts.max_backtracks} backtracks", trace=history)
        gn = disc.grad_norm(trial)
        if gn >= guard:
            raise EscapedWellError(
                f"gradient norm {gn:.6g} reached the guard R0 - eps = {guard:.6g}",
                trace=history + [E_trial],
            )
        x, E = trial, E_trial
        history.append(E)
        if opts.record_trajectory:
            trajectory.append((E, gn))
        tau = min(tau * 1.5, opts.tau_max)
        if _stalled(history, opts.stall_tol):
            settled = True
            break
    polished = False
    u = disc.field(x)
    lam = lagrange_multiplier(model, u)
    if opts.polish and (converged or settled):
        u_new, lam_new, polished = newton_polish(model, u, rho, lam, opts.polish_tol, opts.polish_max_iter)
        if polished and fld.grad_norm(u_new) < guard and disc.energy(u_new.values) <= E + 1e-12 * abs(E):
            u, lam = u_new, lam_new
        else:
            polished = False
        converged = polished or res <= opts.tol
    vals = u.values
    if vals.min() < 0 and abs(vals.min()) < 1e-14 * vals.max():
        vals = np.maximum(vals, 0.0)
        u = u.with_values(vals)
    log.debug("local minimiser: %d iterations, converged=%s, lambda=%.10g", it, converged, lam)
    return GroundStateResult(
        field=u,
        lam=lam,
        energy=fld.energy_J(model, u),
        mass=fld.mass(u),
        grad_norm=fld.grad_norm(u),
        residuals=residuals(model, u, lam),
        iterations=it,
        converged=converged,
        branch="local-min",
        history=history,
        info={
            "R0": geo.R0,
            "R1": geo.R1,
            "guard": guard,
            "initial_scale": s0,
            "polished": polished,
            "trajectory": trajectory if opts.record_trajectory else None,
            "tags": [
                "th:locmin:energy_negative",
                "th:locmin:lambda_positive",
                "th:locmin:constant_sign",
                "th:locmin:inside_well",
            ],
        },
    )


# ---------------------------------------------------------------------------
# second solution: minimiser on M_- cap D_rho


def _fiber_max(model, u):
    """Mass-preserving projection onto the fiber maximum, fast path near s = 1."""
    from .fibering import _refine_root, phi_prime, phi_second

    lo, hi = 0.7, 1.4
    if phi_prime(model, u, lo) > 0 > phi_prime(model, u, hi):
        t = _refine_root(lambda s: phi_prime(model, u, s), lo, hi)
        if phi_second(model, u, t) < 0:
            return t, fld.scale_star(t, u)
    return fiber_project(model, u)


class _MConstraint:
    """The discrete set ``{|u|_2 = rho, M(u) = 0}`` and its tangent projector.

    ``M`` is evaluated with the grid quadrature, so restoring the constraint
    never resamples the field.
    """

    def __init__(self, disc: _Discrete, rho: float):
        self.disc = disc
        self.model = disc.model
        self.rho = rho
        self.N = disc.grid.N

    def values(self, x):
        d = self.disc
        return (
            0.5 * (float(np.sum(d.w * x * x)) - self.rho**2),
            float(x @ d.Kdot(x)) - 0.5 * self.N * float(np.sum(d.w * self.model.H(x))),
        )

    def gradients(self, x):
        d = self.disc
        return d.w * x, 2.0 * d.Kdot(x) - 0.5 * self.N * d.w * self.model.h(x)

    def _basis(self, x, sigma):
        a, b = self.gradients(x)
        za = self.disc.precondition(a, sigma)
        zb = self.disc.precondition(b, sigma)
        C = np.array([[a @ za, a @ zb], [b @ za, b @ zb]])
        return a, b, za, zb, C

    def tangent(self, x, v, sigma):
        """Preconditioned ``v`` projected onto the tangent space at ``x``."""
        a, b, za, zb, C = self._basis(x, sigma)
        d = self.disc.precondition(v, sigma)
        coef = np.linalg.solve(C, [a @ d, b @ d])
        return d - coef[0] * za - coef[1] * zb

    def restore(self, x, sigma, max_iter=30):
        """Gauss-Newton return to the constraint set; None if it fails."""
        g2 = float(x @ self.disc.Kdot(x))
        for _ in range(max_iter):
            c1, c2 = self.values(x)
            if abs(c1) <= 1e-15 * self.rho**2 and abs(c2) <= 1e-13 * g2:
                return x
            a, b, za, zb, C = self._basis(x, sigma)
            try:
                coef = np.linalg.solve(C, [c1, c2])
            except np.linalg.LinAlgError:
                return None
            x = x - coef[0] * za - coef[1] * zb
            g2 = float(x @ self.disc.Kdot(x))
            if not np.isfinite(g2):
                return None
        c1, c2 = self.values(x)
        if abs(c1) <= 1e-12 * self.rho**2 and abs(c2) <= 1e-10 * g2:
            return x
        return None

    def residual(self, x, e):
        """Relative size of ``e + lambda W x - mu grad M`` with best-fit multipliers."""
        a, b = self.gradients(x)
        w = self.disc.w
        G = np.array([[a @ (a / w), a @ (b / w)], [b @ (a / w), b @ (b / w)]])
        coef = np.linalg.lstsq(G, [a @ (e / w), b @ (e / w)], rcond=None)[0]
        r = e - coef[0] * a - coef[1] * b
        return math.sqrt(float(np.sum(r * r / w))) / self.disc.mass(x)

    def curvature(self, x):
        """``phi''(1)`` of the discrete fiber: ``(N^2/4)(2_# int H - int h u)``."""
        d = self.disc
        m = self.model
        return 0.25 * self.N**2 * float(
            np.sum(d.w * (m.two_sharp * m.H(x) - m.h(x) * x))
        )


def minimize_on_Mminus(
    model: NonlinearityModel,
    rho: float,
    grid: Optional[RadialGrid] = None,
    options: Optional[SolverOptions] = None,
    initial: Optional[RadialField] = None,
) -> GroundStateResult:
    """Minimise ``J`` over ``M_- cap D_rho`` among radial fields.

    Each iteration takes a preconditioned descent step tangent to
    ``S_rho cap M``, replaces the trial by its decreasing rearrangement (odd
    ``f``) and returns it to ``S_rho cap M`` with a Gauss-Newton correction that
    preserves the mass.  Trials classified ``M_+`` are rejected; meeting ``M_0``
    raises :class:`RhoTooLargeError` carrying the sufficient smallness bound on
    ``rho``.  Once the descent has settled, a Newton polish on the
    Euler-Lagrange system removes the remaining residual and a final
    correction puts the state back on ``M``.
    """
    opts = options or SolverOptions()
    grid = _grid_for(grid, model)
    disc = _Discrete(model, grid)
    con = _MConstraint(disc, rho)
    if initial is None:
        base = grid.gaussian(1.0)
        base = base * (rho / fld.mass(base))
    else:
        base = initial * (rho / fld.mass(initial))
    try:
        _, u = fiber_project(model, base)
    except NotProjectableError as exc:
        raise WrongBranchError(f"initial field has no fiber maximum: {exc}") from exc
    history: list = []

    def branch_of(x):
        value = con.curvature(x)
        g2 = float(x @ disc.Kdot(x))
        if abs(value) <= DEAD_BAND * g2:
            guard = _safe_guard(model)
            raise RhoTooLargeError(
                f"iterate classified M_0 at rho = {rho:g} (sufficient bound {guard})",
                guard=guard,
                trace=history,
            )
        return Branch.MINUS if value < 0 else Branch.PLUS

    x = u.values.real.copy()
    x = con.restore(x, _sigma(disc.multiplier(x, disc.gradient(x)), disc, x))
    if x is None:
        raise WrongBranchError("could not place the initial field on M")
    if branch_of(x) is not Branch.MINUS:
        raise WrongBranchError("initial field is not in M_-")
    E = disc.energy(x)
    history.append(E)
    tau = opts.tau0
    plus_streak = 0
    converged = settled = False
    target = opts.descent_tol_before_polish if opts.polish else opts.tol
    it = 0
    res = float("inf")
    for it in range(1, opts.max_iter + 1):
        e = disc.gradient(x)
        lam = disc.multiplier(x, e)
        res = con.residual(x, e)
        if res <= target:
            converged = True
            break
        sigma = _sigma(lam, disc, x)
        g = con.tangent(x, e, sigma)
        slope = float(e @ g)
        accepted = False
        for _ in range(opts.max_backtracks):
            trial = x - tau * g
            if model.is_odd:
                trial = fld.rearrange_decreasing(disc.field(trial)).values
            trial = con.restore(trial, sigma)
            if trial is None:
                tau *= 0.5
                continue
            if branch_of(trial) is not Branch.MINUS:
                plus_streak += 1
                if plus_streak >= opts.max_plus_streak:
                    raise WrongBranchError("iterates persistently classified M_+", trace=history)
                tau *= 0.5
                continue
            plus_streak = 0
            E_trial = disc.energy(trial)
            if E_trial <= E - opts.armijo * tau * slope:
                accepted = True
                break
            tau *= 0.5
        if not accepted:
            recent = history[max(0, len(history) - 5):]
            if max(recent) - min(recent) <= opts.stall_tol * abs(E):
                settled = True
                break
            raise StallError(f"no admissible decrease after {opts.max_backtracks} backtracks", trace=history)
        x, E = trial, E_trial
        history.append(E)
        tau = min(tau * 1.5, opts.tau_max)
        if _stalled(history, opts.stall_tol):
            # the energy no longer resolves further progress
            settled = True
            break
    polished = False
    if opts.polish and (converged or settled):
        u_new, lam_new, polished = newton_polish(
            model, disc.field(x), rho, None, opts.polish_tol, opts.polish_max_iter
        )
        if polished:
            x = u_new.values.real.copy()
    converged = polished or converged and not opts.polish
    # a discrete critical point satisfies M = 0 only up to discretisation
    # error; the final correction puts the state on M at round-off level
    g2 = float(x @ disc.Kdot(x))
    M_before = con.values(x)[1] / g2
    if abs(M_before) > opts.M_tol:
        corrected = con.restore(x, _sigma(disc.multiplier(x, disc.gradient(x)), disc, x))
        if corrected is not None:
            x = corrected
    u = disc.field(x)
    lam = lagrange_multiplier(model, u)
    cls = branch_of(x)
    if cls is not Branch.MINUS:
        raise WrongBranchError(f"final state classified {cls.value}", trace=history)
    M_rel = abs(M_functional(model, u)) / fld.grad_norm_squared(u)
    converged = converged and M_rel <= opts.M_tol
    log.debug("M- minimiser: %d iterations, converged=%s, lambda=%.10g", it, converged, lam)
    return GroundStateResult(
        field=u,
        lam=lam,
        energy=fld.energy_J(model, u),
        mass=fld.mass(u),
        grad_norm=fld.grad_norm(u),
        residuals=residuals(model, u, lam),
        iterations=it,
        converged=converged,
        branch="M-minus",
        history=history,
        info={
            "classification": cls.value,
            "M_relative": M_rel,
            "M_relative_before_correction": abs(M_before),
            "polished": polished,
            "tags": [
                "th:2sol:energy_positive",
                "th:2sol:lambda_positive",
                "th:2sol:in_Mminus",
                "th:2sol:decreasing",
            ],
        },
    )


def _safe_guard(model):
    try:
        return float(mempty_guard(model).rho_guard)
    except NormsolError:
        return None


# ---------------------------------------------------------------------------
# m_{R0}(rho) curve


@dataclass(frozen=True)
class MCurveRow:
    rho: float
    m: Optional[float]
    R0: Optional[float]
    lam: Optional[float] = None
    converged: bool = False
    error: Optional[str] = None


def m_curve(
    model: NonlinearityModel,
    rhos: Sequence[float],
    grid: Optional[RadialGrid] = None,
    options: Optional[SolverOptions] = None,
    jobs: int = 1,
) -> list:
    """Run :func:`minimize_local` for every mass; failures are recorded per row."""
    grid = _grid_for(grid, model)

    def row(rho):
        try:
            geo = geometry_report(model, rho)
            res = minimize_local(model, rho, grid, options)
            return MCurveRow(rho, res.energy, geo.R0, res.lam, res.converged)
        except NormsolError as exc:
            R0 = None
            try:
                R0 = geometry_report(model, rho).R0
            except NormsolError:
                pass
            return MCurveRow(rho, None, R0, None, False, f"{type(exc).__name__}: {exc}")

    rhos = [float(r) for r in rhos]
    if jobs <= 1:
        return [row(r) for r in rhos]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(row, rhos))


# ---------------------------------------------------------------------------
# estimator front ends


class _BaseSolver(BaseEstimator):
    _solve = None

    def _grid(self):
        return RadialGrid(N=self.model.N, r_max=self.r_max, n=self.n, stretch=self.stretch)

    def _options(self):
        return SolverOptions(max_iter=self.max_iter, tol=self.tol, polish=self.polish)

    def fit(self, X=None, y=None):
        """Solve for the configured model and mass.

        ``X`` may be an initial :class:`RadialField`; ``y`` is ignored.
        """
        if self.model is None:
            raise DomainError("estimator needs a model")
        result = type(self)._solve(self.model, self.rho, self._grid(), self._options(), X)
        self.result_ = result
        self.field_ = result.field
        self.lambda_ = result.lam
        self.energy_ = result.energy
        self.converged_ = result.converged
        return self

    def score(self, X=None, y=None):
        """Negative largest relative residual (higher is better)."""
        return -self.result_.residuals.max()


class LocalMinimizer(_BaseSolver):
    """Estimator wrapper around :func:`minimize_local`."""

    _solve = staticmethod(minimize_local)

    def __init__(self, model=None, rho=1.0, n=4096, r_max=40.0, stretch=0.0, tol=1e-8, max_iter=20000, polish=True):
        self.model = model
        self.rho = rho
        self.n = n
        self.r_max = r_max
        self.stretch = stretch
        self.tol = tol
        self.max_iter = max_iter
        self.polish = polish


class MMinusMinimizer(_BaseSolver):
    """Estimator wrapper around :func:`minimize_on_Mminus`."""

    _solve = staticmethod(minimize_on_Mminus)

    def __init__(self, model=None, rho=1.0, n=4096, r_max=40.0, stretch=0.0, tol=1e-8, max_iter=20000, polish=True):
        self.model = model
        self.rho = rho
        self.n = n
        self.r_max = r_max
        self.stretch = stretch
        self.tol = tol
        self.max_iter = max_iter
        self.polish = polish
