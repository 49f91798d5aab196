"""Time-dependent flow ``i d_t Psi + Lap Psi + f(Psi) = 0`` on a radial grid.

Under this convention ``Psi = u exp(+i lambda t)`` is a standing wave whenever
``-Lap u + lambda u = f(u)``, and the virial weight ``V = int |x|^2 |Psi|^2``
obeys ``V'' = 8 M(Psi)``.

Integration is Strang splitting.  The nonlinear half step
``Psi <- exp(i theta(|Psi|) dt/2) Psi`` with ``theta(m) = f(m)/m`` is exact
because it leaves ``|Psi|`` unchanged.  The linear step is Crank-Nicolson for
``W d_t Psi = -i K Psi``, which is unitary in the weighted norm, so the discrete
mass is conserved up to round-off.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.linalg import lapack

from . import field as fld
from .exceptions import DomainError, StepSizeError
from .field import RadialField
from .nonlinearity import NonlinearityModel

__all__ = [
    "EvolutionTrace",
    "Integrator",
    "evolve",
    "orbital_distance",
    "h1_norm",
    "stability_probe",
    "StabilityReport",
    "blowup_probe",
    "BlowupReport",
    "phase_rate",
    "energy_order",
    "BLOWUP_FACTOR",
]

log = logging.getLogger(__name__)

BLOWUP_FACTOR = 1e3
STEP_ERROR_FACTOR = 100.0


# ---------------------------------------------------------------------------
# norms and distances


def _h1_inner(u: np.ndarray, v: np.ndarray, grid) -> complex:
    du = np.empty_like(u)
    du[:-1] = u[1:] - u[:-1]
    du[-1] = -u[-1]
    dv = np.empty_like(v)
    dv[:-1] = v[1:] - v[:-1]
    dv[-1] = -v[-1]
    return complex(np.sum(grid.weights * u * np.conj(v)) + np.sum(grid.face_coefficients * du * np.conj(dv)))


def h1_norm(u: RadialField) -> float:
    return math.sqrt(fld.mass_squared(u) + fld.grad_norm_squared(u))


def orbital_distance(psi: RadialField, reference: RadialField) -> float:
    """Distance in H^1 from ``psi`` to the phase orbit of ``reference``.

    The optimal phase maximises ``Re(exp(i t) <psi, ref>)`` and is therefore
    ``-arg <psi, ref>``; the distance is then evaluated directly rather than
    through the polarisation identity, which would lose half the digits.
    """
    if psi.grid != reference.grid:
        raise DomainError("orbital distance needs fields on the same grid")
    p = np.asarray(psi.values, dtype=complex)
    ref = np.asarray(reference.values, dtype=complex)
    z = _h1_inner(p, ref, psi.grid)
    phase = -np.angle(z) if abs(z) > 0 else 0.0
    diff = psi.grid.field(np.exp(1j * phase) * p - ref)
    return h1_norm(diff)


# ---------------------------------------------------------------------------
# integrator


class Integrator:
    """Strang splitting on a fixed grid with a cached Crank-Nicolson factor."""

    def __init__(self, model: NonlinearityModel, grid):
        if model.N != grid.N:
            raise DomainError(f"model dimension {model.N} differs from grid dimension {grid.N}")
        if not model.is_odd:
            raise DomainError("the complex extension of f requires an odd nonlinearity")
        self.model = model
        self.grid = grid
        self.w = grid.weights
        self.r2w = grid.weights * grid.r**2
        self.main, self.off = grid.stiffness_bands
        self.c = grid.face_coefficients
        self._dt = None

    def _factor(self, dt):
        if self._dt == dt:
            return
        a = 0.5j * dt
        dl = (a * self.off).astype(complex)
        d = (self.w + a * self.main).astype(complex)
        dl2, d2, du2, du3, ipiv, info = lapack.zgttrf(dl, d, dl.copy())
        if info != 0:
            raise DomainError(f"Crank-Nicolson factorisation failed (info={info})")
        self._lu = (dl2, d2, du2, du3, ipiv)
        self._dt = dt

    def _Kdot(self, x):
        out = self.main * x
        out[:-1] += self.off * x[1:]
        out[1:] += self.off * x[:-1]
        return out

    def linear(self, psi, dt):
        self._factor(dt)
        rhs = self.w * psi - 0.5j * dt * self._Kdot(psi)
        dl2, d2, du2, du3, ipiv = self._lu
        out, info = lapack.zgttrs(dl2, d2, du2, du3, ipiv, rhs)
        return out

    def nonlinear(self, psi, tau):
        return np.exp(1j * tau * self.model.theta(np.abs(psi))) * psi

    def step(self, psi, dt):
        psi = self.nonlinear(psi, 0.5 * dt)
        psi = self.linear(psi, dt)
        return self.nonlinear(psi, 0.5 * dt)

    # monitors on raw arrays
    def grad_squared(self, psi):
        # sum of positive face terms; psi* K psi would cancel badly near a collapse
        d = np.empty_like(psi)
        d[:-1] = psi[1:] - psi[:-1]
        d[-1] = -psi[-1]
        return float(np.sum(self.c * (d.real**2 + d.imag**2)))

    def potential(self, psi):
        return float(np.sum(self.w * self.model.F(np.abs(psi))))

    def energy(self, psi):
        return 0.5 * self.grad_squared(psi) - self.potential(psi)

    def mass(self, psi):
        return math.sqrt(float(np.sum(self.w * np.abs(psi) ** 2)))

    def virial(self, psi):
        return float(np.sum(self.r2w * np.abs(psi) ** 2))

    def M(self, psi):
        return self.grad_squared(psi) - 0.5 * self.grid.N * float(np.sum(self.w * self.model.H(np.abs(psi))))


@dataclass
class EvolutionTrace:
    """Recorded time series of one run."""

    t: np.ndarray
    mass: np.ndarray
    energy: np.ndarray
    grad_norm: np.ndarray
    V: np.ndarray
    M: np.ndarray
    dist: np.ndarray
    dt_history: list = field(default_factory=list)
    blowup: bool = False
    blowup_time: Optional[float] = None
    final: Optional[RadialField] = None
    overlap: Optional[np.ndarray] = None
    steps: int = 0

    @property
    def V_prime(self) -> np.ndarray:
        return np.gradient(self.V, self.t) if len(self.t) > 2 else np.zeros_like(self.V)

    def mass_drift(self) -> float:
        return float(np.max(np.abs(self.mass - self.mass[0])) / self.mass[0])

    def energy_drift(self) -> float:
        """Largest excursion of the energy from its initial value."""
        return float(np.max(np.abs(self.energy - self.energy[0])))

    def virial_defect(self, stop: Optional[float] = None) -> np.ndarray:
        """``|D^2 V - 8 M| / (1 + |M|)`` at interior records (nonuniform stencil)."""
        t, V, M = self.t, self.V, self.M
        if stop is not None:
            keep = t <= stop
            t, V, M = t[keep], V[keep], M[keep]
        if len(t) < 3:
            return np.zeros(0)
        h0 = t[1:-1] - t[:-2]
        h1 = t[2:] - t[1:-1]
        # records closer than a few ulps of t carry no usable second difference
        ok = np.minimum(h0, h1) > 1e3 * np.finfo(float).eps * np.abs(t[1:-1])
        h0, h1 = h0[ok], h1[ok]
        V0, V1, V2, Mc = V[:-2][ok], V[1:-1][ok], V[2:][ok], M[1:-1][ok]
        d2 = 2.0 * (h0 * V2 - (h0 + h1) * V1 + h1 * V0) / (h0 * h1 * (h0 + h1))
        return np.abs(d2 - 8.0 * Mc) / (1.0 + np.abs(Mc))

    def rows(self):
        for i in range(len(self.t)):
            yield {
                "t": float(self.t[i]),
                "mass": float(self.mass[i]),
                "energy": float(self.energy[i]),
                "gradnorm": float(self.grad_norm[i]),
                "V": float(self.V[i]),
                "M": float(self.M[i]),
                "dist": float(self.dist[i]),
            }

    def summary(self) -> dict:
        return {
            "records": len(self.t),
            "steps": self.steps,
            "t_end": float(self.t[-1]),
            "mass_drift": self.mass_drift(),
            "energy_drift": self.energy_drift(),
            "max_grad_norm": float(np.max(self.grad_norm)),
            "blowup": self.blowup,
            "blowup_time": self.blowup_time,
            "final_dt": self.dt_history[-1][1] if self.dt_history else None,
        }


def evolve(
    model: NonlinearityModel,
    psi0: RadialField,
    dt: float,
    T: float,
    record_every: int = 10,
    reference: Optional[RadialField] = None,
    energy_tol: float = 1e-6,
    max_halvings: int = 0,
    blowup_factor: float = BLOWUP_FACTOR,
    monitor: Optional[Callable[[float, np.ndarray], None]] = None,
) -> EvolutionTrace:
    """Integrate from ``psi0`` over ``[0, T]``, recording every ``record_every`` steps.

    Steps are taken in chunks between records.  Consecutive nonlinear half
    steps are fused, which is exact since they commute.  A chunk whose energy
    changes by more than ``100 * energy_tol`` times the initial kinetic plus
    potential scale is rolled back and retried with half the step, at most
    ``max_halvings`` times per run; beyond that a :class:`StepSizeError`
    suggests a step.  The run stops with ``blowup=True`` once ``|grad Psi|_2``
    exceeds ``blowup_factor`` times its initial value.
    """
    if not (dt > 0 and T > 0):
        raise DomainError(f"dt and T must be positive, got dt={dt}, T={T}")
    if record_every < 1:
        raise DomainError(f"record_every must be >= 1, got {record_every}")
    grid = psi0.grid
    integ = Integrator(model, grid)
    psi = np.asarray(psi0.values, dtype=complex).copy()
    ref = reference

    ts, ms, es, gs, vs, Ms, ds, ovs = [], [], [], [], [], [], [], []

    def record(t, psi, g2, pot):
        ts.append(t)
        ms.append(integ.mass(psi))
        es.append(0.5 * g2 - pot)
        gs.append(math.sqrt(max(g2, 0.0)))
        vs.append(integ.virial(psi))
        Ms.append(integ.M(psi))
        if ref is not None:
            ds.append(orbital_distance(grid.field(psi), ref))
            ovs.append(complex(np.sum(grid.weights * psi * np.conj(ref.values))))
        else:
            ds.append(float("nan"))
        if monitor is not None:
            monitor(t, psi)

    g2 = integ.grad_squared(psi)
    pot = integ.potential(psi)
    record(0.0, psi, g2, pot)
    # fixed energy scale: kinetic and potential parts may blow up while E stays put
    scale = max(0.5 * g2 + abs(pot), 1e-300)
    ceiling = blowup_factor * gs[0]
    dt_hist = [(0.0, dt)]
    halvings = 0
    t = t_err = 0.0
    steps = 0
    E = es[0]
    blowup = False
    blowup_time = None
    end = T * (1 - 1e-12)
    while t < end:
        k = min(record_every, max(1, math.ceil((T - t) / dt - 1e-9)))
        h = min(dt, (T - t) / k)
        trial = integ.nonlinear(psi, 0.5 * h)
        for j in range(k):
            trial = integ.linear(trial, h)
            trial = integ.nonlinear(trial, h if j < k - 1 else 0.5 * h)
        g2_new = integ.grad_squared(trial)
        pot_new = integ.potential(trial)
        E_new = 0.5 * g2_new - pot_new
        if not np.isfinite(E_new) or abs(E_new - E) > STEP_ERROR_FACTOR * energy_tol * scale:
            if halvings >= max_halvings:
                raise StepSizeError(
                    f"energy changed by {abs(E_new - E):.3e} over {k} steps of size {h:.3e}",
                    suggested_dt=0.5 * h,
                )
            halvings += 1
            dt = 0.5 * h
            dt_hist.append((t, dt))
            log.debug("halving step to %.3e at t=%.6g", dt, t)
            continue
        psi, E, g2, pot = trial, E_new, g2_new, pot_new
        # compensated sum: near a collapse dt falls below eps * t
        y = k * h - t_err
        t_new = t + y
        t_err = (t_new - t) - y
        t = t_new
        steps += k
        record(t, psi, g2, pot)
        if gs[-1] > ceiling:
            blowup, blowup_time = True, t
            break

    arr = np.asarray
    return EvolutionTrace(
        t=arr(ts),
        mass=arr(ms),
        energy=arr(es),
        grad_norm=arr(gs),
        V=arr(vs),
        M=arr(Ms),
        dist=arr(ds),
        dt_history=dt_hist,
        blowup=blowup,
        blowup_time=blowup_time,
        final=grid.field(psi),
        overlap=arr(ovs) if ovs else None,
        steps=steps,
    )


def phase_rate(trace: EvolutionTrace) -> float:
    """Least-squares slope of the unwrapped phase of ``<Psi(t), reference>``."""
    if trace.overlap is None:
        raise DomainError("phase rate needs a trace recorded against a reference")
    ph = np.unwrap(np.angle(trace.overlap))
    return float(np.polyfit(trace.t, ph, 1)[0])


def energy_order(model, psi0: RadialField, T: float, dts=(4e-3, 2e-3, 1e-3), reference_dt: Optional[float] = None) -> dict:
    """Observed convergence order of the splitting under step halving.

    Errors are final-time H^1 distances to a run with a four times smaller
    step, together with the final energy errors against that run.
    """
    dts = sorted(dts, reverse=True)
    ref_dt = reference_dt or dts[-1] / 4
    ref = evolve(model, psi0, ref_dt, T, record_every=10**9)
    errs, e_errs = [], []
    for dt in dts:
        run = evolve(model, psi0, dt, T, record_every=10**9)
        errs.append(h1_norm(run.final - ref.final))
        e_errs.append(abs(run.energy[-1] - ref.energy[-1]))
    orders = [math.log2(errs[i] / errs[i + 1]) for i in range(len(errs) - 1)]
    return {"dts": list(dts), "errors": errs, "energy_errors": e_errs, "orders": orders, "order": min(orders)}


# ---------------------------------------------------------------------------
# probes


def _smooth_bump(grid, rng) -> np.ndarray:
    vals = np.zeros(grid.n, dtype=complex)
    for _ in range(3):
        c = rng.uniform(0.0, 0.25 * grid.r_max)
        width = rng.uniform(0.5, 3.0)
        amp = rng.normal() + 1j * rng.normal()
        vals += amp * np.exp(-0.5 * ((grid.r - c) / width) ** 2)
    return vals


@dataclass
class StabilityReport:
    epsilon: float
    horizon: float
    rho: float
    R0: float
    initial_energy: float
    in_well: bool
    sup_distance: float
    max_grad_norm: float
    grad_margin: float
    stable: Optional[bool]
    finding: str
    trace: EvolutionTrace = field(repr=False)
    tags: list = field(default_factory=list)

    def to_dict(self) -> dict:
        out = {k: getattr(self, k) for k in (
            "epsilon", "horizon", "rho", "R0", "initial_energy", "in_well",
            "sup_distance", "max_grad_norm", "grad_margin", "stable", "finding",
        )}
        out["trace"] = self.trace.summary()
        out["tags"] = list(self.tags)
        return out


def stability_probe(
    model: NonlinearityModel,
    ground: RadialField,
    epsilon: float,
    T: float,
    dt: float,
    R0: float,
    seed: int = 0,
    record_every: int = 50,
    energy_tol: float = 1e-6,
) -> StabilityReport:
    """Perturb the local minimiser by ``epsilon`` in H^1 and follow the orbit.

    The perturbation is a random combination of complex Gaussian bumps with
    unit H^1 norm; the perturbed datum is rescaled back to the mass of
    ``ground``.  The horizon is finite, so the report can only say the orbit
    stayed close up to ``T``.
    """
    if epsilon < 0:
        raise DomainError(f"epsilon must be nonnegative, got {epsilon}")
    grid = ground.grid
    rho = fld.mass(ground)
    rng = np.random.default_rng(seed)
    bump = grid.field(_smooth_bump(grid, rng))
    bump = bump * (1.0 / h1_norm(bump))
    psi0 = ground.with_values(ground.values.astype(complex)) + bump * epsilon
    psi0 = psi0 * (rho / fld.mass(psi0))
    E0 = Integrator(model, grid).energy(psi0.values)
    in_well = E0 < 0
    trace = evolve(
        model, psi0, dt, T, record_every=record_every, reference=ground,
        energy_tol=energy_tol, blowup_factor=max(BLOWUP_FACTOR, 10 * R0 / fld.grad_norm(ground)),
    )
    max_grad = float(np.max(trace.grad_norm))
    sup_dist = float(np.nanmax(trace.dist))
    margin = R0 - max_grad
    tags = ["pr:os:finite_horizon"]
    if not in_well:
        stable, finding = None, "initial energy is not negative: datum lies outside the well, no stability claim"
    elif trace.blowup or margin <= 0:
        stable, finding = False, "gradient norm reached R0: stability violation"
    else:
        stable, finding = True, f"orbit stayed within distance {sup_dist:.3e} up to T={T}"
        tags.append("pr:os:grad_below_R0")
    return StabilityReport(
        epsilon, T, rho, R0, E0, in_well, sup_dist, max_grad, margin, stable, finding, trace, tags
    )


@dataclass
class BlowupReport:
    s: float
    delta: float
    V0: float
    V_prime0: float
    T_star: float
    M0: float
    blowup: bool
    detection_time: Optional[float]
    before_T_star: bool
    max_M_excess: float
    concave_near_end: bool
    finding: str
    trace: EvolutionTrace = field(repr=False)
    tags: list = field(default_factory=list)

    def to_dict(self) -> dict:
        out = {k: getattr(self, k) for k in (
            "s", "delta", "V0", "V_prime0", "T_star", "M0", "blowup", "detection_time",
            "before_T_star", "max_M_excess", "concave_near_end", "finding",
        )}
        out["trace"] = self.trace.summary()
        out["tags"] = list(self.tags)
        if not self.blowup:
            out["V_series"] = [[float(a), float(b)] for a, b in zip(self.trace.t, self.trace.V)]
        return out


def virial_root(V0: float, V1: float, delta: float) -> float:
    """Positive root of ``V0 + V1 t - 4 delta t^2``."""
    if delta <= 0:
        return math.inf
    return (V1 + math.sqrt(V1 * V1 + 16.0 * delta * V0)) / (8.0 * delta)


def blowup_probe(
    model: NonlinearityModel,
    excited: RadialField,
    s: float,
    dt: float,
    inf_energy: Optional[float] = None,
    record_every: int = 5,
    energy_tol: float = 1e-6,
    max_halvings: int = 40,
    horizon_factor: float = 2.0,
    blowup_factor: float = BLOWUP_FACTOR,
) -> BlowupReport:
    """Evolve ``s * u~`` and compare the detection time with the virial bound.

    ``delta = inf J - J(s * u~)`` where the infimum over ``M_-`` defaults to
    ``J(u~)``.  The virial weight satisfies ``V(t) <= V0 + V'(0) t - 4 delta t^2``,
    whose positive root ``T*`` bounds the lifespan.  The run stops at the
    gradient ceiling or at ``horizon_factor * T*``.
    """
    if not s > 0:
        raise DomainError(f"s must be positive, got {s}")
    grid = excited.grid
    integ = Integrator(model, grid)
    psi0 = fld.scale_star(s, excited.with_values(excited.values.real))
    psi0 = psi0.with_values(psi0.values.astype(complex))
    J_inf = integ.energy(excited.values.astype(complex)) if inf_energy is None else inf_energy
    J0 = integ.energy(psi0.values)
    delta = J_inf - J0
    V0 = integ.virial(psi0.values)
    # real data: V'(0) = 4 Im int conj(psi) x.grad psi = 0
    V1 = 0.0
    T_star = virial_root(V0, V1, delta)
    M0 = integ.M(psi0.values)
    horizon = horizon_factor * T_star if math.isfinite(T_star) else 1.0
    trace = evolve(
        model, psi0, dt, horizon, record_every=record_every, energy_tol=energy_tol,
        max_halvings=max_halvings, blowup_factor=blowup_factor,
    )
    excess = trace.M + delta
    max_excess = float(np.max(excess)) if delta > 0 else math.nan
    keep = np.concatenate([[True], np.diff(trace.t) > 0])
    tail, tt = trace.V[keep][-6:], trace.t[keep][-6:]
    concave = False
    if len(tail) >= 3:
        concave = bool(np.all(np.diff(np.diff(tail) / np.diff(tt)) < 0))
    tags = []
    if M0 < 0:
        tags.append("le:inst:M_negative")
    if delta > 0:
        tags.append("le:inst:delta_positive")
    if trace.blowup:
        before = trace.blowup_time <= T_star
        finding = f"blow-up detected at t={trace.blowup_time:.6g}, virial bound T*={T_star:.6g}"
        if before:
            tags.append("pr:si:blowup_before_Tstar")
    else:
        before = False
        finding = f"no blow-up by t={trace.t[-1]:.6g} (T*={T_star:.6g})"
    return BlowupReport(
        s, delta, V0, V1, T_star, M0, trace.blowup, trace.blowup_time, before,
        max_excess, concave, finding, trace, tags,
    )
