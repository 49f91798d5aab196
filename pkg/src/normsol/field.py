"""Radial discretization of H^1_rad(R^N).

Fields live on a cell-centred grid covering ``[0, r_max]`` (uniform,
``r_i = (i + 1/2) h``, unless a stretch is requested) with a homogeneous
Dirichlet condition just outside ``r_max``.  Quadrature uses
the midpoint rule with the surface factor ``|S^{N-1}| r^{N-1}``; the innermost
cell carries the exact volume of the ball of radius ``h`` so that the discrete
Laplacian ``-W^{-1} K`` is consistent at the origin.  Because the Laplacian is
built from the stiffness form ``K`` behind :func:`grad_norm`, it is symmetric
and negative semidefinite in the weighted inner product, and the discrete
energy, mass and Euler-Lagrange equation form one consistent variational
problem.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import cached_property
from typing import Callable

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.sparse import diags

from .exceptions import DomainError, ResolutionError, TruncationWarning

__all__ = [
    "RadialGrid",
    "RadialField",
    "sphere_area",
    "mass",
    "mass_squared",
    "grad_norm",
    "grad_norm_squared",
    "lp_norm",
    "integral_of",
    "inner",
    "energy_J",
    "scale_star",
    "dilate_mass",
    "dilate",
    "rearrange_decreasing",
    "virial_weight",
    "laplacian",
    "check_decay",
]

TAIL_FRACTION = 0.05
TAIL_TOLERANCE = 1e-6


def sphere_area(N: int) -> float:
    """Surface area of the unit sphere S^{N-1} in R^N."""
    return 2.0 * math.pi ** (N / 2) / math.gamma(N / 2)


@dataclass(frozen=True)
class RadialGrid:
    """Cell-centred radial grid on ``[0, r_max]`` in dimension ``N``.

    With ``stretch = 0`` the grid is uniform.  A positive ``stretch`` beta
    places the faces at ``r_max sinh(beta x) / sinh(beta)`` for uniform ``x``,
    which clusters cells near the origin (useful for concentrating states);
    cell volumes are then exact shell volumes.
    """

    N: int = 3
    r_max: float = 40.0
    n: int = 4096
    stretch: float = 0.0

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 3:
            raise DomainError(f"dimension N must be an integer >= 3, got {self.N}")
        if not self.r_max > 0:
            raise DomainError(f"r_max must be positive, got {self.r_max}")
        if int(self.n) != self.n or self.n < 8:
            raise DomainError(f"n must be an integer >= 8, got {self.n}")
        if not (self.stretch >= 0 and math.isfinite(self.stretch)):
            raise DomainError(f"stretch must be a finite nonnegative number, got {self.stretch}")

    @property
    def uniform(self) -> bool:
        return self.stretch == 0

    def _map(self, x):
        if self.uniform:
            return self.r_max * x
        return self.r_max * np.sinh(self.stretch * x) / math.sinh(self.stretch)

    @property
    def h(self) -> float:
        """Uniform spacing, or the innermost cell width of a stretched grid."""
        return self.r_max / self.n if self.uniform else float(self.faces[0])

    @cached_property
    def faces(self) -> np.ndarray:
        """Outer face of every cell; the last one is ``r_max``."""
        if self.uniform:
            return (np.arange(self.n) + 1.0) * self.h
        out = self._map((np.arange(self.n) + 1.0) / self.n)
        out[-1] = self.r_max
        return out

    @cached_property
    def widths(self) -> np.ndarray:
        return np.diff(np.concatenate([[0.0], self.faces]))

    @cached_property
    def r(self) -> np.ndarray:
        if self.uniform:
            return (np.arange(self.n) + 0.5) * self.h
        return self._map((np.arange(self.n) + 0.5) / self.n)

    @property
    def ghost(self) -> float:
        """Radius of the Dirichlet ghost value just outside ``r_max``."""
        return 2.0 * self.r_max - self.r[-1]

    @cached_property
    def weights(self) -> np.ndarray:
        omega = sphere_area(self.N)
        if not self.uniform:
            outer = self.faces**self.N
            inner = np.concatenate([[0.0], outer[:-1]])
            return omega * (outer - inner) / self.N
        w = omega * self.r ** (self.N - 1) * self.h
        w[0] = omega * self.h**self.N / self.N
        return w

    @cached_property
    def face_coefficients(self) -> np.ndarray:
        """Coefficients ``|S^{N-1}| r_f^{N-1} / d_f`` on the cell faces.

        ``d_f`` is the distance between the two cell centres the face couples;
        the last face couples the outermost cell to the Dirichlet ghost value 0.
        """
        gaps = np.diff(np.concatenate([self.r, [self.ghost]]))
        return sphere_area(self.N) * self.faces ** (self.N - 1) / gaps

    @cached_property
    def stiffness_bands(self) -> tuple[np.ndarray, np.ndarray]:
        """Main and off diagonal of the symmetric stiffness matrix ``K``."""
        c = self.face_coefficients
        main = c.copy()
        main[1:] += c[:-1]
        off = -c[:-1]
        return main, off

    def stiffness_matrix(self):
        main, off = self.stiffness_bands
        return diags([off, main, off], [-1, 0, 1], format="csc")

    def ball_volume(self) -> float:
        return sphere_area(self.N) * self.r_max**self.N / self.N

    def field(self, values) -> "RadialField":
        return RadialField(self, np.asarray(values))

    def from_function(self, fn: Callable[[np.ndarray], np.ndarray]) -> "RadialField":
        return RadialField(self, np.asarray(fn(self.r)))

    def gaussian(self, width: float = 1.0, amplitude: float = 1.0) -> "RadialField":
        return self.from_function(lambda r: amplitude * np.exp(-0.5 * (r / width) ** 2))


@dataclass(frozen=True, eq=False)
class RadialField:
    """A real or complex radial profile sampled on a :class:`RadialGrid`."""

    grid: RadialGrid
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values)
        if values.shape != (self.grid.n,):
            raise DomainError(
                f"field has shape {values.shape}, grid expects ({self.grid.n},)"
            )
        if not np.iscomplexobj(values):
            values = values.astype(float)
        object.__setattr__(self, "values", values)

    @property
    def N(self) -> int:
        return self.grid.N

    @property
    def is_complex(self) -> bool:
        return np.iscomplexobj(self.values)

    def with_values(self, values) -> "RadialField":
        return RadialField(self.grid, np.asarray(values))

    def __add__(self, other):
        other = other.values if isinstance(other, RadialField) else other
        return self.with_values(self.values + other)

    def __sub__(self, other):
        other = other.values if isinstance(other, RadialField) else other
        return self.with_values(self.values - other)

    def __mul__(self, scalar):
        return self.with_values(self.values * scalar)

    __rmul__ = __mul__

    def __neg__(self):
        return self.with_values(-self.values)

    def abs(self) -> "RadialField":
        return self.with_values(np.abs(self.values))


def inner(u: RadialField, v: RadialField) -> float:
    """Real part of the weighted L^2 inner product."""
    return float(np.real(np.sum(u.grid.weights * u.values * np.conj(v.values))))


def mass_squared(u: RadialField) -> float:
    return float(np.sum(u.grid.weights * np.abs(u.values) ** 2))


def mass(u: RadialField) -> float:
    """L^2 norm ``|u|_2``."""
    return math.sqrt(mass_squared(u))


def _differences(u: RadialField) -> np.ndarray:
    vals = u.values
    d = np.empty_like(vals)
    d[:-1] = vals[1:] - vals[:-1]
    d[-1] = -vals[-1]
    return d


def grad_norm_squared(u: RadialField) -> float:
    return float(np.sum(u.grid.face_coefficients * np.abs(_differences(u)) ** 2))


def grad_norm(u: RadialField) -> float:
    """``|grad u|_2`` from face differences (the stiffness form)."""
    return math.sqrt(grad_norm_squared(u))


def lp_norm(u: RadialField, p: float) -> float:
    if p < 1:
        raise DomainError(f"L^p norm needs p >= 1, got {p}")
    return float(np.sum(u.grid.weights * np.abs(u.values) ** p)) ** (1.0 / p)


def integral_of(fn: Callable[[np.ndarray], np.ndarray], u: RadialField) -> float:
    """Integral over R^N of ``fn(u(x))``; complex fields are passed by modulus."""
    vals = np.abs(u.values) if u.is_complex else u.values
    return float(np.sum(u.grid.weights * fn(vals)))


def energy_J(model, u: RadialField) -> float:
    """``J(u) = |grad u|_2^2 / 2 - int F(u)``."""
    if model.N != u.N:
        raise DomainError(f"model dimension {model.N} differs from field dimension {u.N}")
    return 0.5 * grad_norm_squared(u) - integral_of(model.F, u)


def laplacian(u: RadialField) -> RadialField:
    """Discrete radial Laplacian ``-W^{-1} K u``.

    Interior stencil is ``u'' + (N-1)/r u'`` in conservative form; the origin
    cell reduces to ``N u''``.
    """
    grid = u.grid
    c = grid.face_coefficients
    flux = c * _differences(u)
    div = flux.copy()
    div[1:] -= flux[:-1]
    return u.with_values(div / grid.weights)


def check_decay(u: RadialField, tolerance: float = TAIL_TOLERANCE) -> bool:
    """Return True when the field has decayed in the outer part of the domain.

    Emits :class:`TruncationWarning` otherwise.
    """
    vals = np.abs(u.values)
    peak = vals.max() if vals.size else 0.0
    if peak == 0.0:
        return True
    tail = vals[int((1.0 - TAIL_FRACTION) * vals.size):].max()
    if tail > tolerance * peak:
        warnings.warn(
            f"field not decayed before r_max: tail/peak = {tail / peak:.2e}",
            TruncationWarning,
            stacklevel=2,
        )
        return False
    return True


def virial_weight(u: RadialField) -> float:
    """``V = int |x|^2 |u|^2``."""
    check_decay(u)
    return float(np.sum(u.grid.weights * u.grid.r**2 * np.abs(u.values) ** 2))


def _resample(u: RadialField, points: np.ndarray) -> np.ndarray:
    """Evaluate the even extension of ``u`` at radii ``points`` (zero beyond r_max)."""
    grid = u.grid
    # mirror a few cells across the origin so the spline sees an even function
    k = 4
    r_ext = np.concatenate([-grid.r[k - 1 :: -1], grid.r, [grid.ghost]])
    v = u.values
    v_ext = np.concatenate([v[k - 1 :: -1], v, [0.0]])
    out = np.zeros(points.shape, dtype=v.dtype)
    inside = points < grid.r_max
    if np.iscomplexobj(v):
        out[inside] = CubicSpline(r_ext, v_ext.real)(points[inside]) + 1j * CubicSpline(
            r_ext, v_ext.imag
        )(points[inside])
    else:
        out[inside] = CubicSpline(r_ext, v_ext)(points[inside])
    return out


def dilate(u: RadialField, factor: float) -> RadialField:
    """Return ``u(factor * .)`` resampled on the same grid."""
    if not factor > 0:
        raise DomainError(f"dilation factor must be positive, got {factor}")
    if factor == 1.0:
        return u.with_values(u.values.copy())
    grid = u.grid
    vals = np.abs(u.values)
    peak = vals.max()
    if peak > 0 and factor > 1.0:
        # support shrinks by `factor`; require the core to stay resolved
        above = np.nonzero(vals > 0.5 * peak)[0]
        core = grid.r[above[-1]] if above.size else grid.r[0]
        local = grid.widths[np.searchsorted(grid.r, core / factor)] if core / factor < grid.r_max else grid.h
        if core / factor < 2.0 * local:
            raise ResolutionError(
                f"dilation by {factor:g} shrinks the core below two cells (h={local:g})"
            )
    if peak > 0 and factor < 1.0:
        # support grows; the dilated field must still fit before r_max
        significant = np.nonzero(vals > TAIL_TOLERANCE * peak)[0]
        extent = grid.r[significant[-1]] / factor
        if extent > grid.r_max * (1.0 - TAIL_FRACTION):
            raise ResolutionError(
                f"dilation by {factor:g} pushes the support to r={extent:.3g} beyond r_max"
            )
    return u.with_values(_resample(u, factor * grid.r))


def scale_star(s: float, u: RadialField) -> RadialField:
    """Mass-preserving scaling ``s * u = s^{N/2} u(s .)``."""
    if not s > 0:
        raise DomainError(f"scaling parameter must be positive, got {s}")
    if s == 1.0:
        return u.with_values(u.values.copy())
    return dilate(u, s) * s ** (u.N / 2)


def dilate_mass(theta: float, u: RadialField) -> RadialField:
    """``v(x) = u(x / theta^{2/N})``, which multiplies the mass by ``theta``."""
    if theta < 1:
        raise DomainError(f"theta must be >= 1, got {theta}")
    return dilate(u, theta ** (-2.0 / u.N))


def rearrange_decreasing(u: RadialField) -> RadialField:
    """Volume-weighted decreasing rearrangement of ``|u|``.

    The cell values of ``|u|`` are sorted in decreasing order and redistributed
    so that each value occupies the same volume as before; the result is then
    sampled back at the cell centres by volume-averaging.  Mass and every
    integral of a function of ``|u|`` are preserved up to that averaging.
    """
    grid = u.grid
    vals = np.abs(u.values)
    w = grid.weights
    order = np.argsort(-vals, kind="stable")
    sorted_vals = vals[order]
    sorted_w = w[order]
    # cumulative volume boundaries of the sorted values and of the target cells
    src_edges = np.concatenate([[0.0], np.cumsum(sorted_w)])
    dst_edges = np.concatenate([[0.0], np.cumsum(w)])
    # fast path: already non-increasing, nothing moves
    if np.all(np.diff(vals) <= 0):
        return u.with_values(vals.copy())
    # integrate the step function (volume -> value) over each target cell
    cum_src = np.concatenate([[0.0], np.cumsum(sorted_vals * sorted_w)])
    cum_sq = np.concatenate([[0.0], np.cumsum(sorted_vals**2 * sorted_w)])

    def primitive(edges, cum, values):
        idx = np.clip(np.searchsorted(src_edges, edges, side="right") - 1, 0, len(values) - 1)
        return cum[idx] + (edges - src_edges[idx]) * values[idx]

    mean = np.diff(primitive(dst_edges, cum_src, sorted_vals)) / w
    mean_sq = np.diff(primitive(dst_edges, cum_sq, sorted_vals**2)) / w
    # pick the cell value that keeps the L^2 content of each cell exact
    out = np.sqrt(np.maximum(mean_sq, 0.0))
    out = np.where(mean > 0, out, 0.0)
    out = np.minimum.accumulate(out)
    return u.with_values(out)
