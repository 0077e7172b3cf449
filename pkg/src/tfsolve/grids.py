"""Grids, field containers, and the radial quadrature.

Radial integrals use composite Simpson in log space (the nodes are
log-uniform), plus an analytic head for [0, rmin]: the integrand is fit to
a power law on the first 8 nodes and integrated in closed form, which is
what keeps cusped densities (rho ~ r^{-3/2} at a nucleus) at full accuracy.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import cumulative_simpson

from .errors import ConfigurationError, NonIntegrableDensityError

_HEAD_NODES = 8


def _simpson_log_weights(n: int, dt: float) -> np.ndarray:
    """Composite Simpson weights for n log-uniform nodes (spacing dt).

    Even node counts get the standard 3-point closed rule on the last
    interval (weights -1/12, 2/3, 5/12).
    """
    m = n if n % 2 == 1 else n - 1
    w = np.zeros(n)
    w[0] = 1.0
    w[1:m - 1:2] = 4.0
    w[2:m - 1:2] = 2.0
    w[m - 1] = 1.0
    w *= dt / 3.0
    if m != n:
        w[n - 3] += -dt / 12.0
        w[n - 2] += 2.0 * dt / 3.0
        w[n - 1] += 5.0 * dt / 12.0
    return w


@dataclass(frozen=True)
class RadialGrid:
    """Strictly increasing, log-uniform positive radii (>= 256 nodes)."""

    nodes: np.ndarray

    def __post_init__(self):
        r = np.asarray(self.nodes, dtype=float)
        object.__setattr__(self, "nodes", r)
        if r.ndim != 1 or r.size < 256:
            raise ConfigurationError("radial grid needs >= 256 nodes")
        if r[0] <= 0.0 or np.any(np.diff(r) <= 0.0):
            raise ConfigurationError("radial nodes must be positive and increasing")
        t = np.log(r)
        dt = np.diff(t)
        if np.max(np.abs(dt - dt[0])) > 1e-9 * dt[0]:
            raise ConfigurationError("radial nodes must be log-uniform")
        object.__setattr__(self, "_t", t)
        object.__setattr__(self, "_dt", float(dt[0]))
        object.__setattr__(self, "_w", _simpson_log_weights(r.size, float(dt[0])))
        r.setflags(write=False)

    @classmethod
    def logarithmic(cls, rmin: float, rmax: float, n: int) -> "RadialGrid":
        return cls(np.geomspace(rmin, rmax, n))

    @property
    def log_nodes(self) -> np.ndarray:
        return self._t

    @property
    def log_weights(self) -> np.ndarray:
        """Weights w with sum(w * g) = integral of g d(log r) over the grid."""
        return self._w

    def __len__(self):
        return self.nodes.size


def _power_head(grid: RadialGrid, f: np.ndarray, rpow: float) -> float:
    """Closed-form integral of f(r) r^rpow over [0, rmin].

    Fits f ~ C r^p on the first 8 nodes (log-log least squares).  Zero or
    negative leading values are treated as an integrand vanishing at the
    origin (head contribution dropped).  Raises when the fitted power makes
    the head integral divergent.
    """
    v = f[:_HEAD_NODES]
    if np.any(v <= 0.0):
        return 0.0
    t = grid.log_nodes[:_HEAD_NODES]
    lv = np.log(v)
    p = np.polyfit(t, lv, 1)[0]
    r0 = grid.nodes[0]
    C = v[0] / r0 ** p
    e = p + rpow
    if e <= -1.0:
        raise NonIntegrableDensityError(
            f"integrand ~ r^{e:.3f} diverges at the origin")
    return C * r0 ** (e + 1.0) / (e + 1.0)


def radial_integral(grid: RadialGrid, f: np.ndarray, rpow: float = 0.0,
                    head: bool = True) -> float:
    """integral of f(r) r^rpow dr over [0, rmax]."""
    body = float(grid.log_weights @ (f * grid.nodes ** (rpow + 1.0)))
    if not head:
        return body
    return _power_head(grid, f, rpow) + body


def radial_cumulative(grid: RadialGrid, f: np.ndarray, rpow: float = 0.0,
                      head: bool = True) -> np.ndarray:
    """Cumulative integral of f(r) r^rpow dr from 0 to each node."""
    g = f * grid.nodes ** (rpow + 1.0)
    cum = cumulative_simpson(g, x=grid.log_nodes, initial=0.0)
    if head:
        cum = cum + _power_head(grid, f, rpow)
    return cum


@dataclass(frozen=True)
class RadialDensity:
    """Nonnegative density samples on a radial grid.

    ``electron_count`` is the quadrature of 4 pi r^2 rho over the grid,
    fixed at construction.  ``z_ref`` records the nuclear charge whose
    length scale built the grid, when there is one.
    """

    grid: RadialGrid
    values: np.ndarray
    z_ref: float | None = None

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", v)
        if v.shape != self.grid.nodes.shape:
            raise ConfigurationError("density values must match the grid")
        if np.any(v < 0.0):
            raise ConfigurationError("density values must be >= 0")
        count = 4.0 * np.pi * radial_integral(self.grid, v, rpow=2.0)
        object.__setattr__(self, "electron_count", float(count))
        v.setflags(write=False)

    @property
    def r(self) -> np.ndarray:
        return self.grid.nodes


@dataclass(frozen=True)
class RadialField:
    """A scalar radial profile (e.g. a potential) with its origin value."""

    grid: RadialGrid
    values: np.ndarray
    origin_value: float = np.nan


@dataclass(frozen=True)
class Grid3D:
    """Uniform cubic-cell grid: nodes sit at cell centers."""

    origin: tuple[float, float, float]
    spacing: tuple[float, float, float]
    extents: tuple[int, int, int]

    def __post_init__(self):
        if any(n < 32 for n in self.extents):
            raise ConfigurationError("3D grid needs >= 32 nodes per axis")
        if any(s <= 0 for s in self.spacing):
            raise ConfigurationError("3D grid spacing must be positive")

    @classmethod
    def cube(cls, center, edge: float, n: int) -> "Grid3D":
        h = edge / n
        org = tuple(c - edge / 2.0 + h / 2.0 for c in center)
        return cls(org, (h, h, h), (n, n, n))

    def axes(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return tuple(self.origin[k] + self.spacing[k] * np.arange(self.extents[k])
                     for k in range(3))

    def meshgrid(self):
        ax = self.axes()
        return np.meshgrid(*ax, indexing="ij")

    @property
    def cell_volume(self) -> float:
        return self.spacing[0] * self.spacing[1] * self.spacing[2]


@dataclass(frozen=True)
class ScalarField3D:
    """Values on a Grid3D, shape (nx, ny, nz); x is the fastest file axis."""

    grid: Grid3D
    values: np.ndarray
    nonnegative: bool = False

    def __post_init__(self):
        v = np.ascontiguousarray(self.values, dtype=float)
        object.__setattr__(self, "values", v)
        if v.shape != tuple(self.grid.extents):
            raise ConfigurationError("field shape must match the grid extents")
        if self.nonnegative and np.any(v < 0.0):
            raise ConfigurationError("field declared nonnegative has negative values")

    def integral(self) -> float:
        return float(self.values.sum()) * self.grid.cell_volume
