"""Free-space Poisson solver: zero-padded convolution with the 1/r kernel.

The kernel value for every displacement is the analytic average of 1/r over
the displaced cell, obtained from the closed-form primitive of the triple
integral (the potential-of-a-box formula); sampling 1/r at cell centers
instead would lose two digits near the sources.  Padding factor 2 per axis
gives open boundaries exactly.
"""
from __future__ import annotations

from functools import lru_cache

import numpy as np

from .errors import ConfigurationError
from .grids import Grid3D, ScalarField3D


def corner_primitive(x, y, z):
    """B with d^3 B / dx dy dz = 1/r on the nonnegative octant.

    B(x,y,z) = xy asinh(z/hypot(x,y)) + cyclic
               - x^2/2 atan(yz/(x r)) - cyclic,
    with the zero-coordinate limits built in.  The octant integral of 1/r
    over [0,x]x[0,y]x[0,z] is B itself (B vanishes whenever two coordinates
    vanish).
    """
    r = np.sqrt(x * x + y * y + z * z)

    def log_term(a, b, c):
        h = np.hypot(a, b)
        out = np.zeros_like(r)
        m = h > 0.0
        out[m] = (a * b)[m] * np.arcsinh(c[m] / h[m])
        return out

    def atan_term(a, b, c):
        out = np.zeros_like(r)
        m = (a > 0.0) & (r > 0.0)
        out[m] = 0.5 * (a * a)[m] * np.arctan((b * c)[m] / (a * r)[m])
        return out

    return (log_term(x, y, z) + log_term(y, z, x) + log_term(z, x, y)
            - atan_term(x, y, z) - atan_term(y, z, x) - atan_term(z, x, y))


def box_integral(lo, hi):
    """Integral of 1/|x| over the box prod_k [lo_k, hi_k] (broadcastable)."""
    total = 0.0
    for sx, ex in ((1.0, 0), (-1.0, 1)):
        X = (hi[0] if ex == 0 else lo[0])
        for sy, ey in ((1.0, 0), (-1.0, 1)):
            Y = (hi[1] if ey == 0 else lo[1])
            for sz, ez in ((1.0, 0), (-1.0, 1)):
                Z = (hi[2] if ez == 0 else lo[2])
                sgn = sx * sy * sz
                Xb, Yb, Zb = np.broadcast_arrays(np.asarray(X, dtype=float),
                                                 np.asarray(Y, dtype=float),
                                                 np.asarray(Z, dtype=float))
                odd = np.sign(Xb) * np.sign(Yb) * np.sign(Zb)
                total = total + sgn * odd * corner_primitive(
                    np.abs(Xb), np.abs(Yb), np.abs(Zb))
    return total


def _displacements(P: int, h: float) -> np.ndarray:
    i = np.arange(P)
    i = np.where(i <= P // 2, i, i - P)
    return i * h


@lru_cache(maxsize=3)
def _kernel_fft(extents: tuple, spacing: tuple):
    """rfftn of the cell-averaged 1/r kernel on the doubled grid."""
    nx, ny, nz = extents
    hx, hy, hz = spacing
    P = (2 * nx, 2 * ny, 2 * nz)
    dx = _displacements(P[0], hx)
    dy = _displacements(P[1], hy)
    dz = _displacements(P[2], hz)
    vol = hx * hy * hz
    K = np.empty(P)
    chunk = max(1, int(2e6 / (P[0] * P[1])))
    for z0 in range(0, P[2], chunk):
        z1 = min(P[2], z0 + chunk)
        ZS = dz[z0:z1][None, None, :]
        X = dx[:, None, None]
        Y = dy[None, :, None]
        lo = (X - 0.5 * hx, Y - 0.5 * hy, ZS - 0.5 * hz)
        hi = (X + 0.5 * hx, Y + 0.5 * hy, ZS + 0.5 * hz)
        K[:, :, z0:z1] = box_integral(lo, hi) / vol
    return np.fft.rfftn(K)


def poisson_solve(grid: Grid3D, source: ScalarField3D) -> ScalarField3D:
    """Open-boundary Coulomb potential of the source: int source(y)/|x-y| dy.

    Linear in the source; the source is interpreted as cell-centered samples
    carrying charge value * cell volume.
    """
    if source.grid is not grid and source.grid != grid:
        raise ConfigurationError("source field does not live on the given grid")
    n = grid.extents
    if any(v < 32 for v in n):
        raise ConfigurationError("grid too small to pad (need >= 32 per axis)")
    Kf = _kernel_fft(tuple(grid.extents), tuple(grid.spacing))
    P = (2 * n[0], 2 * n[1], 2 * n[2])
    q = np.zeros(P)
    q[:n[0], :n[1], :n[2]] = source.values * grid.cell_volume
    phi = np.fft.irfftn(np.fft.rfftn(q) * Kf, s=P, axes=(0, 1, 2))
    return ScalarField3D(grid, phi[:n[0], :n[1], :n[2]])


def convolve_coulomb(grid: Grid3D, values: np.ndarray) -> np.ndarray:
    """Array-level Coulomb convolution (same operator as poisson_solve)."""
    n = grid.extents
    Kf = _kernel_fft(tuple(grid.extents), tuple(grid.spacing))
    P = (2 * n[0], 2 * n[1], 2 * n[2])
    q = np.zeros(P)
    q[:n[0], :n[1], :n[2]] = values * grid.cell_volume
    phi = np.fft.irfftn(np.fft.rfftn(q) * Kf, s=P, axes=(0, 1, 2))
    return phi[:n[0], :n[1], :n[2]]
