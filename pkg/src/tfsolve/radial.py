"""Atomic (single-nucleus) solver built on the universal solution.

The physical map is Phi - mu = (Z/r) y(r/a) with a = (3 pi/4)^{2/3} Z^{-1/3}
and rho = gamma^{-3/2} [Phi - mu]_+^{3/2}; the chemical potential of an ion
follows from the support edge, mu = q Z / (a x0).  Because the grid is laid
out in the dimensionless variable x = r/a, every discrete operation commutes
exactly with the Z scaling, which is what makes the Z^{7/3} energy law and
the density rescaling hold to rounding on the grid.
"""
from __future__ import annotations

import numpy as np

from .config import SolverConfig
from .core import (EnergyBreakdown, NuclearConfiguration, TFSolution,
                   evaluate_energy, hartree_radial, tf_residual)
from .errors import AsymptoticWindowError
from .grids import RadialDensity, RadialField, RadialGrid
from .units import GAMMA, TAIL_EXPONENT, tf_length
from .universal import solve_universal


def _atom_grid(sc: SolverConfig, a: float, x_top: float) -> RadialGrid:
    return RadialGrid.logarithmic(a * sc.radial_rmin, a * x_top,
                                  sc.radial_node_count)


def solve_atom(Z: float, N: float, sc: SolverConfig | None = None) -> TFSolution:
    """Minimize the functional for a single atom (charge Z, N electrons).

    For N > Z the solve is clamped to the neutral atom (the infimum is not
    attained above neutrality and the energy stays at its neutral value).
    """
    if Z <= 0.0:
        raise ValueError("Z must be > 0")
    if N < 0.0:
        raise ValueError("N must be >= 0")
    sc = sc or SolverConfig()
    config = NuclearConfiguration.single(Z)

    clamped = N > Z
    n_eff = Z if clamped else N
    a = tf_length(Z)

    if n_eff == 0.0:
        grid = _atom_grid(sc, a, sc.radial_xmax)
        zero = np.zeros(len(grid))
        density = RadialDensity(grid, zero, z_ref=Z)
        potential = RadialField(grid, Z / grid.nodes, origin_value=np.inf)
        energy = EnergyBreakdown(0.0, 0.0, 0.0, 0.0)
        return TFSolution(density, potential, 0.0, energy, 0.0, clamped, 0.0,
                          meta={"Z": Z, "N_requested": N, "q": 1.0,
                                "kind": "radial"})

    q = 1.0 - n_eff / Z
    uni = solve_universal(q, x_max=sc.radial_xmax)

    if np.isfinite(uni.support_end):
        x_top = uni.support_end
        mu = q * Z / (a * uni.support_end)
    else:
        x_top = sc.radial_xmax
        mu = 0.0

    grid = _atom_grid(sc, a, x_top)
    x = grid.nodes / a
    y = uni.interpolate(x)
    psi = Z * y / grid.nodes                    # Phi - mu on the support
    rho = psi ** 1.5 / GAMMA ** 1.5
    density = RadialDensity(grid, rho, z_ref=Z)
    potential = RadialField(grid, psi + mu, origin_value=np.inf)

    energy = evaluate_energy(density, config, sc)
    residual = tf_residual(density, mu, config, sc)
    meta = {
        "Z": Z, "N_requested": N, "q": q, "kind": "radial",
        "initial_slope_B": uni.initial_slope_B,
        "support_end_x": float(uni.support_end),
        "support_end_r": float(a * uni.support_end)
        if np.isfinite(uni.support_end) else np.inf,
    }
    return TFSolution(density, potential, mu, energy,
                      density.electron_count, clamped, residual, meta)


def chemical_potential_curve(Z: float, N_samples, sc: SolverConfig | None = None):
    """mu at each N in the (strictly increasing) samples, as (N, mu) pairs."""
    samples = [float(v) for v in N_samples]
    if any(b <= a for a, b in zip(samples, samples[1:])):
        raise ValueError("N samples must be strictly increasing")
    if any(v <= 0.0 or v > Z for v in samples):
        raise ValueError("N samples must lie in (0, Z]")
    return [(N, solve_atom(Z, N, sc).mu) for N in samples]


def rescale_density(sol: TFSolution, Z: float) -> RadialDensity:
    """Map an atomic solution at (lambda, Z=1) to nuclear charge Z.

    rho_Z(r) = Z^2 rho_1(Z^{1/3} r) on the correspondingly contracted grid;
    the electron count picks up a factor Z.
    """
    src = sol.density
    if not isinstance(src, RadialDensity):
        raise TypeError("rescale_density needs a radial solution")
    z0 = sol.meta.get("Z", src.z_ref)
    if z0 is None or abs(z0 - 1.0) > 1e-12:
        raise ValueError("rescale_density expects a Z = 1 solution")
    s = float(Z) ** (1.0 / 3.0)
    grid = RadialGrid(src.grid.nodes / s)
    return RadialDensity(grid, Z ** 2 * src.values, z_ref=float(Z))


def tail_constant(sol: TFSolution, window_decades: float = 1.0) -> float:
    """Estimate lim r^6 rho(r) of a neutral atomic solution.

    Fits r^6 rho against a cubic in u = x^{-lambda} over the outer decade of
    the grid (lambda is the far-field decay exponent of admissible
    perturbations) and reports the extrapolated constant.  Raises for
    ionized input (the density has compact support, the limit is 0) and for
    grids too short to contain an asymptotic window.
    """
    if sol.mu != 0.0 or sol.meta.get("q", 0.0) != 0.0:
        raise ValueError("tail constant is defined for neutral solutions only")
    density = sol.density
    if not isinstance(density, RadialDensity):
        raise TypeError("tail_constant needs a radial solution")
    Z = sol.meta["Z"]
    a = tf_length(Z)
    x = density.grid.nodes / a
    if x[-1] < 300.0:
        raise AsymptoticWindowError(
            f"grid ends at x = {x[-1]:.1f}; need x >= 300 for the tail window")
    mask = x >= x[-1] / 10.0 ** window_decades
    u = x[mask] ** -TAIL_EXPONENT
    fvals = density.grid.nodes[mask] ** 6 * density.values[mask]
    design = np.vander(u, 4, increasing=True)
    coef, *_ = np.linalg.lstsq(design, fvals, rcond=None)
    return float(coef[0])
