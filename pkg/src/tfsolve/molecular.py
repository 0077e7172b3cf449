"""3D multi-center solver: self-consistent iteration on the TF map.

The iteration is rho -> Phi = V - Coulomb(rho) -> gamma^{-3/2}[Phi - mu]_+^{3/2}
with linear mixing, the Lagrange multiplier re-bisected every sweep so the
cell count stays on target, and the nuclear cusps handled in two places:

* the Poisson source replaces node samples near each nucleus by cell
  averages of the local model gamma^{-3/2}[V + s - mu]^{3/2}, where the
  analytic V carries the r^{-3/2} cusp exactly and s = Phi - V (smooth
  everywhere) is spline-interpolated off the grid;

* reported energies replace the grid sums inside a smooth spherical window
  around each nucleus by radial-angular quadrature of the same local model.

Neutral molecules on a finite box cannot hold all Z electrons (the r^{-6}
cloud extends past any box); the solver targets the electron count of the
superposed-atoms initial state and lets the internal multiplier absorb the
electrostatic constant of the truncated outer cloud (it converges to the
tail potential, a positive number of order 1e-2, as the box grows; the
physical chemical potential of a neutral system is 0 and is reported as
such, with the internal value kept in the solution metadata).
"""
from __future__ import annotations

import numpy as np
from scipy import ndimage

from .config import SolverConfig
from .core import (EnergyBreakdown, NuclearConfiguration, TFSolution,
                   external_potential_grid, nuclear_repulsion)
from .errors import (ConfigurationError, ConvergenceError,
                     InfeasibleCountError, SingularityError)
from .grids import Grid3D, ScalarField3D
from .radial import solve_atom
from .units import GAMMA, tf_length

#: cells within this many spacings of a nucleus get cell-averaged sources
SOURCE_RADIUS_CELLS = 2.6
#: midpoint subsamples per axis for regular / nucleus-adjacent cells
SUBSAMPLE, SUBSAMPLE_SINGULAR = 8, 16
#: energy window radii in units of the spacing
WINDOW_INNER_CELLS, WINDOW_OUTER_CELLS = 4.0, 8.0
#: ball quadrature resolution (radial x polar x azimuthal)
BALL_NR, BALL_NTH, BALL_NPH = 320, 16, 32


def build_grid3d(config: NuclearConfiguration,
                 sc: SolverConfig | None = None) -> Grid3D:
    """Cubic grid sized for the configuration.

    Auto extent pads the nuclear bounding box by 7 a(Z_max) per side (enough
    that the truncated outer cloud moves the energy at the 1e-4 level);
    the origin is staggered so nuclei sit at cell corners, never on nodes.
    """
    sc = sc or SolverConfig.for_molecular()
    pos = config.positions
    if sc.grid3d_extent is None:
        pad = 7.0 * tf_length(float(config.charges.max()))
        edge = float(pos.max() - pos.min()) + 2.0 * pad
    else:
        edge = float(sc.grid3d_extent)
    if sc.grid3d_spacing is None:
        n = 96
        h = edge / n
    else:
        h = float(sc.grid3d_spacing)
        n = int(round(edge / h))
        edge = n * h
    center = 0.5 * (pos.max(axis=0) + pos.min(axis=0))
    grid = Grid3D.cube(tuple(center), edge, n)
    # shift so the first nucleus lands on a cell corner
    shift = []
    for k in range(3):
        frac = (pos[0, k] - grid.origin[k]) / h
        shift.append((frac - np.floor(frac) - 0.5) * h)
    grid = Grid3D(tuple(o + s for o, s in zip(grid.origin, shift)),
                  grid.spacing, grid.extents)
    # nuclei must not coincide with nodes
    ax = grid.axes()
    for z, p in config.nuclei:
        d2 = ((ax[0] - p[0])[:, None, None] ** 2
              + (ax[1] - p[1])[None, :, None] ** 2
              + (ax[2] - p[2])[None, None, :] ** 2)
        if d2.min() < (1e-9 * h) ** 2:
            raise ConfigurationError(
                f"nucleus at {p} coincides with a grid node; shift the grid")
    return grid


def _smooth_interpolator(grid: Grid3D, values: np.ndarray):
    """Node-exact tricubic interpolation of a smooth grid function."""
    coef = ndimage.spline_filter(values, order=3)
    org = np.asarray(grid.origin)
    sp = np.asarray(grid.spacing)

    def interp(pts: np.ndarray) -> np.ndarray:
        idx = (np.asarray(pts) - org) / sp
        return ndimage.map_coordinates(coef, idx.T, order=3, prefilter=False,
                                       mode="nearest")
    return interp


class _SourceModel:
    """Cell-averaged local-model source values near the nuclei."""

    def __init__(self, grid: Grid3D, config: NuclearConfiguration):
        h = grid.spacing[0]
        ax = grid.axes()
        self.grid = grid
        self.cells = []         # (ii, jj, kk) per nucleus
        pts_all = []
        counts = []
        r_src = SOURCE_RADIUS_CELLS * h
        for z, p in config.nuclei:
            d = np.sqrt((ax[0] - p[0])[:, None, None] ** 2
                        + (ax[1] - p[1])[None, :, None] ** 2
                        + (ax[2] - p[2])[None, None, :] ** 2)
            idx = np.nonzero(d <= r_src)
            centers = np.stack([ax[0][idx[0]], ax[1][idx[1]], ax[2][idx[2]]],
                               axis=1)
            dist = d[idx]
            self.cells.append(idx)
            for c, dc in zip(centers, dist):
                ns = SUBSAMPLE_SINGULAR if dc <= np.sqrt(3.0) * h / 2.0 \
                    else SUBSAMPLE
                off = ((np.arange(ns) + 0.5) / ns - 0.5) * h
                OX, OY, OZ = np.meshgrid(off, off, off, indexing="ij")
                pts = c[None, :] + np.stack(
                    [OX.ravel(), OY.ravel(), OZ.ravel()], axis=1)
                pts_all.append(pts)
                counts.append(pts.shape[0])
        self.pts = np.concatenate(pts_all, axis=0)
        self.slices = np.concatenate([[0], np.cumsum(counts)])
        self.V_pts = external_potential_grid(config, self.pts)
        self.ncells = [len(idx[0]) for idx in self.cells]

    def averages(self, s_pts: np.ndarray, mu: float) -> np.ndarray:
        """Cell averages of gamma^{-3/2}[V + s - mu]^{3/2} for all cells."""
        mod = np.clip(self.V_pts + s_pts - mu, 0.0, None) ** 1.5 / GAMMA ** 1.5
        out = np.empty(len(self.slices) - 1)
        for i in range(len(out)):
            out[i] = mod[self.slices[i]:self.slices[i + 1]].mean()
        return out

    def apply(self, target: np.ndarray, s_pts: np.ndarray, mu: float):
        avg = self.averages(s_pts, mu)
        ofs = 0
        for idx, ncell in zip(self.cells, self.ncells):
            target[idx] = avg[ofs:ofs + ncell]
            ofs += ncell
        return target


def _window(dist: np.ndarray, r_a: float, r_b: float) -> np.ndarray:
    chi = np.zeros_like(dist)
    chi[dist <= r_a] = 1.0
    m = (dist > r_a) & (dist < r_b)
    chi[m] = np.cos(0.5 * np.pi * (dist[m] - r_a) / (r_b - r_a)) ** 2
    return chi


def _log_head(rr: np.ndarray, g: np.ndarray) -> float:
    """Power-law head below the first ball-quadrature node."""
    if g[0] <= 0.0 or g[1] <= 0.0:
        return 0.0
    p = np.log(g[1] / g[0]) / np.log(rr[1] / rr[0])
    if p <= -1.0:
        return 0.0
    return float(g[0] * rr[0] / (p + 1.0))


def _corrected_energy(rho, phi, src, mu, config, grid, s_interp):
    """Windowed energy terms: grid sums outside, local-model balls inside."""
    h = grid.spacing[0]
    w = grid.cell_volume
    r_a = WINDOW_INNER_CELLS * h
    r_b = WINDOW_OUTER_CELLS * h
    ax = grid.axes()
    V = external_potential_grid(
        config, np.stack(np.meshgrid(*ax, indexing="ij"), axis=-1))

    chi = np.zeros_like(rho)
    dists = []
    for z, p in config.nuclei:
        d = np.sqrt((ax[0] - p[0])[:, None, None] ** 2
                    + (ax[1] - p[1])[None, :, None] ** 2
                    + (ax[2] - p[2])[None, None, :] ** 2)
        dists.append(d)
        chi = 1.0 - (1.0 - chi) * (1.0 - _window(d, r_a, r_b))

    kinetic = 0.6 * GAMMA * float((rho ** (5.0 / 3.0) * (1.0 - chi)).sum()) * w
    attraction = float((rho * V * (1.0 - chi)).sum()) * w
    count = float((src * (1.0 - chi)).sum()) * w

    # angular product rule (Gauss-Legendre in cos(theta) x uniform phi)
    tcos, tw = np.polynomial.legendre.leggauss(BALL_NTH)
    ph = (np.arange(BALL_NPH) + 0.5) * 2.0 * np.pi / BALL_NPH
    st = np.sqrt(1.0 - tcos ** 2)
    dirs = np.stack([np.outer(st, np.cos(ph)).ravel(),
                     np.outer(st, np.sin(ph)).ravel(),
                     np.outer(tcos, np.ones(BALL_NPH)).ravel()], axis=1)
    aw = np.repeat(tw, BALL_NPH) * (2.0 * np.pi / BALL_NPH) / (4.0 * np.pi)

    rr = np.geomspace(1e-8 * r_b, r_b, BALL_NR)
    tt = np.log(rr)
    for j, (z, p) in enumerate(config.nuclei):
        pts = np.asarray(p)[None, None, :] + rr[:, None, None] * dirs[None, :, :]
        flat = pts.reshape(-1, 3)
        s_val = s_interp(flat)
        V_val = external_potential_grid(config, flat)
        rho_m = (np.clip(V_val + s_val - mu, 0.0, None) ** 1.5
                 / GAMMA ** 1.5).reshape(BALL_NR, -1)
        V_val = V_val.reshape(BALL_NR, -1)
        # telescoped window: chi_j * prod_{k<j} (1 - chi_k)
        win = _window(np.linalg.norm(flat - np.asarray(p), axis=1), r_a, r_b)
        for k in range(j):
            dk = np.linalg.norm(flat - np.asarray(config.nuclei[k][1]), axis=1)
            win *= 1.0 - _window(dk, r_a, r_b)
        win = win.reshape(BALL_NR, -1)

        def ball(field):
            g = (field * win * aw[None, :]).sum(axis=1) * 4.0 * np.pi * rr ** 3
            return float(np.trapezoid(g, tt) + _log_head(rr, g / rr))

        kinetic += 0.6 * GAMMA * ball(rho_m ** (5.0 / 3.0))
        attraction += ball(rho_m * V_val)
        count += ball(rho_m)

    from .poisson import convolve_coulomb
    hart = convolve_coulomb(grid, src)
    repulsion = 0.5 * float((src * hart).sum()) * w
    U = nuclear_repulsion(config)
    return EnergyBreakdown(kinetic, attraction, repulsion, U), count, hart


def _count_bisection(count, N, lo, hi, tol):
    """Monotone-decreasing count(mu) = N by bisection on [lo, hi]."""
    while count(lo) < N:
        lo -= max(0.1, abs(lo))
        if lo < -1e6:
            raise InfeasibleCountError("count projection lost its bracket")
    while count(hi) > N:
        hi += max(0.1, abs(hi))
        if hi > 1e9:
            raise InfeasibleCountError("count projection lost its bracket")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if count(mid) > N:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def mu_bisection(phi: ScalarField3D, N: float,
                 sc: SolverConfig | None = None) -> float:
    """mu >= 0 with int gamma^{-3/2}[Phi - mu]_+^{3/2} = N (plain cell sums).

    The count is monotone nonincreasing in mu, so bisection converges;
    requesting more electrons than the mu = 0 count is infeasible (callers
    clamp, mirroring the constancy of the energy above neutrality).
    """
    if N < 0.0:
        raise ValueError("N must be >= 0")
    sc = sc or SolverConfig.for_molecular()
    w = phi.grid.cell_volume

    def count(mu):
        return float((np.clip(phi.values - mu, 0.0, None) ** 1.5).sum()) \
            * w / GAMMA ** 1.5

    if count(0.0) < N * (1.0 - 1e-12):
        raise InfeasibleCountError(
            f"N = {N} exceeds the mu = 0 count {count(0.0)}")
    if N == 0.0:
        return float(phi.values.max())
    return _count_bisection(count, N, 0.0, float(phi.values.max()),
                            sc.mu_bisection_tolerance)


def _superposed_atoms(config, grid, sc, scale):
    """Initial guess: rescaled neutral atomic densities at each nucleus."""
    ax = grid.axes()
    rho = np.zeros(grid.extents)
    for z, p in config.nuclei:
        atom = solve_atom(z, z, sc_radial_for_init())
        nodes = atom.density.grid.nodes
        vals = atom.density.values
        d = np.sqrt((ax[0] - p[0])[:, None, None] ** 2
                    + (ax[1] - p[1])[None, :, None] ** 2
                    + (ax[2] - p[2])[None, None, :] ** 2)
        lr = np.log(np.clip(d, nodes[0], nodes[-1]))
        prof = np.interp(lr, np.log(nodes), vals)
        rho += prof
    return rho * scale


def sc_radial_for_init() -> SolverConfig:
    return SolverConfig(radial_node_count=1200)


def scf_solve(config: NuclearConfiguration, N: float,
              sc: SolverConfig | None = None) -> TFSolution:
    """Self-consistent 3D solve for N electrons around the given nuclei.

    Deterministic: fixed reduction orders, fixed bisection schedules.
    Raises ConvergenceError (with the residual history) at the iteration cap.
    """
    if N < 0.0:
        raise ValueError("N must be >= 0")
    sc = sc or SolverConfig.for_molecular()
    U = nuclear_repulsion(config)
    Ztot = config.total_Z
    clamped = N > Ztot
    n_req = min(N, Ztot)
    grid = build_grid3d(config, sc)
    h = grid.spacing[0]
    w = grid.cell_volume

    if n_req == 0.0:
        zero = ScalarField3D(grid, np.zeros(grid.extents), nonnegative=True)
        pts = np.stack(grid.meshgrid(), axis=-1)
        pot = ScalarField3D(grid, external_potential_grid(config, pts))
        return TFSolution(zero, pot, 0.0, EnergyBreakdown(0.0, 0.0, 0.0, U),
                          0.0, clamped, 0.0,
                          meta={"kind": "3d", "iterations": 0})

    pts = np.stack(grid.meshgrid(), axis=-1)
    V = external_potential_grid(config, pts)
    neutral = n_req == Ztot
    rho = _superposed_atoms(config, grid, sc, n_req / Ztot)
    model = _SourceModel(grid, config)

    from .poisson import convolve_coulomb

    N_eff = float(rho.sum()) * w if neutral else n_req
    mu = 0.0
    s_interp = None
    residuals = []
    alpha0 = sc.mixing_alpha
    src = rho.copy()
    phi = None
    for it in range(sc.max_iterations):
        src = rho.copy()
        if s_interp is not None:
            s_pts = s_interp(model.pts)
            model.apply(src, s_pts, mu)
        phi = V - convolve_coulomb(grid, src)
        s_interp = _smooth_interpolator(grid, phi - V)
        s_pts = s_interp(model.pts)

        def count(mu_try):
            c = float((np.clip(phi - mu_try, 0.0, None) ** 1.5).sum()) \
                * w / GAMMA ** 1.5
            avg = model.averages(s_pts, mu_try)
            ofs = 0
            plain = np.clip(phi - mu_try, 0.0, None) ** 1.5 / GAMMA ** 1.5
            for idx, ncell in zip(model.cells, model.ncells):
                c += float((avg[ofs:ofs + ncell] - plain[idx]).sum()) * w
                ofs += ncell
            return c

        lo = (mu - 0.1) if it else (-0.2 if neutral else 0.0)
        hi = (mu + 0.1) if it else float(phi.max())
        mu = _count_bisection(count, N_eff, lo, hi,
                              sc.mu_bisection_tolerance)

        target = np.clip(phi - mu, 0.0, None) ** 1.5 / GAMMA ** 1.5
        num = float((rho * np.abs(GAMMA * rho ** (2.0 / 3.0)
                                  - np.clip(phi - mu, 0.0, None))).sum())
        den = float((rho * GAMMA * rho ** (2.0 / 3.0)).sum())
        res = num / den if den > 0.0 else 0.0
        residuals.append(res)
        if res < sc.residual_tolerance:
            break
        alpha = alpha0
        if len(residuals) >= 2 and residuals[-1] > residuals[-2]:
            alpha = 0.5 * alpha0  # safeguard for this step only
        rho = (1.0 - alpha) * rho + alpha * target
    else:
        raise ConvergenceError(
            f"3D solve did not reach {sc.residual_tolerance} in "
            f"{sc.max_iterations} iterations", residuals)

    src = rho.copy()
    model.apply(src, s_interp(model.pts), mu)
    energy, count_corr, hart = _corrected_energy(
        rho, phi, src, mu, config, grid, s_interp)
    mu_phys = mu if (not neutral and mu >= 0.0) else max(mu, 0.0)
    if neutral:
        mu_phys = 0.0
    density = ScalarField3D(grid, rho, nonnegative=True)
    potential = ScalarField3D(grid, phi)
    meta = {
        "kind": "3d", "iterations": it + 1, "mu_internal": mu,
        "N_eff": N_eff, "phi_min": float(phi.min()),
        "spacing": h, "extent": h * grid.extents[0],
        "window": (WINDOW_INNER_CELLS * h, WINDOW_OUTER_CELLS * h),
        "residual_history": residuals,
    }
    return TFSolution(density, potential, mu_phys, energy, count_corr,
                      clamped, residuals[-1], meta)


def tf_potential_3d(density: ScalarField3D, config: NuclearConfiguration,
                    sc: SolverConfig | None = None,
                    mu: float = 0.0) -> ScalarField3D:
    """The solver's Phi operator for a 3D density: V - Coulomb(source).

    Applies the same near-nucleus source model as scf_solve (two fixed
    refinement passes), so residuals recomputed for converged solutions
    agree with the solver's own bookkeeping.
    """
    from .poisson import convolve_coulomb
    grid = density.grid
    model = _SourceModel(grid, config)
    pts = np.stack(grid.meshgrid(), axis=-1)
    V = external_potential_grid(config, pts)
    src = density.values.copy()
    phi = V - convolve_coulomb(grid, src)
    for _ in range(2):
        s_interp = _smooth_interpolator(grid, phi - V)
        src = density.values.copy()
        model.apply(src, s_interp(model.pts), mu)
        phi = V - convolve_coulomb(grid, src)
    return ScalarField3D(grid, phi)


def teller_gap(config: NuclearConfiguration, N: float,
               sc: SolverConfig | None = None) -> float:
    """E_molecule(N) - sum_j E_atom(Z_j, Z_j), neutral split (N = total Z).

    Strictly positive for K >= 2: the molecule never binds.  For K = 1 both
    sides are the same solve and the gap is exactly 0.
    """
    Ztot = config.total_Z
    if abs(N - Ztot) > 1e-9 * Ztot:
        raise ValueError("teller_gap implements the neutral split N = total Z")
    if len(config) == 1:
        return 0.0
    mol = scf_solve(config, N, sc)
    atoms = 0.0
    for z, _ in config.nuclei:
        atoms += solve_atom(z, z).energy.total
    return mol.energy.total - atoms


def pressure_scan(config: NuclearConfiguration, N: float, scales,
                  sc: SolverConfig | None = None):
    """Total energy along the dilation R_j -> ell R_j, neutral case.

    Returns [(ell, total)]; the energies are strictly decreasing in ell.
    All scales share one grid (sized for the largest dilation) so the
    discretization bias is common to the whole scan.
    """
    scales = [float(s) for s in scales]
    if scales[0] != 1.0 or any(b <= a for a, b in zip(scales, scales[1:])):
        raise ValueError("scales must be ascending and start at 1")
    if abs(N - config.total_Z) > 1e-9 * config.total_Z:
        raise ValueError("pressure_scan implements the neutral case")
    sc = sc or SolverConfig.for_molecular()
    if sc.grid3d_extent is None:
        big = NuclearConfiguration(tuple(
            (z, tuple(scales[-1] * c for c in p)) for z, p in config.nuclei))
        ref = build_grid3d(big, sc)
        sc = SolverConfig(**{**sc.to_dict(),
                             "grid3d_extent": ref.spacing[0] * ref.extents[0],
                             "grid3d_spacing": ref.spacing[0]})
    out = []
    for ell in scales:
        scaled = NuclearConfiguration(tuple(
            (z, tuple(ell * c for c in p)) for z, p in config.nuclei))
        out.append((ell, scf_solve(scaled, N, sc).energy.total))
    return out
