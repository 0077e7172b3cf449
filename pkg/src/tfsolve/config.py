"""Solver configuration."""
from __future__ import annotations

from dataclasses import dataclass, field, asdict

from .errors import ConfigurationError


@dataclass(frozen=True)
class SolverConfig:
    """Grids, tolerances and iteration knobs shared by the solvers.

    Radial extents are dimensionless (in units of the atomic length scale
    a(Z), so grids transform exactly under the Z scaling).  The 3D extent
    and spacing are in physical length units; when left ``None`` they are
    sized from the nuclear configuration (bounding box padded by
    ``7 a(Z)`` per side, 96 nodes per axis).

    ``radial_rmax_policy`` is either the string ``"auto"`` (neutral atoms
    span x up to 1000 so the Sommerfeld window is on the grid; ionized
    atoms stop at the support edge) or a number fixing the neutral span.
    """

    radial_node_count: int = 2000
    radial_rmin: float = 1e-5
    radial_rmax_policy: str | float = "auto"

    grid3d_extent: float | None = None
    grid3d_spacing: float | None = None

    mixing_alpha: float = 0.3
    max_iterations: int = 200
    residual_tolerance: float = 1e-6
    mu_bisection_tolerance: float = 1e-10

    cW: float = 0.0
    cD: float = 0.0

    def __post_init__(self):
        if not (0.0 < self.mixing_alpha <= 1.0):
            raise ConfigurationError("mixing_alpha must be in (0, 1]")
        for name in ("residual_tolerance", "mu_bisection_tolerance"):
            if getattr(self, name) <= 0.0:
                raise ConfigurationError(f"{name} must be > 0")
        if self.radial_node_count < 256:
            raise ConfigurationError("radial_node_count must be >= 256")
        if self.radial_rmin <= 0.0:
            raise ConfigurationError("radial_rmin must be > 0")
        if self.cW < 0.0 or self.cD < 0.0:
            raise ConfigurationError("correction coefficients must be >= 0")

    @property
    def radial_xmax(self) -> float:
        if isinstance(self.radial_rmax_policy, str):
            if self.radial_rmax_policy != "auto":
                raise ConfigurationError(
                    f"unknown radial_rmax_policy {self.radial_rmax_policy!r}")
            return 1000.0
        return float(self.radial_rmax_policy)

    @classmethod
    def for_molecular(cls, **overrides) -> "SolverConfig":
        """Defaults tuned for the 3D solver (looser residual target)."""
        base = dict(residual_tolerance=1e-4)
        base.update(overrides)
        return cls(**base)

    def to_dict(self) -> dict:
        return asdict(self)
