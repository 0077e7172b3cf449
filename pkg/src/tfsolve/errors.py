"""Exception types shared across the solver suite."""


class TFError(Exception):
    """Base class for solver errors."""


class SingularityError(TFError):
    """Potential evaluated at a nuclear position."""


class NonIntegrableDensityError(TFError):
    """Quadrature detected a divergent integral (density too singular)."""


class ConvergenceError(TFError):
    """An iterative solve failed to reach its tolerance.

    Carries the residual history so the failing run can be inspected.
    """

    def __init__(self, message, residual_history=None):
        super().__init__(message)
        self.residual_history = list(residual_history or [])


class InfeasibleCountError(TFError):
    """Requested electron count exceeds the count attainable at mu = 0."""


class ConfigurationError(TFError):
    """Invalid grid or solver configuration."""


class AsymptoticWindowError(TFError):
    """Radial grid too short to contain an asymptotic fitting window."""


class MoleculeFileError(TFError):
    """Molecule description file failed validation.

    ``field`` names the offending entry when known.
    """

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field
