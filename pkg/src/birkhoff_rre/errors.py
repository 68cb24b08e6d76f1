"""Exception types shared across the package."""


class ContractViolation(ValueError):
    """An argument breaks a documented precondition (shape, range, parity)."""


class SolverFailure(RuntimeError):
    """A dense linear-algebra routine failed to converge.

    ``detail`` carries whatever convergence information the backend
    reported (typically the index below which eigenvalues did converge).
    """

    def __init__(self, message, detail=None):
        super().__init__(message)
        self.detail = detail


class OrbitEscape(RuntimeError):
    """Trajectory sampling hit a non-finite or out-of-bounds state.

    ``step`` is the iteration index at which the orbit left the allowed
    region.
    """

    def __init__(self, message, step):
        super().__init__(message)
        self.step = step


class DegreeDeflation(ValueError):
    """Leading Chebyshev coefficient is numerically zero; trim and retry."""


class DegenerateFrequency(ValueError):
    """A tuned-filter factor has a vanishing normalization denominator."""


class ValidationFailure(RuntimeError):
    """Circle validation could not evaluate the map on the fitted curve."""


class ConfigError(ValueError):
    """A run configuration file is malformed or contains unknown keys."""
