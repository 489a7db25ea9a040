"""Exception taxonomy shared by all chemotaxis_lab modules."""


class ChemotaxisLabError(Exception):
    """Base class for all package-specific errors."""


class InvalidParameter(ChemotaxisLabError):
    """A model parameter violates a structural constraint."""


class ConfigError(ChemotaxisLabError):
    """Malformed or inconsistent run configuration."""


class RegimeError(ChemotaxisLabError):
    """Requested computation is undefined in the current parameter regime."""


class ExponentInequalityViolation(ChemotaxisLabError):
    """One or more derived-exponent relations failed verification."""

    def __init__(self, failures):
        self.failures = list(failures)
        super().__init__("exponent relations violated: " + "; ".join(self.failures))


class ModelError(ChemotaxisLabError):
    """Operation requires a model structure that does not hold (e.g. m2 != m3)."""


class QuadratureError(ChemotaxisLabError):
    """Non-finite integrand or failed quadrature."""


class SingularQuadratureError(QuadratureError):
    """Endpoint weight is not integrable (moment exponent >= 1)."""


class DivergenceError(ChemotaxisLabError):
    """The Osgood integral diverges; no finite bound exists."""


class StepRejected(ChemotaxisLabError):
    """A time step produced an inadmissible state; retriable with smaller dt."""


class DtUnderflow(ChemotaxisLabError):
    """Adaptive time step fell below dt_min."""


class ObserverError(ChemotaxisLabError):
    """An observer callback failed; isolated from the run itself."""


class FitError(ChemotaxisLabError):
    """A least-squares fit was infeasible or failed its quality gate."""


class InsufficientSamples(FitError):
    """Not enough samples to perform the requested fit or verification."""


class SearchExhausted(ChemotaxisLabError):
    """An iterative parameter search hit its iteration cap."""


class InfeasibleSpec(ChemotaxisLabError):
    """Initial-data specification cannot be realized on the given geometry."""


class VerdictFailure(ChemotaxisLabError):
    """A property the analysis guarantees failed beyond tolerance."""
