"""Exception types shared across the package."""


class NfsecError(Exception):
    """Base class for all package-specific errors."""


class CoincidentPosition(NfsecError):
    """A field point coincides with an array element or scatterer."""


class RankDeficient(NfsecError):
    """Channel matrix has a zero column; SVD-based design is undefined."""


class IllConditioned(NfsecError):
    """Effective channel Gram matrix too ill-conditioned for ZF inversion."""


class Infeasible(NfsecError):
    """Power budget cannot accommodate the requested static precoder."""


class DomainError(NfsecError):
    """Argument outside the mathematical domain of a special function."""


class SeriesNotConverged(NfsecError):
    """Double series hit its index cap before reaching the tolerance."""


class QuadratureFailure(NfsecError):
    """Adaptive quadrature could not reach the requested tolerance."""


class DegenerateNullSpace(NfsecError):
    """Eavesdropper channel lies (numerically) in the users' span."""


class ConditionViolated(NfsecError):
    """Monotonicity precondition for the AN-level threshold fails."""


class ParseError(NfsecError):
    """Experiment config file could not be parsed."""


class ValidationError(NfsecError):
    """Experiment config parsed but violates invariants."""
