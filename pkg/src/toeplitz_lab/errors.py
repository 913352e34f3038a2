"""Exception and warning types shared across the package."""


class DomainError(ValueError):
    """A point or parameter lies outside the domain an operation accepts."""


class EvaluationError(ArithmeticError):
    """An integrand produced a non-finite value at a quadrature node."""


class AccuracyWarning(UserWarning):
    """Doubling the quadrature resolution moved the result by more than the tolerance."""


class CertificationError(RuntimeError):
    """A constructed point configuration failed its separation or covering check."""


class TruncationError(ValueError):
    """A query region reaches too close to the edge of a truncated measure."""


class AdmissibilityError(ValueError):
    """A measure does not meet the requirements of the requested operator."""
