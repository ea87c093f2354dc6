"""Exception types shared across the package.

Every error raised by this package derives from :class:`CorrdpError`, so
callers can catch one base class at CLI boundaries and map it to an exit
code. The names describe the violated condition, not the module that
raised it.
"""

__all__ = [
    "CorrdpError",
    "NonSquare",
    "SingularConditioning",
    "DegenerateVariance",
    "ZeroTransition",
    "NotIrreducible",
    "IndexOverlap",
    "UnseenState",
    "InfeasibleCorrelation",
    "InfeasibleTarget",
    "DomainError",
    "NoSolution",
    "TooLarge",
    "ParseError",
    "MissingColumn",
]


class CorrdpError(Exception):
    """Base class for all package errors."""


class NonSquare(CorrdpError):
    """A matrix argument is not square."""


class SingularConditioning(CorrdpError):
    """The conditioning block of a covariance matrix is numerically singular."""


class DegenerateVariance(CorrdpError):
    """A data column has zero sample variance, so correlation is undefined."""


class ZeroTransition(CorrdpError):
    """A transition matrix contains a zero (or negative) entry where
    strict positivity is required."""


class NotIrreducible(CorrdpError):
    """The chain does not have a unique stationary distribution."""


class IndexOverlap(CorrdpError):
    """Two index sets that must be disjoint share an element."""


class UnseenState(CorrdpError):
    """A state never occurs as a transition source in the observed sequence."""


class InfeasibleCorrelation(CorrdpError):
    """The correlation level is too high for the Gaussian bound to apply
    (rho * (m - 2) >= 1)."""


class InfeasibleTarget(CorrdpError):
    """The requested leakage target is at or below the model's floor."""


class DomainError(CorrdpError, ValueError):
    """An argument lies outside the documented domain of a formula."""


class NoSolution(CorrdpError):
    """A numeric search cannot attain the requested target."""


class TooLarge(CorrdpError):
    """An instance exceeds the enumeration limits of the exact oracle."""


class ParseError(CorrdpError):
    """A data file could not be parsed; carries the offending row number."""

    def __init__(self, row: int, message: str):
        super().__init__(f"row {row}: {message}")
        self.row = int(row)


class MissingColumn(CorrdpError):
    """A required column is absent from a CSV header."""
