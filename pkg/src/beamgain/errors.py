"""Exception types shared across the package."""


class BeamgainError(Exception):
    """Base class for all beamgain errors."""


class DomainError(BeamgainError, ValueError):
    """Input outside the physical or mathematical domain of an operation."""


class IngestionError(BeamgainError, ValueError):
    """Malformed or incomplete tabulated input data."""


class DegenerateGeometryError(BeamgainError):
    """Array geometry produced a numerically indefinite total-power matrix."""


class FactorizationError(BeamgainError):
    """Hermitian triangular factorization failed.

    ``pivot_index`` is the zero-based index of the first non-positive pivot.
    """

    def __init__(self, message: str, pivot_index: int | None = None):
        super().__init__(message)
        self.pivot_index = pivot_index


class NumericalError(BeamgainError):
    """A numerical routine could not certify its result."""


class ConfigError(BeamgainError, ValueError):
    """Invalid run configuration."""
