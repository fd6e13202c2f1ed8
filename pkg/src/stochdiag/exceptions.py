"""Exception hierarchy shared across modules."""


class StochDiagError(Exception):
    """Base class for package errors."""


class DomainError(StochDiagError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class InsufficientReplicationError(DomainError):
    """Too few replicates at a location for the requested statistic."""


class DegenerateReplicatesError(DomainError):
    """All replicates at a location are identical (zero sample variance)."""


class UnattainableError(DomainError):
    """A requested moment cannot be produced by the shape family."""


class NumericalError(StochDiagError, ArithmeticError):
    """A factorization or other numerical step failed."""


class FittingError(StochDiagError):
    """Hyperparameter optimisation did not converge.

    The best parameters found are attached as ``best``.
    """

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class IngestionError(StochDiagError):
    """Malformed or incomplete input data."""

    def __init__(self, message, row=None, column=None):
        super().__init__(message)
        self.row = row
        self.column = column
