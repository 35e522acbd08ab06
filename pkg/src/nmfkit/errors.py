"""Exception types shared across the toolkit."""


class NmfError(Exception):
    """Base class for every error raised by this package."""


class ShapeError(NmfError):
    """Operand shapes do not conform for the requested operation."""


class ContractViolationError(NmfError):
    """An argument violates a documented precondition."""


class DegenerateColumnError(NmfError):
    """A column that must be normalizable is identically zero."""

    def __init__(self, column: int, message: str | None = None):
        self.column = column
        super().__init__(message or f"column {column} is identically zero")


class DegenerateFactorError(NmfError):
    """A factor matrix collapsed to zero, so no step size exists."""


class DegenerateComponentError(NmfError):
    """A single component (column of W / row of H) died during a sweep."""

    def __init__(self, component: int, message: str | None = None):
        self.component = component
        super().__init__(message or f"component {component} is degenerate")


class PositivityError(NmfError):
    """A denominator that must stay strictly positive reached zero."""


class NumericalFailureError(NmfError):
    """The objective became non-finite or an internal loop diverged."""

    def __init__(self, message: str, iteration: int | None = None):
        self.iteration = iteration
        super().__init__(message)


class CsvFormatError(NmfError):
    """A matrix CSV file could not be parsed."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
