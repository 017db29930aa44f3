"""Exception hierarchy shared across the package."""


class DppcaError(Exception):
    """Base class for all errors raised by this package."""


class ContractViolationError(DppcaError, ValueError):
    """An input violated a documented precondition (shape, norm, finiteness)."""


class ParameterError(DppcaError, ValueError):
    """A scalar parameter was outside its documented domain."""


class BudgetError(DppcaError, ValueError):
    """A privacy budget was non-positive, non-finite, or composed past delta >= 1."""


class NumericalError(DppcaError, RuntimeError):
    """An iterative numerical routine failed to converge."""


class SizingError(DppcaError, ValueError):
    """A requested allocation would exceed addressable limits."""


class RankZeroError(ContractViolationError):
    """Spectrum statistics were requested for an all-zero matrix."""


class FormatError(DppcaError, ValueError):
    """A serialized matrix file was malformed."""
