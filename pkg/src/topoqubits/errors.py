"""Exception hierarchy shared by every module."""


class TopoQubitsError(Exception):
    """Base class for all errors raised by this package."""


class ShapeError(TopoQubitsError, ValueError):
    """Operands disagree in local dimension, site count or matrix shape."""


class ContractError(TopoQubitsError, ValueError):
    """A precondition of an operation was violated."""


class ResourceError(TopoQubitsError, MemoryError):
    """A configured size cap would be exceeded."""


class NumericError(TopoQubitsError, ArithmeticError):
    """An iterative solver failed to converge."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class PathDegeneracyError(TopoQubitsError, ArithmeticError):
    """An overlap along a discretized path vanished."""

    def __init__(self, message, segment=None):
        super().__init__(message)
        self.segment = segment
