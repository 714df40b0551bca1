"""Exception hierarchy shared by all modules."""


class SopppError(ValueError):
    """Base class for validation failures raised by this package."""


class CycleDetected(SopppError):
    pass


class UnreachableEdge(SopppError):
    pass


class BadEndpoints(SopppError):
    pass


class InvalidPath(SopppError):
    pass


class TooManyPaths(SopppError):
    pass


class NumericalDegeneracy(SopppError):
    pass


class InconsistentFeedback(SopppError):
    pass


class LossOutOfRange(SopppError):
    pass


class HorizonExceeded(SopppError):
    pass


class BadAllocation(SopppError):
    pass


class IncoherentSearch(SopppError):
    pass


class ParseError(SopppError):
    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class MissingKey(SopppError):
    pass
