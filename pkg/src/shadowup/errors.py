"""Exception types shared across the package."""


class ShadowUpError(Exception):
    """Base class for all errors raised by this package."""


class InvalidInputError(ShadowUpError, ValueError):
    """An argument violated a documented precondition."""


class ImageIOError(ShadowUpError, OSError):
    """Reading or writing an image file failed.

    The message always names the offending path and the reason, so CLI
    error reporting can pass it through verbatim.
    """

    def __init__(self, path, reason: str):
        self.path = str(path)
        self.reason = reason
        super().__init__(f"{self.path}: {reason}")


class ConvergenceError(ShadowUpError):
    """The iterative solver ran out of iterations.

    Carries the last iterate so callers can decide whether a partial
    result is still usable.
    """

    def __init__(self, message: str, residual: float, iterations: int, partial=None):
        self.residual = residual
        self.iterations = iterations
        self.partial = partial
        super().__init__(message)
