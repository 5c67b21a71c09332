"""Exception types shared across the package."""


class NotFittedError(RuntimeError):
    """An emulator was queried before a successful fit."""


class NumericalError(RuntimeError):
    """A linear-algebra operation failed beyond recovery.

    Carries the final jitter value that was attempted, when applicable.
    """

    def __init__(self, message, jitter=None):
        super().__init__(message)
        self.jitter = jitter


class ProgressError(RuntimeError):
    """An iterative procedure stopped making progress."""
