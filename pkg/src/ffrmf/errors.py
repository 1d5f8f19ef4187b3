"""Exception types shared across the package."""


class FfrmfError(Exception):
    """Base class for errors raised by this package."""


class UnsupportedFieldError(FfrmfError, ValueError):
    """Requested (p, m) is not a supported finite field."""


class ResourceBudgetError(FfrmfError):
    """An enumeration or memory budget would be exceeded."""


class VerificationError(FfrmfError, AssertionError):
    """An exact verification failed; carries the offending values."""

    def __init__(self, message, failures=None):
        super().__init__(message)
        self.failures = tuple(failures) if failures else ()
