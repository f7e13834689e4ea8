"""Exception types shared across the package."""


class CementError(Exception):
    """Base class for all errors raised by this package."""


class InputError(CementError):
    """Malformed or inconsistent input data."""


class FatalError(CementError):
    """Unrecoverable failure while reading a repository."""


class UnresolvedEntityError(CementError):
    """An entity id could not be resolved against a history."""


class ConfigError(CementError):
    """Invalid run configuration."""


class FaultNotApplicable(CementError):
    """A fault cannot be localized (e.g. none of its failing tests has history)."""

    def __init__(self, fault_id: str, reason: str):
        super().__init__(f"{fault_id}: {reason}")
        self.fault_id = fault_id
        self.reason = reason
