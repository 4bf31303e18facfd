"""Exception types raised by the package."""


class QorcError(Exception):
    """Base class for all package errors."""


class ShapeError(QorcError, ValueError):
    pass


class InvalidDimensionError(QorcError, ValueError):
    pass


class InvalidOutcomeError(QorcError, ValueError):
    pass


class BudgetExceededError(QorcError):
    """The outcome space is larger than the configured enumeration cap."""

    def __init__(self, required: int, cap: int):
        self.required = required
        self.cap = cap
        super().__init__(
            f"outcome space has {required} states, above the cap of {cap}; "
            f"raise max_outcomes to at least {required}"
        )


class ConfigError(QorcError, ValueError):
    pass


class DataError(QorcError):
    pass


class ParseError(DataError, ValueError):
    pass


class InsufficientDataError(DataError, ValueError):
    pass


class CacheIncompatibleError(DataError):
    def __init__(self, differences: dict):
        self.differences = differences
        listing = ", ".join(f"{k}: cache={a!r} config={b!r}" for k, (a, b) in differences.items())
        super().__init__(f"feature cache does not match the configuration ({listing})")


class DivergenceError(QorcError, ArithmeticError):
    def __init__(self, epoch: int, batch: int):
        self.epoch = epoch
        self.batch = batch
        super().__init__(f"non-finite loss at epoch {epoch}, batch {batch}")


class FitFailedError(QorcError, RuntimeError):
    def __init__(self, message: str, best=None):
        self.best = best
        super().__init__(message)


class NoCrossoverError(QorcError, ValueError):
    pass
