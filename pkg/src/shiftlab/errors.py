"""Exception hierarchy shared across the package."""


class ShiftLabError(Exception):
    """Base class for all package errors."""


class ConfigurationError(ShiftLabError, ValueError):
    """Inconsistent configuration, e.g. dimension mismatch between spec and mixing."""


class DomainError(ShiftLabError, ValueError):
    """Argument outside its mathematical domain (weights, probabilities, NaN inputs)."""


class ContractError(ShiftLabError, RuntimeError):
    """API called out of contract, e.g. out-of-order iteration updates."""


class TrainingDivergedError(ShiftLabError, RuntimeError):
    """Training loss became non-finite. Carries the iteration index."""

    def __init__(self, iteration: int, message: str | None = None):
        self.iteration = iteration
        super().__init__(message or f"training diverged at iteration {iteration}")


class ProtocolError(ShiftLabError, ValueError):
    """Experiment protocol violated, e.g. an incomplete result grid.

    ``missing`` lists the absent grid cells when applicable.
    """

    def __init__(self, message: str, missing: list | None = None):
        self.missing = missing or []
        super().__init__(message)
