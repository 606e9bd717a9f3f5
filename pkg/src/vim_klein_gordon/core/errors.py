class VimError(Exception):
    """Base class for every error raised by the VIM engine."""


class DomainError(VimError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class InsufficientOrderError(VimError):
    """A truncated series is too short for the requested tail tolerance."""


class FormulaInapplicableError(VimError):
    """The gather form of the coefficient recursion divides by zero."""


class ModeError(VimError):
    """The operation is not defined for the iterate's multiplier mode."""


class ConfigError(VimError, ValueError):
    """A run or sweep configuration is invalid."""


class InvariantViolation(VimError, AssertionError):
    def __init__(self, invariant: str, detail: str = ""):
        self.invariant = invariant
        self.detail = detail
        super().__init__(f"{invariant}: {detail}" if detail else invariant)
