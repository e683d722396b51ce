"""Exception types shared across the package."""

from __future__ import annotations


class HofaError(Exception):
    """Base class for all library errors."""


class DimensionMismatch(HofaError, ValueError):
    pass


class PrimeMismatch(HofaError, ValueError):
    """Raised when values over different primes are combined."""


class BudgetExceeded(HofaError):
    """An exact enumeration would exceed the configured iteration budget."""

    def __init__(self, needed: int, budget: int, hint: str = ""):
        self.needed = needed
        self.budget = budget
        msg = f"enumeration of {needed} iterations exceeds budget {budget}"
        if hint:
            msg += f"; {hint}"
        super().__init__(msg)


class ParseError(HofaError, ValueError):
    """Syntax error in one of the text formats, with a character position."""

    def __init__(self, message: str, text: str = "", pos: int | None = None):
        self.text = text
        self.pos = pos
        if pos is not None:
            message = f"{message} (at column {pos + 1} of {text!r})"
        super().__init__(message)


class NonZeroShift(HofaError, ValueError):
    pass


class VerificationError(HofaError, AssertionError):
    """A checked mathematical property failed; carries a machine-readable record."""

    def __init__(self, message: str, record: dict | None = None):
        self.record = {"violation": message, **(record or {})}
        super().__init__(message)


DEFAULT_BUDGET = 10**8


def check_budget(needed: int, budget: int | None, hint: str = "") -> None:
    if budget is None:
        budget = DEFAULT_BUDGET
    if needed > budget:
        raise BudgetExceeded(needed, budget, hint)
