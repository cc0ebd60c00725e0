"""Exception types shared by the core modules."""

from __future__ import annotations


class BudgetExceededError(ValueError):
    """Raised when a request exceeds a documented work budget."""

    def __init__(self, what: str, requested: int, limit: int) -> None:
        super().__init__(f"{what}: requested {requested} exceeds limit {limit}")
        self.what = what
        self.requested = requested
        self.limit = limit


class SamplingBudgetExceeded(RuntimeError):
    """Raised when rejection sampling runs out of attempts."""

    def __init__(self, attempts: int, detail: str = "") -> None:
        message = f"rejection sampling failed after {attempts} attempts"
        if detail:
            message += f" ({detail})"
        super().__init__(message)
        self.attempts = attempts
