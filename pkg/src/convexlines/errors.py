"""Exception taxonomy shared by all modules.

The CLI maps these onto exit codes: domain/usage errors exit 2,
resource and precision errors exit 3.
"""


class DomainError(ValueError):
    """An argument is outside the mathematically valid range."""


class PrecisionError(ArithmeticError):
    """A certified error bound cannot be brought below the requested tolerance."""


class ResourceError(RuntimeError):
    """A computation would exceed a configured memory or size budget."""


class DataError(ValueError):
    """Input data is structurally inconsistent (e.g. an impossible line key)."""


class BudgetExhaustedError(RuntimeError):
    """Rejection sampling ran out of attempts; retryable with a larger budget.

    Carries the number of attempts made and the empirical hit rate so the
    caller can size the retry.
    """

    def __init__(self, message: str, attempts: int, hit_rate: float):
        super().__init__(message)
        self.attempts = attempts
        self.hit_rate = hit_rate
