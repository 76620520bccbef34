"""Exception types shared across the package."""


class ResourceLimitError(RuntimeError):
    """A computation would exceed the configured support or state limits."""


class PreconditionError(ValueError):
    """A mathematical precondition for a construction does not hold."""

    def __init__(self, condition: str, detail: str = ""):
        self.condition = condition
        msg = f"precondition failed: {condition}"
        if detail:
            msg += f" ({detail})"
        super().__init__(msg)


class DegenerateParameterError(PreconditionError):
    """Approximant parameters diverge (e.g. a vanishing second cumulant)."""


class NumericalValidityError(ArithmeticError):
    """A recursion left the region where it is numerically valid."""
