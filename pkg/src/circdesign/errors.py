class DesignError(ValueError):
    """Base class for validation failures (CLI exit code 2)."""


class ConstructionError(DesignError):
    """A named sequence cannot be built for the requested parameters."""


class DomainError(DesignError):
    """Argument outside the domain where a formula is stated."""


class SingularDesignError(DesignError):
    def __init__(self, message: str, rank: int | None = None):
        super().__init__(message)
        self.rank = rank


class CapExceeded(RuntimeError):
    """Exhaustive search would exceed the evaluation budget (CLI exit code 3)."""

    def __init__(self, required: int, cap: int):
        super().__init__(f"search needs {required} evaluations, cap is {cap}")
        self.required = required
        self.cap = cap
