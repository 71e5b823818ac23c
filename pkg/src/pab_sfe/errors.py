"""Exception types shared across the package."""


class PabError(ValueError):
    """Base class for input errors raised by the solver."""


class ValidationError(PabError):
    """An object violates a structural invariant (monotonicity, Lipschitz bound, schema)."""


class DomainError(PabError):
    """An argument lies outside the domain where an operation is defined."""
