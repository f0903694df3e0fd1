"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument violates an operation's precondition."""


class CapacityError(RuntimeError):
    """An exhaustive computation would exceed its configured cap."""
