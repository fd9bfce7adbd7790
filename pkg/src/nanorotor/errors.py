"""Exception types shared by all modules."""


class DomainError(ValueError):
    """An input lies outside the physical or contractual domain of an operation."""


class NumericsError(RuntimeError):
    """A numerical procedure failed to converge or left its validity regime."""
