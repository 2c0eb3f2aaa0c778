"""Exception types shared across the package."""


class DomainError(ValueError):
    """Coordinates fall outside the model domain."""


class NumericalConsistencyError(ArithmeticError):
    """A closed-form inversion left its valid range beyond the allowed slack."""


class ValidationError(RuntimeError):
    """An object that must be validated first was used while still provisional."""


class PreconditionError(ValueError):
    """An operation's mathematical precondition does not hold."""
