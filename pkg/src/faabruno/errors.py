"""Exception types shared across the package."""


class DimensionError(ValueError):
    """Arity or dimension mismatch between operands."""


class RingMismatchError(TypeError):
    """Operands live over different scalar rings."""


class BasePointError(ValueError):
    """Inner tower's value does not match the outer tower's base point."""


class OrderError(ValueError):
    """Requested derivative order exceeds what the operands carry."""


class EvaluationError(ArithmeticError):
    """A black-box evaluation produced a non-finite value."""
