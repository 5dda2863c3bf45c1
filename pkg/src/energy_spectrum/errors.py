class InvalidInput(ValueError):
    """Malformed or non-finite input data."""


class PreconditionError(ValueError):
    """Inputs are well formed but violate an operation's precondition."""


class ConstructionError(RuntimeError):
    """A numerical construction (relator re-solve, mesh build) failed."""


class DegenerateConfiguration(ValueError):
    """A coefficient that must be nonzero vanished numerically."""


class InconsistentMapError(ValueError):
    """A mesh map violates equivariance beyond tolerance."""
