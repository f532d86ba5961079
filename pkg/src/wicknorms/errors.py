"""Exception types shared across the package."""


class DomainError(ValueError):
    """A parameter lies outside the mathematical domain of an operation."""


class PreconditionError(ValueError):
    """Inputs are valid individually but violate an operation's precondition."""


class UnsupportedScaleError(ValueError):
    """The requested problem size exceeds the supported desk scale."""


class UnsupportedFamilyError(ValueError):
    """The kernel sequences do not have the shape an operation requires."""
