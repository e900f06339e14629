"""Exception hierarchy shared by the library and the CLI exit-code map."""


class LatticeError(Exception):
    """Base class for all errors raised by this package."""


class InvalidGramError(LatticeError):
    """Gram matrix is malformed: not square, not integral, or not symmetric."""


class DegenerateLatticeError(LatticeError):
    """Gram matrix has determinant zero."""


class DefinitenessError(LatticeError):
    """Operation requires a (positive) definite lattice or a smaller rank."""


class PreconditionError(LatticeError):
    """A documented precondition of a counting path or operation failed."""


class EnumerationBoundError(PreconditionError):
    """A finite enumeration would exceed the configured size bound."""
