"""Exception types shared across the package."""


class PmlabError(Exception):
    pass


class DimensionError(PmlabError, ValueError):
    """Vector or sequence dimension does not match the norm."""


class DomainError(PmlabError, ValueError):
    """A parameter lies outside its admissible range."""


class UnsupportedError(DomainError):
    """The requested quantity has no supported closed form."""


class EnumerationCapError(PmlabError):
    """Support too large for exact sign enumeration."""


class BoundViolation(PmlabError, AssertionError):
    """A certified inequality failed on a concrete certificate."""
