"""Exception types shared across the package."""


class MsstabError(Exception):
    """Base class for all errors raised by msstab."""


class ValidationError(MsstabError):
    """Invalid user input or parameter combination."""


class DegenerateDenominator(MsstabError):
    """The implicit-step denominator is (numerically) zero."""


class ZeroDrift(MsstabError):
    """An operation requiring a nonzero drift rate was called with lambda = 0."""
