"""Exception types shared across the package."""


class PslabError(Exception):
    """Base class for all package-specific errors."""


class PrecisionExhausted(PslabError):
    """Raised when the precision policy's bit budget is exhausted before a
    certified decision could be made."""


class AmbiguousRounding(PslabError):
    """Raised when an interval is too wide to bound a rounding-sensitive
    quantity; callers should retry at higher precision."""


class DomainError(PslabError):
    """Argument outside the mathematical domain of an operation."""


class NotSolvableInN(PslabError):
    """The linear equation has no (or only finitely many) solutions over the
    positive integers, so the construction is rejected."""


class TooFewMembers(PslabError):
    """A window does not contain enough members for the requested statistic."""


class EmptyInput(PslabError):
    """An operation that needs at least one data point received none."""


class InsufficientData(PslabError):
    """Not enough usable data points survived filtering to produce a fit."""
