"""Exception types shared across the toolkit.

Everything derives from ValueError so callers that do not care about the
distinction can catch one base class; the CLI maps each subtype to a
stage-labelled message and a nonzero exit code.
"""


class ParameterError(ValueError):
    """An argument value is outside its documented domain."""


class ShapeError(ValueError):
    """Array arguments have inconsistent or unsupported shapes."""


class RangeError(ValueError):
    """A coordinate or time lies outside the valid range."""


class DataError(ValueError):
    """Input data violates a structural contract (ordering, weights, ...)."""


class FormatError(ValueError):
    """A serialized artifact could not be parsed."""


class StepLimitError(RuntimeError):
    """An adaptive iteration exceeded its step budget."""
