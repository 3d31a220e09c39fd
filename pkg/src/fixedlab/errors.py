"""Exception hierarchy shared by all fixedlab modules."""

from __future__ import annotations


class FixedlabError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(FixedlabError):
    """A parameter violates its documented constraint."""


class ExprSyntaxError(FixedlabError):
    """Expression source failed to parse.

    Attributes:
        offset: 1-based byte offset of the offending token (len+1 at EOF).
        expected: short description of what the parser was looking for.
    """

    def __init__(self, message: str, offset: int, expected: str):
        super().__init__(f"{message} at offset {offset} (expected {expected})")
        self.offset = offset
        self.expected = expected


class EvaluationError(FixedlabError):
    """An expression produced a non-finite value (or an undefined operation)."""


class DomainEscapeError(FixedlabError):
    """An orbit left the domain of its self-map.

    Attributes:
        step: iteration index at which the escape happened.
        value: the escaping iterate.
    """

    def __init__(self, message: str, step: int, value: float):
        super().__init__(message)
        self.step = step
        self.value = value


class UnknownBuiltinError(FixedlabError):
    """A builtin label was not recognized."""


class TraceTooShortError(FixedlabError):
    """A trace has too few iterates for rate classification."""
