"""Named builtin maps, metrics, and comparison functions.

The command line accepts either a raw expression or one of the names
defined here.  Parameterized builtins take a single numeric argument in
parentheses, e.g. ``linear(0.25)`` or ``powdiff(2)``.
"""

from __future__ import annotations

import re

from .certify import SelfMap
from .comparison import ComparisonFunction
from .errors import UnknownBuiltinError, ValidationError
from .space import Domain, Metric


def _ex31() -> SelfMap:
    return SelfMap.from_expression(
        "if(x<0.5, x/4, x/5)", Domain.interval(0.0, 1.0), label="ex31"
    )


def _ex32() -> SelfMap:
    return SelfMap.from_expression("x - x^2", Domain.interval(0.0, 0.5), label="ex32")


def _ex32phi() -> ComparisonFunction:
    # Quadratic decay near zero, clamped to the constant 1/4 past one half.
    return ComparisonFunction.from_expression(
        "if(x<=0.5, x - x^2, 0.25)", label="ex32phi"
    )


def _linear(c: float) -> ComparisonFunction:
    return ComparisonFunction.linear(c)


def _absdiff() -> Metric:
    return Metric.from_expression("abs(x - y)", label="absdiff")


def _powdiff(p: float) -> Metric:
    """|x - y|^p.  For p >= 1 this needs relaxation constant s = 2^(p-1)."""
    if not p >= 1.0:
        raise ValidationError(f"powdiff exponent must be at least 1, got {p!r}")
    return Metric.from_expression(f"abs(x - y)^{p!r}", label=f"powdiff({p!r})")


# name -> (factory, takes_argument)
_BUILTINS = {
    "ex31": (_ex31, False),
    "ex32": (_ex32, False),
    "ex32phi": (_ex32phi, False),
    "linear": (_linear, True),
    "absdiff": (_absdiff, False),
    "powdiff": (_powdiff, True),
}

BUILTIN_NAMES = ("ex31", "ex32", "ex32phi", "linear(c)", "absdiff", "powdiff(p)")

_NAME_RE = re.compile(r"\A\s*([A-Za-z_][A-Za-z_0-9]*)\s*(?:\(\s*([^()]*?)\s*\))?\s*\Z")


def is_builtin_name(text: str) -> bool:
    """True when text has builtin shape and names a known builtin."""
    match = _NAME_RE.match(text)
    return bool(match) and match.group(1) in _BUILTINS


def builtin_lookup(text: str):
    """Resolve a builtin name to a SelfMap, Metric, or ComparisonFunction.

    Raises UnknownBuiltinError when the name is not recognized or the
    argument shape is wrong, and ValidationError when the argument value
    is out of range.
    """
    listing = ", ".join(BUILTIN_NAMES)
    match = _NAME_RE.match(text)
    if not match:
        raise UnknownBuiltinError(f"unknown builtin {text!r}; choose one of: {listing}")
    name, arg = match.group(1), match.group(2)
    entry = _BUILTINS.get(name)
    if entry is None:
        raise UnknownBuiltinError(f"unknown builtin {name!r}; choose one of: {listing}")
    factory, takes_argument = entry
    if takes_argument:
        if arg is None or arg == "":
            raise UnknownBuiltinError(
                f"builtin {name!r} takes a numeric argument, e.g. {name}(0.5)"
            )
        try:
            value = float(arg)
        except ValueError:
            raise UnknownBuiltinError(
                f"builtin {name!r} takes a numeric argument, got {arg!r}"
            ) from None
        return factory(value)
    if arg is not None:
        raise UnknownBuiltinError(f"builtin {name!r} takes no argument")
    return factory()
