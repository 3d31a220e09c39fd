"""Comparison functions and their empirical verification.

A comparison function is an increasing map of [0, inf) into itself whose
iterates tend to 0 at every radius; it follows that phi(0) = 0 and
phi(r) < r.  ``verify_comparison`` checks these three laws on a radius
grid.  The decay law has no finite certificate, so the check applies a
configurable iteration budget and records the achieved iterate values
verbatim in the report.

Monotonicity is checked non-strictly (constant stretches are allowed),
sub-identity strictly.  A negative output anywhere is treated as an
evaluation error rather than a law violation: non-negativity is part of
the type's contract.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._core import CompiledExpr, get_engine
from .errors import EvaluationError, ValidationError
from .expr import BinOp, Num, Var, format_float
from .space import Tolerance

__all__ = [
    "ComparisonFunction",
    "PhiWitness",
    "PhiReport",
    "iterate_phi",
    "verify_comparison",
    "convex_to_comparison",
    "default_radii",
    "validate_convex_coefficients",
]

class ComparisonFunction:
    """A one-variable expression phi(r), evaluated at non-negative radii."""

    __slots__ = ("cexpr", "label")

    def __init__(self, cexpr: CompiledExpr, label: str | None = None):
        if cexpr.arity != 1:
            raise ValidationError("a comparison function expression must have arity 1")
        self.cexpr = cexpr
        self.label = label if label is not None else cexpr.source

    @classmethod
    def from_expression(cls, src: str, label: str | None = None) -> "ComparisonFunction":
        return cls(CompiledExpr.from_source(src, 1), label)

    @classmethod
    def linear(cls, c: float) -> "ComparisonFunction":
        c = float(c)
        if not (np.isfinite(c) and 0.0 < c < 1.0):
            raise ValidationError("linear comparison slope c must lie in (0, 1)")
        ast = BinOp("*", Num(c), Var("x"))
        return cls(CompiledExpr(ast, 1), label=f"linear({format_float(c)})")

    @property
    def source(self) -> str:
        return self.cexpr.source

    def __call__(self, r: float) -> float:
        r = float(r)
        if not (np.isfinite(r) and r >= 0.0):
            raise ValidationError("comparison functions take non-negative finite radii")
        v = self.cexpr.scalar(r, None)
        if v < 0.0:
            raise EvaluationError(
                f"comparison function returned negative value {format_float(v)} "
                f"at radius {format_float(r)}"
            )
        return v

    def __repr__(self):
        return f"ComparisonFunction({self.source!r})"


def iterate_phi(phi: ComparisonFunction, r: float, k: int) -> float:
    """k-fold composition phi^[k](r); k = 0 returns r unchanged."""
    if k < 0:
        raise ValidationError("iteration count k must be non-negative")
    v = float(r)
    for i in range(k):
        try:
            v = phi(v)
        except EvaluationError as exc:
            raise EvaluationError(f"{exc} (iterate {i + 1} from radius {format_float(r)})") from exc
    return v


@dataclass(frozen=True)
class PhiWitness:
    law: str  # monotone, subidentity, decay
    inputs: tuple
    values: tuple


@dataclass(frozen=True)
class PhiReport:
    monotone_ok: bool
    subidentity_ok: bool
    decay_ok: bool
    iters: int
    decay_tol: float
    decay_achieved: tuple  # (radius, phi^[iters](radius)) for every radius
    witnesses: tuple

    @property
    def passed(self) -> bool:
        return self.monotone_ok and self.subidentity_ok and self.decay_ok


def default_radii() -> np.ndarray:
    """0 plus 61 log-spaced radii over [1e-6, 1e3]."""
    return np.concatenate(([0.0], np.logspace(-6.0, 3.0, 61)))


def _phi_values(phi, radii):
    vals = np.empty(len(radii))
    for i, r in enumerate(radii):
        vals[i] = phi(float(r))
    return vals


def verify_comparison(phi: ComparisonFunction, radii=None, iters: int = 256,
                      decay_tol: float = 1e-9, tol: Tolerance | None = None) -> PhiReport:
    """Check the comparison-function laws of ``phi`` on a radius grid.

    monotone: phi(r_i) <= phi(r_{i+1}) up to slack for adjacent radii.
    subidentity: phi(0) <= tol_abs and phi(r) < r strictly for r > 0.
    decay: phi^[iters](r) <= decay_tol for every radius.
    """
    radii = default_radii() if radii is None else np.asarray(
        [float(r) for r in radii], dtype=np.float64
    )
    tol = tol if tol is not None else Tolerance()
    if len(radii) == 0:
        raise ValidationError("need at least one radius")
    if np.any(~np.isfinite(radii)) or np.any(radii < 0):
        raise ValidationError("radii must be finite and non-negative")
    if np.any(np.diff(radii) < 0):
        raise ValidationError("radii must be sorted ascending")
    if iters < 1:
        raise ValidationError("iteration budget must be at least 1")
    if not (np.isfinite(decay_tol) and decay_tol >= 0):
        raise ValidationError("decay_tol must be finite and non-negative")

    witnesses = []
    vals = _phi_values(phi, radii)

    monotone_ok = True
    for i in range(len(radii) - 1):
        if not tol.admits(vals[i], vals[i + 1]):
            monotone_ok = False
            witnesses.append(PhiWitness(
                "monotone",
                (float(radii[i]), float(radii[i + 1])),
                (float(vals[i]), float(vals[i + 1])),
            ))

    subidentity_ok = True
    for r, v in zip(radii, vals):
        bad = v > tol.tol_abs if r == 0.0 else not v < r
        if bad:
            subidentity_ok = False
            witnesses.append(PhiWitness("subidentity", (float(r),), (float(v),)))

    final = _iterate_grid(phi, radii, iters)
    decay_ok = True
    for r, v in zip(radii, final):
        if v > decay_tol:
            decay_ok = False
            witnesses.append(PhiWitness("decay", (float(r),), (float(v),)))

    return PhiReport(
        monotone_ok=monotone_ok,
        subidentity_ok=subidentity_ok,
        decay_ok=decay_ok,
        iters=iters,
        decay_tol=decay_tol,
        decay_achieved=tuple((float(r), float(v)) for r, v in zip(radii, final)),
        witnesses=tuple(witnesses),
    )


def _iterate_grid(phi, radii, iters):
    engine = get_engine()
    values = np.array(radii, dtype=np.float64)
    for k in range(iters):
        out, bad = engine.eval_many(phi.cexpr, values)
        trouble = bad | (out < 0)
        if trouble.any():
            lane = int(np.argmax(trouble))
            r0 = format_float(radii[lane])
            try:
                v = phi.cexpr.scalar(float(values[lane]), None)
            except EvaluationError as exc:
                raise EvaluationError(f"{exc} (decay iterate {k + 1} of radius {r0})") from exc
            raise EvaluationError(
                f"comparison function returned negative value {format_float(v)} "
                f"(decay iterate {k + 1} of radius {r0})"
            )
        values = out
    return values


def validate_convex_coefficients(a: float, b: float) -> None:
    if not (np.isfinite(a) and 0.0 < a < 1.0):
        raise ValidationError("coefficient a must lie in the open interval (0, 1)")
    if not (np.isfinite(b) and 0.0 < b < 1.0):
        raise ValidationError("coefficient b must lie in the open interval (0, 1)")
    if not a + b < 1.0:
        raise ValidationError("coefficients must satisfy a + b < 1")


def convex_to_comparison(a: float, b: float) -> ComparisonFunction:
    """Linear comparison function r -> (a+b)*r from convex-contraction coefficients."""
    a, b = float(a), float(b)
    validate_convex_coefficients(a, b)
    c = a + b
    ast = BinOp("*", Num(c), Var("x"))
    return ComparisonFunction(
        CompiledExpr(ast, 1),
        label=f"linear({format_float(c)}) from a={format_float(a)}, b={format_float(b)}",
    )
