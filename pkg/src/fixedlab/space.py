"""Domains, metrics, and b-metric space checking.

A b-metric relaxes the triangle inequality to
``d(x, y) <= s * (d(x, z) + d(z, y))`` for a constant ``s >= 1``; with
``s = 1`` it is an ordinary metric.  ``verify_axioms`` samples the
axioms, ``min_b_constant`` estimates the smallest workable ``s``, and
``chained_bound`` evaluates the weighted chain estimate
``d(x_0, x_p) <= sum_{i=1..p} s^i d(x_{i-1}, x_i)``.

All comparisons go through :class:`Tolerance`: a check of
``lhs <= rhs`` accepts when ``lhs <= rhs + tol_abs + tol_rel *
max(|lhs|, |rhs|)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._core import CompiledExpr, get_engine, raise_first_bad
from .errors import EvaluationError, ValidationError
from .expr import format_float
from .sampling import PairSampler

__all__ = [
    "Tolerance",
    "Domain",
    "Metric",
    "BMetricSpace",
    "AxiomWitness",
    "AxiomReport",
    "verify_axioms",
    "min_b_constant",
    "chained_bound",
]

WITNESS_CAP = 32


@dataclass(frozen=True)
class Tolerance:
    """Slack for floating-point inequality checks."""

    tol_abs: float = 1e-12
    tol_rel: float = 1e-9

    def __post_init__(self):
        for name in ("tol_abs", "tol_rel"):
            v = getattr(self, name)
            if not (np.isfinite(v) and v >= 0):
                raise ValidationError(f"{name} must be finite and non-negative")

    def slack(self, lhs, rhs):
        return self.tol_abs + self.tol_rel * np.maximum(np.abs(lhs), np.abs(rhs))

    def admits(self, lhs, rhs):
        """Whether ``lhs <= rhs`` holds up to slack.  Works elementwise."""
        return lhs <= rhs + self.slack(lhs, rhs)


@dataclass(frozen=True)
class Domain:
    """A closed interval or a finite set of reals."""

    kind: str
    lo: float = 0.0
    hi: float = 0.0
    points: tuple = ()

    @classmethod
    def interval(cls, lo: float, hi: float) -> "Domain":
        lo, hi = float(lo), float(hi)
        if not (np.isfinite(lo) and np.isfinite(hi)):
            raise ValidationError("interval endpoints must be finite")
        if not lo < hi:
            raise ValidationError("interval needs lo < hi")
        return cls("interval", lo, hi)

    @classmethod
    def finite(cls, values) -> "Domain":
        pts = tuple(sorted(float(v) for v in values))
        if not pts:
            raise ValidationError("finite domain needs at least one point")
        if not all(np.isfinite(v) for v in pts):
            raise ValidationError("finite domain points must be finite")
        if len(set(pts)) != len(pts):
            raise ValidationError("finite domain points must be distinct")
        return cls("finite", pts[0], pts[-1], pts)

    def contains(self, v: float) -> bool:
        if self.kind == "interval":
            return self.lo <= v <= self.hi
        i = np.searchsorted(self.points, v)
        return i < len(self.points) and self.points[i] == v

    def contains_many(self, values: np.ndarray) -> np.ndarray:
        if self.kind == "interval":
            return (self.lo <= values) & (values <= self.hi)
        pts = np.asarray(self.points)
        idx = np.searchsorted(pts, values)
        idx = np.minimum(idx, len(pts) - 1)
        return pts[idx] == values

    def as_spec(self):
        """Primitive tuple handed to the evaluation kernels."""
        if self.kind == "interval":
            return ("interval", self.lo, self.hi, None)
        return ("finite", None, None, np.asarray(self.points))

    def describe(self) -> str:
        if self.kind == "interval":
            return f"[{format_float(self.lo)}, {format_float(self.hi)}]"
        inner = ", ".join(format_float(v) for v in self.points)
        return "{" + inner + "}"


class Metric:
    """A two-variable distance expression d(x, y)."""

    __slots__ = ("cexpr", "label")

    def __init__(self, cexpr: CompiledExpr, label: str | None = None):
        if cexpr.arity != 2:
            raise ValidationError("a metric expression must have arity 2")
        self.cexpr = cexpr
        self.label = label if label is not None else cexpr.source

    @classmethod
    def from_expression(cls, src: str, label: str | None = None) -> "Metric":
        return cls(CompiledExpr.from_source(src, 2), label)

    @property
    def source(self) -> str:
        return self.cexpr.source

    def __call__(self, x: float, y: float) -> float:
        return self.cexpr(x, y)

    def __repr__(self):
        return f"Metric({self.source!r})"


@dataclass(frozen=True)
class BMetricSpace:
    domain: Domain
    metric: Metric
    s: float = 1.0

    def __post_init__(self):
        if not (np.isfinite(self.s) and self.s >= 1.0):
            raise ValidationError("b-metric constant s must be finite and >= 1")

    def distance(self, x: float, y: float) -> float:
        return self.metric(x, y)

    def distance_many(self, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
        """Vectorized distances; raises on evaluation failure or a negative value."""
        engine = get_engine()
        out, bad = engine.eval_many(self.metric.cexpr, xs, ys)
        if bad.any():
            raise_first_bad(self.metric.cexpr, bad, xs, ys)
        neg = out < 0
        if neg.any():
            lane = int(np.argmax(neg))
            raise EvaluationError(
                f"metric returned negative distance {format_float(out[lane])} for pair "
                f"({format_float(np.asarray(xs)[lane])}, {format_float(np.asarray(ys)[lane])})"
            )
        return out


@dataclass(frozen=True)
class AxiomWitness:
    axiom: str  # identity, positivity, symmetry, triangle
    points: tuple
    lhs: float
    rhs: float
    magnitude: float


@dataclass(frozen=True)
class AxiomReport:
    passed: bool
    samples_tested: int
    witnesses: tuple
    exhaustive: bool


class _WitnessPool:
    """Keeps the worst WITNESS_CAP witnesses, ordered by magnitude then points."""

    def __init__(self):
        self.items = []
        self.total = 0

    def add_batch(self, axiom, viol, point_cols, lhs, rhs, magnitude):
        idx = np.nonzero(viol)[0]
        self.total += len(idx)
        if len(idx) == 0:
            return
        if len(idx) > WITNESS_CAP:
            keys = [col[idx] for col in reversed(point_cols)]
            keys.append(-magnitude[idx])
            idx = idx[np.lexsort(keys)][:WITNESS_CAP]
        for i in idx:
            pts = tuple(float(col[i]) for col in point_cols)
            self.items.append(
                AxiomWitness(axiom, pts, float(lhs[i]), float(rhs[i]), float(magnitude[i]))
            )

    def worst(self):
        self.items.sort(key=lambda w: (-w.magnitude, w.points, w.axiom))
        return tuple(self.items[:WITNESS_CAP])


def _checked_eval(engine, cexpr, xs, ys):
    out, bad = engine.eval_many(cexpr, xs, ys)
    if bad.any():
        raise_first_bad(cexpr, bad, xs, ys)
    return out


def verify_axioms(space: BMetricSpace, sampler: PairSampler | None = None,
                  tol: Tolerance | None = None) -> AxiomReport:
    """Sample the b-metric axioms of ``space``.

    Identity d(x,x)=0 is checked on every sampled value, positivity and
    symmetry on grid and random pairs, and the relaxed triangle
    inequality on grid-cube and random triples.  Finite domains are
    enumerated completely, so their reports are exhaustive.
    """
    sampler = sampler if sampler is not None else PairSampler(grid_points=101)
    tol = tol if tol is not None else Tolerance()
    engine = get_engine()
    d = space.metric.cexpr
    pool = _WitnessPool()
    samples = 0

    pts = sampler.points(space.domain)
    samples += len(pts)
    dd = _checked_eval(engine, d, pts, pts)
    viol = np.abs(dd) > tol.tol_abs
    pool.add_batch("identity", viol, [pts], dd, np.zeros(len(pts)), np.abs(dd))

    for xs, ys in sampler.iter_pairs(space.domain):
        samples += len(xs)
        dxy = _checked_eval(engine, d, xs, ys)
        dyx = _checked_eval(engine, d, ys, xs)
        distinct = xs != ys
        pos_viol = distinct & (dxy <= tol.tol_abs)
        pool.add_batch(
            "positivity", pos_viol, [xs, ys], dxy,
            np.full(len(xs), tol.tol_abs), tol.tol_abs - dxy,
        )
        gap = np.abs(dxy - dyx)
        sym_viol = gap > tol.slack(dxy, dyx)
        pool.add_batch("symmetry", sym_viol, [xs, ys], dxy, dyx, gap)

    for a, b, c in sampler.iter_triples(space.domain):
        samples += len(a)
        dac = _checked_eval(engine, d, a, c)
        dab = _checked_eval(engine, d, a, b)
        dbc = _checked_eval(engine, d, b, c)
        rhs = space.s * (dab + dbc)
        viol = ~tol.admits(dac, rhs)
        pool.add_batch("triangle", viol, [a, b, c], dac, rhs, dac - rhs)

    return AxiomReport(
        passed=pool.total == 0,
        samples_tested=samples,
        witnesses=pool.worst(),
        exhaustive=space.domain.kind == "finite",
    )


def min_b_constant(domain: Domain, metric: Metric, sampler: PairSampler | None = None) -> float:
    """Largest sampled ratio d(a,c) / (d(a,b) + d(b,c)), floored at 1.

    Any b-metric constant for ``metric`` on ``domain`` must be at least
    this value; on a finite domain the result is exact.
    """
    sampler = sampler if sampler is not None else PairSampler(grid_points=101)
    engine = get_engine()
    d = metric.cexpr
    best = 1.0
    for a, b, c in sampler.iter_triples(domain):
        dac = _checked_eval(engine, d, a, c)
        dab = _checked_eval(engine, d, a, b)
        dbc = _checked_eval(engine, d, b, c)
        den = dab + dbc
        usable = den > 0
        if usable.any():
            ratio = dac[usable] / den[usable]
            best = max(best, float(ratio.max()))
    return best


def chained_bound(step_dists, s: float) -> float:
    """Weighted chain estimate sum_{i=1..p} s^i * step_dists[i-1].

    It dominates d(x_0, x_p) whenever step_dists are consecutive
    distances along a chain in a space with constant ``s``.
    """
    if not (np.isfinite(s) and s >= 1.0):
        raise ValidationError("b-metric constant s must be finite and >= 1")
    dists = [float(v) for v in step_dists]
    if any(not np.isfinite(v) or v < 0 for v in dists):
        raise ValidationError("step distances must be finite and non-negative")
    total = 0.0
    weight = 1.0
    for v in dists:
        weight *= s
        total += weight * v
    return total
