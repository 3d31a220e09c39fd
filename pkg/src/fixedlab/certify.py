"""Sampling-based certification of contraction conditions.

``certify_m_step`` checks, over sampled pairs (x, y), the window
condition

    d(f^[m]x, f^[m]y) <= phi(max{d(x,y), d(fx,fy), ..., d(f^[m-1]x, f^[m-1]y)})

and ``certify_convex_contraction`` the two-term affine condition

    d(f^[2]x, f^[2]y) <= a*d(fx, fy) + b*d(x, y).

On an interval domain a clean result is evidence, not proof, and the
certificate says so (``certified-on-samples``); a finite domain is
enumerated completely (``certified-exhaustive``).  Any sampled
counterexample refutes the condition outright.

Violations are reported with margin = lhs - rhs, capped at 32, ordered
by margin descending then by pair; the count and ordering are
independent of chunking, so certificates are byte-stable.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._core import CompiledExpr, get_engine
from .comparison import ComparisonFunction, validate_convex_coefficients
from .errors import DomainEscapeError, EvaluationError, ValidationError
from .expr import format_float
from .sampling import PairSampler
from .space import BMetricSpace, Domain, Tolerance

__all__ = [
    "SelfMap",
    "Violation",
    "Certificate",
    "MonotoneReport",
    "orbit",
    "window_max",
    "certify_m_step",
    "certify_convex_contraction",
    "monotone_M_check",
]

VIOLATION_CAP = 32


class SelfMap:
    """A one-variable expression f(x) together with the domain it preserves."""

    __slots__ = ("cexpr", "domain", "label")

    def __init__(self, cexpr: CompiledExpr, domain: Domain, label: str | None = None):
        if cexpr.arity != 1:
            raise ValidationError("a self-map expression must have arity 1")
        self.cexpr = cexpr
        self.domain = domain
        self.label = label if label is not None else cexpr.source

    @classmethod
    def from_expression(cls, src: str, domain: Domain, label: str | None = None) -> "SelfMap":
        return cls(CompiledExpr.from_source(src, 1), domain, label)

    @property
    def source(self) -> str:
        return self.cexpr.source

    def __call__(self, x: float) -> float:
        return self.cexpr(x)

    def __repr__(self):
        return f"SelfMap({self.source!r}, domain={self.domain.describe()})"


@dataclass(frozen=True)
class Violation:
    x: float
    y: float
    lhs: float
    rhs: float
    margin: float


@dataclass(frozen=True)
class Certificate:
    condition: str  # "m-step" or "convex"
    status: str  # certified-on-samples, certified-exhaustive, refuted
    map_label: str
    phi_label: str | None
    m: int
    coefficients: tuple | None  # (a, b) in convex mode
    s: float
    pairs_tested: int
    violations_found: int
    worst: tuple  # up to VIOLATION_CAP Violations, worst margin first

    @property
    def certified(self) -> bool:
        return self.status != "refuted"


@dataclass(frozen=True)
class MonotoneReport:
    monotone_ok: bool
    first_violation: int | None
    window_maxes: tuple  # M_0 .. M_N
    final_distance: float  # d(x_N, y_N)


def orbit(f: SelfMap, x: float, n: int) -> np.ndarray:
    """[x, f(x), ..., f^[n](x)], length n + 1."""
    if n < 0:
        raise ValidationError("orbit length n must be non-negative")
    x = float(x)
    if not f.domain.contains(x):
        raise ValidationError(f"starting point {format_float(x)} is outside {f.domain.describe()}")
    values = np.empty(n + 1)
    values[0] = x
    v = x
    for i in range(n):
        try:
            w = f.cexpr.scalar(v, None)
        except EvaluationError as exc:
            raise EvaluationError(f"{exc} (orbit of {format_float(x)}, step {i})") from exc
        if not f.domain.contains(w):
            raise DomainEscapeError(
                f"orbit of {format_float(x)} left the domain at step {i}: "
                f"f({format_float(v)}) = {format_float(w)}",
                step=i,
                value=w,
            )
        values[i + 1] = w
        v = w
    return values


def window_max(space: BMetricSpace, f: SelfMap, x: float, y: float, m: int) -> float:
    """M_0(x, y): max of d(f^[i]x, f^[i]y) over i = 0..m-1."""
    if m < 1:
        raise ValidationError("window width m must be at least 1")
    ox = orbit(f, x, m - 1)
    oy = orbit(f, y, m - 1)
    d = space.metric.cexpr.scalar
    best = d(float(ox[0]), float(oy[0]))
    for i in range(1, m):
        v = d(float(ox[i]), float(oy[i]))
        if v > best:
            best = v
    return best


def _check_compatible(space: BMetricSpace, f: SelfMap) -> None:
    if f.domain != space.domain:
        raise ValidationError("map domain and space domain differ")


def _orbit_levels(engine, f: SelfMap, xs: np.ndarray, m: int) -> list:
    """[xs, f(xs), ..., f^[m](xs)] with per-level escape and error checks."""
    levels = [xs]
    cur = xs
    for step in range(m):
        out, bad = engine.eval_many(f.cexpr, cur)
        if bad.any():
            lane = int(np.argmax(bad))
            start = format_float(levels[0][lane])
            try:
                f.cexpr.scalar(float(cur[lane]), None)
            except EvaluationError as exc:
                raise EvaluationError(f"{exc} (orbit of {start}, step {step})") from exc
            raise RuntimeError("engines disagree on evaluation failure")  # pragma: no cover
        inside = f.domain.contains_many(out)
        if not inside.all():
            lane = int(np.argmax(~inside))
            raise DomainEscapeError(
                f"orbit of {format_float(levels[0][lane])} left the domain at step {step}: "
                f"f({format_float(cur[lane])}) = {format_float(out[lane])}",
                step=step,
                value=float(out[lane]),
            )
        levels.append(out)
        cur = out
    return levels


class _ViolationPool:
    """Accumulates the worst VIOLATION_CAP violations deterministically."""

    def __init__(self):
        self.total = 0
        self.items = []

    def add_batch(self, viol, xs, ys, lhs, rhs, margins):
        idx = np.nonzero(viol)[0]
        self.total += len(idx)
        if len(idx) == 0:
            return
        if len(idx) > VIOLATION_CAP:
            order = np.lexsort((ys[idx], xs[idx], -margins[idx]))
            idx = idx[order][:VIOLATION_CAP]
        for i in idx:
            self.items.append(Violation(
                float(xs[i]), float(ys[i]), float(lhs[i]), float(rhs[i]), float(margins[i])
            ))

    def worst(self):
        self.items.sort(key=lambda v: (-v.margin, v.x, v.y))
        return tuple(self.items[:VIOLATION_CAP])


def _run_certification(space, f, m, sampler, tol, rhs_of, condition, phi_label, coefficients):
    engine = get_engine()
    pool = _ViolationPool()
    pairs = 0
    for xs, ys in sampler.iter_pairs(space.domain):
        pairs += len(xs)
        levels_x = _orbit_levels(engine, f, xs, m)
        levels_y = _orbit_levels(engine, f, ys, m)
        dists = [space.distance_many(levels_x[i], levels_y[i]) for i in range(m + 1)]
        lhs = dists[m]
        rhs = rhs_of(dists)
        viol = ~tol.admits(lhs, rhs)
        pool.add_batch(viol, xs, ys, lhs, rhs, lhs - rhs)
    if pool.total > 0:
        status = "refuted"
    elif space.domain.kind == "finite":
        status = "certified-exhaustive"
    else:
        status = "certified-on-samples"
    return Certificate(
        condition=condition,
        status=status,
        map_label=f.label,
        phi_label=phi_label,
        m=m,
        coefficients=coefficients,
        s=space.s,
        pairs_tested=pairs,
        violations_found=pool.total,
        worst=pool.worst(),
    )


def certify_m_step(space: BMetricSpace, f: SelfMap, phi: ComparisonFunction, m: int,
                   sampler: PairSampler | None = None,
                   tol: Tolerance | None = None) -> Certificate:
    """Certify or refute the m-step window condition on sampled pairs."""
    if m < 1:
        raise ValidationError("window width m must be at least 1")
    _check_compatible(space, f)
    sampler = sampler if sampler is not None else PairSampler()
    tol = tol if tol is not None else Tolerance()
    engine = get_engine()

    def rhs_of(dists):
        window = dists[0]
        for i in range(1, m):
            window = np.where(dists[i] > window, dists[i], window)
        out, bad = engine.eval_many(phi.cexpr, window)
        trouble = bad | (out < 0)
        if trouble.any():
            lane = int(np.argmax(trouble))
            r0 = format_float(window[lane])
            try:
                v = phi.cexpr.scalar(float(window[lane]), None)
            except EvaluationError as exc:
                raise EvaluationError(f"{exc} (window max {r0})") from exc
            raise EvaluationError(
                f"comparison function returned negative value {format_float(v)} "
                f"at window max {r0}"
            )
        return out

    return _run_certification(
        space, f, m, sampler, tol, rhs_of, "m-step", phi.label, None
    )


def certify_convex_contraction(space: BMetricSpace, f: SelfMap, a: float, b: float,
                               sampler: PairSampler | None = None,
                               tol: Tolerance | None = None) -> Certificate:
    """Certify or refute d(f^2 x, f^2 y) <= a*d(fx, fy) + b*d(x, y)."""
    a, b = float(a), float(b)
    validate_convex_coefficients(a, b)
    _check_compatible(space, f)
    sampler = sampler if sampler is not None else PairSampler()
    tol = tol if tol is not None else Tolerance()

    def rhs_of(dists):
        return a * dists[1] + b * dists[0]

    return _run_certification(
        space, f, 2, sampler, tol, rhs_of, "convex", None, (a, b)
    )


def certify_pair(space: BMetricSpace, f: SelfMap, phi: ComparisonFunction, m: int,
                 x: float, y: float) -> Violation:
    """Scalar m-step evaluation of one pair; mirrors the batch arithmetic."""
    ox = orbit(f, x, m)
    oy = orbit(f, y, m)
    d = space.metric.cexpr.scalar
    window = None
    for i in range(m):
        v = d(float(ox[i]), float(oy[i]))
        if window is None or v > window:
            window = v
    lhs = d(float(ox[m]), float(oy[m]))
    rhs = phi.cexpr.scalar(window, None)
    return Violation(float(x), float(y), lhs, rhs, lhs - rhs)


def monotone_M_check(space: BMetricSpace, f: SelfMap, x: float, y: float, m: int,
                     N: int, tol: Tolerance | None = None) -> MonotoneReport:
    """Track the window maxima M_0..M_N along the orbits of x and y.

    Under a certified m-step condition the sequence must be
    non-increasing; the report also carries d(x_N, y_N) as direct
    evidence that the orbit distance itself decays.
    """
    if m < 1:
        raise ValidationError("window width m must be at least 1")
    if N < 1:
        raise ValidationError("number of windows N must be at least 1")
    _check_compatible(space, f)
    tol = tol if tol is not None else Tolerance()
    ox = orbit(f, x, N + m - 1)
    oy = orbit(f, y, N + m - 1)
    d = space.metric.cexpr.scalar
    dists = []
    for i in range(N + m):
        v = d(float(ox[i]), float(oy[i]))
        if v < 0:
            raise EvaluationError(
                f"metric returned negative distance {format_float(v)} for pair "
                f"({format_float(ox[i])}, {format_float(oy[i])})"
            )
        dists.append(v)
    maxes = []
    for n in range(N + 1):
        best = dists[n]
        for i in range(n + 1, n + m):
            if dists[i] > best:
                best = dists[i]
        maxes.append(best)
    first_violation = None
    for n in range(N):
        if not tol.admits(maxes[n + 1], maxes[n]):
            first_violation = n + 1
            break
    return MonotoneReport(
        monotone_ok=first_violation is None,
        first_violation=first_violation,
        window_maxes=tuple(maxes),
        final_distance=dists[N],
    )
