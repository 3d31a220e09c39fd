"""Picard iteration and convergence diagnostics.

``picard_iterate`` runs x_{n+1} = f(x_n) until a stop rule fires and
returns the full trace: iterates, step distances d(x_n, x_{n+1}), and,
for a window width m > 1, the maxima M_n of m consecutive step
distances (the window quantity for the pair (x_0, f(x_0)), which under
a certified m-step condition is non-increasing).

``estimate_rate`` classifies the tail of a trace.  Residuals
r_n = d(x_n, alpha_hat) over the last half of the trace (final point
excluded) are examined for two patterns, sublinear first: n * r_n
stable (the 1/n decay regime, where consecutive-residual ratios also
drift up to 1 and would masquerade as geometric), then r_{n+1}/r_n
stable around a median below 1.  Stability means at least 80% of the
values lie within 10% of their median.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._core import get_engine
from .certify import SelfMap
from .errors import TraceTooShortError, ValidationError
from .expr import format_float
from .space import BMetricSpace

__all__ = [
    "StopCriteria",
    "PicardTrace",
    "RateReport",
    "picard_iterate",
    "estimate_rate",
]

MIN_RATE_ITERATES = 16
STABLE_BAND = 0.1
STABLE_FRACTION = 0.8


@dataclass(frozen=True)
class StopCriteria:
    step_tol: float = 1e-12
    max_iters: int = 10 ** 6
    escape_bound: float = 1e12

    def __post_init__(self):
        if not (np.isfinite(self.step_tol) and self.step_tol >= 0):
            raise ValidationError("step_tol must be finite and non-negative")
        if self.max_iters < 1:
            raise ValidationError("max_iters must be at least 1")
        if not self.escape_bound > 0:
            raise ValidationError("escape_bound must be positive")


@dataclass(frozen=True, eq=False)
class PicardTrace:
    iterates: np.ndarray
    step_dists: np.ndarray
    window_maxes: np.ndarray  # empty unless m > 1
    stop_reason: str  # step-converged, max-iters, escaped, exact-fixed-point
    m: int
    space: BMetricSpace

    @property
    def estimate(self) -> float:
        return float(self.iterates[-1])

    def __len__(self) -> int:
        return len(self.iterates)


@dataclass(frozen=True)
class RateReport:
    classification: str  # geometric, sublinear, converged-exact, inconclusive
    geometric_ratio: float | None = None
    sublinear_product: float | None = None


def picard_iterate(space: BMetricSpace, f: SelfMap, x0: float,
                   stop: StopCriteria | None = None, m: int = 1) -> PicardTrace:
    """Iterate f from x0 until a stop criterion fires.

    Stop reasons: ``exact-fixed-point`` when d(x0, f(x0)) = 0,
    ``step-converged`` when a step distance drops to step_tol,
    ``escaped`` when d(x0, x_n) exceeds the escape bound, else
    ``max-iters``.  An iterate leaving the domain raises
    DomainEscapeError; a non-finite value raises EvaluationError.
    """
    stop = stop if stop is not None else StopCriteria()
    if m < 1:
        raise ValidationError("window width m must be at least 1")
    if f.domain != space.domain:
        raise ValidationError("map domain and space domain differ")
    x0 = float(x0)
    if not np.isfinite(x0):
        raise ValidationError("x0 must be finite")
    if not space.domain.contains(x0):
        raise ValidationError(
            f"x0 = {format_float(x0)} is outside {space.domain.describe()}"
        )
    engine = get_engine()
    iterates, steps, reason = engine.picard_run(
        f.cexpr, space.metric.cexpr, space.domain.as_spec(),
        x0, stop.step_tol, stop.max_iters, stop.escape_bound,
    )
    if m > 1 and len(steps) >= m:
        windows = np.lib.stride_tricks.sliding_window_view(steps, m)
        window_maxes = windows.max(axis=1)
    else:
        window_maxes = np.zeros(0)
    return PicardTrace(
        iterates=iterates,
        step_dists=steps,
        window_maxes=window_maxes,
        stop_reason=reason,
        m=m,
        space=space,
    )


def _stable(values: np.ndarray) -> bool:
    if len(values) < 2:
        return False
    med = float(np.median(values))
    if not (np.isfinite(med) and med > 0):
        return False
    within = np.abs(values - med) <= STABLE_BAND * med
    return float(np.mean(within)) >= STABLE_FRACTION


def estimate_rate(trace: PicardTrace, alpha_hat: float | None = None) -> RateReport:
    """Classify the convergence of a trace toward ``alpha_hat``.

    ``alpha_hat`` defaults to the final iterate; pass the known fixed
    point instead when the decay is slow enough that the final iterate
    is a poor proxy for the limit.
    """
    if trace.stop_reason == "exact-fixed-point":
        return RateReport("converged-exact")
    n_total = len(trace.iterates)
    if n_total < MIN_RATE_ITERATES:
        raise TraceTooShortError(
            f"rate estimation needs at least {MIN_RATE_ITERATES} iterates, got {n_total}"
        )
    ah = trace.estimate if alpha_hat is None else float(alpha_hat)
    if not np.isfinite(ah):
        raise ValidationError("alpha_hat must be finite")
    idxs = np.arange(n_total // 2, n_total - 1)
    res = trace.space.distance_many(trace.iterates[idxs], np.full(len(idxs), ah))
    if not res.any():
        return RateReport("converged-exact")
    products = idxs * res
    if _stable(products):
        return RateReport("sublinear", sublinear_product=float(products[-1]))
    den = res[:-1]
    usable = den > 0
    if usable.any():
        ratios = res[1:][usable] / den[usable]
        if _stable(ratios):
            med = float(np.median(ratios))
            if med < 1.0:
                return RateReport("geometric", geometric_ratio=med)
    return RateReport("inconclusive")
