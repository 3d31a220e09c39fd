import numpy as np
import pytest

import fixedlab as fl
from fixedlab import (BMetricSpace, Domain, SelfMap, StopCriteria,
                      estimate_rate, picard_iterate)
from fixedlab.errors import (DomainEscapeError, TraceTooShortError,
                             ValidationError)
from fixedlab.sampling import splitmix64_uniform


UNIT = Domain.interval(0, 1)


def unit_space():
    return BMetricSpace(UNIT, fl.builtin_lookup("absdiff"), 1.0)


def logistic_space():
    f = fl.builtin_lookup("ex32")
    return BMetricSpace(f.domain, fl.builtin_lookup("absdiff"), 1.0), f


class TestPicardIterate:
    def test_piecewise_shrink_trace(self):
        tr = picard_iterate(unit_space(), fl.builtin_lookup("ex31"), 1.0,
                            StopCriteria(step_tol=1e-12), m=2)
        assert len(tr) == 22
        assert tr.stop_reason == "step-converged"
        assert tr.estimate == 1.8189894035458566e-13
        assert tr.iterates[0] == 1.0 and tr.iterates[1] == 0.2

    def test_step_dists_recompute(self):
        space = unit_space()
        tr = picard_iterate(space, fl.builtin_lookup("ex31"), 0.7,
                            StopCriteria(step_tol=1e-12))
        xs = tr.iterates
        expect = space.distance_many(xs[:-1], xs[1:])
        assert tr.step_dists.tolist() == expect.tolist()

    def test_window_maxes_slide_over_steps(self):
        tr = picard_iterate(unit_space(), fl.builtin_lookup("ex31"), 1.0,
                            StopCriteria(step_tol=1e-12), m=2)
        sd, wm = tr.step_dists, tr.window_maxes
        assert len(wm) == len(sd) - 1
        assert all(wm[i] == max(sd[i], sd[i + 1]) for i in range(len(wm)))

    def test_window_maxes_empty_for_plain_iteration(self):
        tr = picard_iterate(unit_space(), fl.builtin_lookup("ex31"), 1.0,
                            StopCriteria(step_tol=1e-12), m=1)
        assert len(tr.window_maxes) == 0

    @pytest.mark.parametrize("name,x0,n", [("ex31", 1.0, 20), ("ex32", 0.5, 100)])
    def test_window_maxes_never_increase(self, name, x0, n):
        f = fl.builtin_lookup(name)
        space = BMetricSpace(f.domain, fl.builtin_lookup("absdiff"), 1.0)
        tr = picard_iterate(space, f, x0, StopCriteria(step_tol=0.0, max_iters=n), m=2)
        wm = tr.window_maxes
        assert all(wm[i + 1] <= wm[i] for i in range(len(wm) - 1))

    def test_estimate_is_a_near_fixed_point(self):
        space = unit_space()
        f = fl.builtin_lookup("ex31")
        tr = picard_iterate(space, f, 1.0, StopCriteria(step_tol=1e-12))
        assert space.distance(tr.estimate, f(tr.estimate)) <= 10 * 1e-12

    def test_exact_fixed_point_stops_immediately(self):
        tr = picard_iterate(unit_space(), fl.builtin_lookup("ex31"), 0.0,
                            StopCriteria(step_tol=1e-12))
        assert len(tr) == 1
        assert tr.stop_reason == "exact-fixed-point"
        assert len(tr.step_dists) == 0

    def test_max_iters_stop(self):
        space, f = logistic_space()
        tr = picard_iterate(space, f, 0.5, StopCriteria(step_tol=0.0, max_iters=10 ** 4), m=2)
        assert tr.stop_reason == "max-iters"
        assert len(tr) == 10 ** 4 + 1
        assert tr.estimate == 9.989032659915622e-05

    def test_escape_bound_stop(self):
        dom = Domain.interval(0.0, 1e300)
        space = BMetricSpace(dom, fl.builtin_lookup("absdiff"), 1.0)
        g = SelfMap.from_expression("2*x + 1", dom)
        tr = picard_iterate(space, g, 1.0,
                            StopCriteria(step_tol=0.0, max_iters=10 ** 6, escape_bound=100.0))
        assert tr.stop_reason == "escaped"
        assert space.distance(1.0, tr.estimate) > 100.0

    def test_leaving_the_domain_raises(self):
        g = SelfMap.from_expression("x*2 + 0.125", UNIT)
        with pytest.raises(DomainEscapeError, match="left the domain"):
            picard_iterate(unit_space(), g, 0.5, StopCriteria(step_tol=0.0, max_iters=100))

    def test_start_outside_domain(self):
        with pytest.raises(ValidationError, match="outside"):
            picard_iterate(unit_space(), fl.builtin_lookup("ex31"), 1.5)

    def test_stop_criteria_validation(self):
        with pytest.raises(ValidationError):
            StopCriteria(step_tol=-1.0)
        with pytest.raises(ValidationError):
            StopCriteria(max_iters=0)
        with pytest.raises(ValidationError):
            StopCriteria(escape_bound=-5.0)


class TestEstimateRate:
    def test_geometric_for_piecewise_shrink(self):
        tr = picard_iterate(unit_space(), fl.builtin_lookup("ex31"), 1.0,
                            StopCriteria(step_tol=1e-12), m=2)
        rr = estimate_rate(tr)
        assert rr.classification == "geometric"
        assert rr.geometric_ratio == 0.24981684981684985
        assert rr.sublinear_product is None

    def test_sublinear_needs_the_true_limit(self):
        space, f = logistic_space()
        tr = picard_iterate(space, f, 0.5, StopCriteria(step_tol=0.0, max_iters=10 ** 4), m=2)
        rr = estimate_rate(tr, alpha_hat=0.0)
        assert rr.classification == "sublinear"
        assert abs(rr.sublinear_product - 1.0) < 0.01
        # measured against its own tail the same trace looks geometric
        assert estimate_rate(tr).classification == "geometric"

    def test_exact_fixed_point_short_circuits(self):
        tr = picard_iterate(unit_space(), fl.builtin_lookup("ex31"), 0.0)
        rr = estimate_rate(tr)
        assert rr.classification == "converged-exact"

    def test_oscillation_is_inconclusive(self):
        h = SelfMap.from_expression("1 - x", UNIT)
        tr = picard_iterate(unit_space(), h, 0.25, StopCriteria(step_tol=0.0, max_iters=64))
        assert estimate_rate(tr).classification == "inconclusive"

    def test_short_trace_rejected(self):
        tr = picard_iterate(unit_space(), fl.builtin_lookup("ex31"), 1.0,
                            StopCriteria(step_tol=0.0, max_iters=5))
        with pytest.raises(TraceTooShortError, match="at least 16"):
            estimate_rate(tr)

    def test_alpha_hat_must_be_finite(self):
        tr = picard_iterate(unit_space(), fl.builtin_lookup("ex31"), 1.0,
                            StopCriteria(step_tol=1e-12))
        with pytest.raises(ValidationError):
            estimate_rate(tr, alpha_hat=float("nan"))

    def test_fast_linear_ratio_recovered(self):
        f = SelfMap.from_expression("x/1024", UNIT)
        tr = picard_iterate(unit_space(), f, 1.0, StopCriteria(step_tol=0.0, max_iters=10 ** 4))
        rr = estimate_rate(tr, alpha_hat=0.0)
        assert rr.classification == "geometric"
        assert rr.geometric_ratio == 1.0 / 1024


class TestUniqueLimit:
    def test_seeded_starts_land_together(self):
        space = unit_space()
        f = fl.builtin_lookup("ex31")
        starts = splitmix64_uniform(11, 0, 8, 0.0, 1.0)
        ests = [picard_iterate(space, f, float(x0),
                               StopCriteria(step_tol=1e-12), m=2).estimate
                for x0 in starts]
        for a in ests:
            for b in ests:
                assert space.distance(a, b) <= 1e-10
