import numpy as np
import pytest

import fixedlab as fl
from fixedlab import (BMetricSpace, Domain, PairSampler, SelfMap,
                      certify_convex_contraction, certify_m_step, certify_pair,
                      monotone_M_check, orbit, window_max)
from fixedlab.errors import DomainEscapeError, ValidationError


UNIT = Domain.interval(0, 1)


def unit_space():
    return BMetricSpace(UNIT, fl.builtin_lookup("absdiff"), 1.0)


class TestOrbit:
    def test_piecewise_shrink_orbit(self):
        xs = orbit(fl.builtin_lookup("ex31"), 1.0, 3)
        assert xs.tolist() == [1.0, 0.2, 0.05, 0.0125]

    def test_zero_steps(self):
        xs = orbit(fl.builtin_lookup("ex31"), 0.7, 0)
        assert xs.tolist() == [0.7]

    def test_start_outside_domain(self):
        with pytest.raises(ValidationError, match="outside"):
            orbit(fl.builtin_lookup("ex31"), 2.0, 3)

    def test_escape_reports_source_step(self):
        g = SelfMap.from_expression("2*x", UNIT)
        with pytest.raises(DomainEscapeError) as info:
            orbit(g, 1.0, 3)
        assert info.value.step == 0
        assert "f(1) = 2" in str(info.value)


class TestWindowMax:
    def test_examples(self):
        space = unit_space()
        f = fl.builtin_lookup("ex31")
        assert window_max(space, f, 1.0, 0.0, 1) == 1.0
        assert window_max(space, f, 1.0, 0.0, 2) == 1.0
        assert window_max(space, f, 0.5, 0.0, 3) == 0.5

    def test_diagonal_distances_over_prefix_iterates(self):
        # window of width m takes d(f^i x, f^i y) for i = 0..m-1
        space = unit_space()
        f = SelfMap.from_expression("x/2", UNIT)
        assert window_max(space, f, 0.8, 0.9, 1) == space.distance(0.8, 0.9)
        expect = max(space.distance(0.8, 0.9), space.distance(0.4, 0.45))
        assert window_max(space, f, 0.8, 0.9, 2) == expect


class TestCertifyMStep:
    def test_two_step_window_certifies(self):
        cert = certify_m_step(unit_space(), fl.builtin_lookup("ex31"),
                              fl.builtin_lookup("linear(0.25)"), 2,
                              PairSampler(grid_points=101))
        assert cert.certified
        assert cert.status == "certified-on-samples"
        assert cert.condition == "m-step"
        assert cert.m == 2
        assert cert.map_label == "ex31"
        assert cert.phi_label == "linear(0.25)"
        assert cert.coefficients is None
        assert cert.violations_found == 0
        assert cert.worst == ()
        assert cert.pairs_tested == 101 * 102 // 2

    def test_one_step_window_refuted_across_the_seam(self):
        cert = certify_m_step(unit_space(), fl.builtin_lookup("ex31"),
                              fl.builtin_lookup("linear(0.25)"), 1,
                              PairSampler(grid_points=2001))
        assert not cert.certified
        assert cert.status == "refuted"
        worst = cert.worst[0]
        assert worst.x < 0.5 <= worst.y
        assert worst.margin >= 0.02

    def test_identity_map_refuted(self):
        cert = certify_m_step(unit_space(), SelfMap.from_expression("x", UNIT),
                              fl.builtin_lookup("linear(0.25)"), 1,
                              PairSampler(grid_points=5))
        assert not cert.certified
        assert cert.worst[0] == fl.Violation(x=0.0, y=1.0, lhs=1.0, rhs=0.25, margin=0.75)

    def test_worst_list_capped_and_sorted(self):
        cert = certify_m_step(unit_space(), SelfMap.from_expression("x", UNIT),
                              fl.builtin_lookup("linear(0.25)"), 1,
                              PairSampler(grid_points=101))
        assert cert.violations_found > 32
        assert len(cert.worst) == 32
        margins = [v.margin for v in cert.worst]
        assert margins == sorted(margins, reverse=True)

    def test_reported_margins_recompute_exactly(self):
        cert = certify_m_step(unit_space(), fl.builtin_lookup("ex31"),
                              fl.builtin_lookup("linear(0.25)"), 1,
                              PairSampler(grid_points=101))
        space = unit_space()
        f = fl.builtin_lookup("ex31")
        phi = fl.builtin_lookup("linear(0.25)")
        for v in cert.worst:
            again = certify_pair(space, f, phi, 1, v.x, v.y)
            assert again == v
            assert again.margin == again.lhs - again.rhs

    def test_finite_domain_is_exhaustive(self):
        pts = [0.0, 0.25, 1.0]
        space = BMetricSpace(Domain.finite(pts), fl.builtin_lookup("absdiff"), 1.0)
        f = SelfMap.from_expression("if(x<1, 0, 0.25)", Domain.finite(pts))
        cert = certify_m_step(space, f, fl.builtin_lookup("linear(0.5)"), 1)
        assert cert.status == "certified-exhaustive"
        assert cert.pairs_tested == 6

    def test_window_widens_monotonically(self):
        # once the window condition holds at width m it holds at every larger m
        space = unit_space()
        f = SelfMap.from_expression("x/2", UNIT)
        phi = fl.builtin_lookup("linear(0.5)")
        sampler = PairSampler(grid_points=51)
        for m in (1, 2, 3, 4):
            assert certify_m_step(space, f, phi, m, sampler).certified

    def test_deterministic(self):
        sampler = PairSampler(grid_points=101, random_pairs=500, seed=3)
        def go():
            return certify_m_step(unit_space(), fl.builtin_lookup("ex31"),
                                  fl.builtin_lookup("linear(0.25)"), 1, sampler)
        assert go() == go()

    def test_escaping_orbit_aborts_certification(self):
        f = SelfMap.from_expression("2*x", UNIT)
        with pytest.raises(DomainEscapeError):
            certify_m_step(unit_space(), f, fl.builtin_lookup("linear(0.5)"), 2,
                           PairSampler(grid_points=5))

    def test_m_must_be_positive(self):
        with pytest.raises(ValidationError, match="at least 1"):
            certify_m_step(unit_space(), fl.builtin_lookup("ex31"),
                           fl.builtin_lookup("linear(0.25)"), 0)


class TestCertifyConvex:
    def test_certificate_shape(self):
        cert = certify_convex_contraction(unit_space(), SelfMap.from_expression("x/2", UNIT),
                                          0.3, 0.3, PairSampler(grid_points=51))
        assert cert.condition == "convex"
        assert cert.m == 2
        assert cert.coefficients == (0.3, 0.3)
        assert cert.phi_label is None
        assert cert.certified

    def test_seam_refutes_piecewise_shrink(self):
        cert = certify_convex_contraction(unit_space(), fl.builtin_lookup("ex31"),
                                          0.1, 0.1, PairSampler(grid_points=51))
        assert not cert.certified
        worst = cert.worst[0]
        assert worst.x < 0.5 <= worst.y

    def test_logistic_shrink_refuted(self):
        f = fl.builtin_lookup("ex32")
        space = BMetricSpace(f.domain, fl.builtin_lookup("absdiff"), 1.0)
        cert = certify_convex_contraction(space, f, 0.4, 0.4,
                                          PairSampler(grid_points=101))
        assert not cert.certified
        assert cert.worst[0].margin > 0

    def test_coefficients_validated(self):
        with pytest.raises(ValidationError):
            certify_convex_contraction(unit_space(), fl.builtin_lookup("ex31"), 0.6, 0.5)


class TestMonotoneMCheck:
    def test_window_maxima_for_piecewise_shrink(self):
        rep = monotone_M_check(unit_space(), fl.builtin_lookup("ex31"),
                               1.0, 0.0, 2, 20)
        assert rep.monotone_ok
        assert rep.first_violation is None
        assert rep.window_maxes[:4] == (1.0, 0.2, 0.05, 0.0125)
        assert rep.final_distance == 7.275957614183426e-13

    def test_maxima_never_increase(self):
        f = fl.builtin_lookup("ex32")
        space = BMetricSpace(f.domain, fl.builtin_lookup("absdiff"), 1.0)
        rep = monotone_M_check(space, f, 0.5, 0.1, 2, 100)
        assert rep.monotone_ok
        ms = rep.window_maxes
        assert all(ms[i + 1] <= ms[i] for i in range(len(ms) - 1))

    def test_non_contractive_map_flags_first_rise(self):
        f = SelfMap.from_expression("1 - x", UNIT)
        rep = monotone_M_check(unit_space(), f, 0.0, 0.25, 1, 10)
        if not rep.monotone_ok:
            n = rep.first_violation
            assert rep.window_maxes[n + 1] > rep.window_maxes[n]
