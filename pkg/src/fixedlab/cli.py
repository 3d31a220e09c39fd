"""Command line front end.

Subcommands: ``certify`` tests a contraction condition on sampled pairs,
``solve`` runs Picard iteration with diagnostics, ``verify`` checks
metric axioms or comparison-function laws, and ``reproduce`` reruns a
packaged worked example and checks its expectations.

Exit codes are uniform across subcommands: 0 for success, 1 for a clean
negative result (condition refuted, axiom check failed, an expectation
missed, or an orbit that escaped), 2 for usage or evaluation errors.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from .catalog import builtin_lookup, is_builtin_name
from .certify import Certificate, SelfMap, certify_convex_contraction, certify_m_step
from .comparison import ComparisonFunction, verify_comparison
from .errors import FixedlabError, TraceTooShortError, UnknownBuiltinError, ValidationError
from .expr import format_float as fmt
from .sampling import PairSampler
from .solve import PicardTrace, RateReport, StopCriteria, estimate_rate, picard_iterate
from .space import (BMetricSpace, Domain, Metric, Tolerance, min_b_constant,
                    verify_axioms)


# ---------------------------------------------------------------------------
# argument resolution


def _parse_domain(text: str) -> Domain:
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != 2:
        raise ValidationError(f"--domain expects LO,HI, got {text!r}")
    try:
        lo, hi = float(parts[0]), float(parts[1])
    except ValueError:
        raise ValidationError(f"--domain expects two numbers, got {text!r}") from None
    return Domain.interval(lo, hi)


def _resolve_map(text: str, domain: Domain | None) -> SelfMap:
    if is_builtin_name(text):
        obj = builtin_lookup(text)
        if not isinstance(obj, SelfMap):
            raise ValidationError(f"builtin {text!r} is not a self-map")
        if domain is not None and domain != obj.domain:
            return SelfMap(obj.cexpr, domain, obj.label)
        return obj
    if domain is None:
        raise ValidationError("--domain LO,HI is required when --map is an expression")
    return SelfMap.from_expression(text, domain)


def _resolve_metric(text: str) -> Metric:
    if is_builtin_name(text):
        obj = builtin_lookup(text)
        if not isinstance(obj, Metric):
            raise ValidationError(f"builtin {text!r} is not a metric")
        return obj
    return Metric.from_expression(text)


def _resolve_phi(text: str) -> ComparisonFunction:
    if is_builtin_name(text):
        obj = builtin_lookup(text)
        if not isinstance(obj, ComparisonFunction):
            raise ValidationError(f"builtin {text!r} is not a comparison function")
        return obj
    return ComparisonFunction.from_expression(text)


# ---------------------------------------------------------------------------
# rendering


def _certificate_lines(cert: Certificate, space: BMetricSpace) -> list[str]:
    if cert.condition == "convex":
        a, b = cert.coefficients
        head = f"condition: convex (a={fmt(a)}, b={fmt(b)})"
    else:
        head = f"condition: m-step (m={cert.m})"
    lines = [head, f"map: {cert.map_label}"]
    if cert.phi_label is not None:
        lines.append(f"phi: {cert.phi_label}")
    lines += [
        f"metric: {space.metric.label}",
        f"s: {fmt(space.s)}",
        f"domain: {space.domain.describe()}",
        f"pairs tested: {cert.pairs_tested}",
        f"status: {cert.status}",
        f"violations: {cert.violations_found}",
    ]
    if cert.worst:
        lines.append(f"worst violations (showing {len(cert.worst)}):")
        for v in cert.worst:
            lines.append(
                f"  x={fmt(v.x)} y={fmt(v.y)} lhs={fmt(v.lhs)}"
                f" rhs={fmt(v.rhs)} margin={fmt(v.margin)}"
            )
    return lines


def _rate_text(rate: RateReport) -> str:
    if rate.classification == "geometric":
        return f"geometric (ratio {fmt(rate.geometric_ratio)})"
    if rate.classification == "sublinear":
        return f"sublinear (n*residual {fmt(rate.sublinear_product)})"
    return rate.classification


def write_trace_csv(trace: PicardTrace, path) -> None:
    """Write ``n,x,step,residual,window_max`` rows for every iterate.

    ``step`` is d(x_n, x_{n+1}) and is empty on the final row.
    ``residual`` is the distance from x_n to the final iterate.
    ``window_max`` is the running maximum of the next m step distances
    and is filled only when the trace carries window diagnostics.
    """
    xs = trace.iterates
    count = len(xs)
    residuals = trace.space.distance_many(xs, np.full(count, trace.estimate))
    steps = trace.step_dists
    maxes = trace.window_maxes
    with open(path, "w", encoding="ascii", newline="") as fh:
        fh.write("n,x,step,residual,window_max\n")
        for i in range(count):
            step = fmt(float(steps[i])) if i < len(steps) else ""
            wmax = fmt(float(maxes[i])) if i < len(maxes) else ""
            fh.write(f"{i},{fmt(float(xs[i]))},{step},{fmt(float(residuals[i]))},{wmax}\n")


def _write_lines(path: Path, lines) -> None:
    with open(path, "w", encoding="ascii", newline="") as fh:
        for line in lines:
            fh.write(line + "\n")


# ---------------------------------------------------------------------------
# subcommands


def cmd_certify(args) -> int:
    domain = _parse_domain(args.domain) if args.domain else None
    f = _resolve_map(args.map, domain)
    space = BMetricSpace(f.domain, _resolve_metric(args.metric), args.s)
    sampler = PairSampler(grid_points=args.grid, random_pairs=args.random_pairs,
                          seed=args.seed)
    tol = Tolerance(args.tol_abs, args.tol_rel)
    if args.convex:
        if args.phi is not None:
            raise ValidationError("--convex and --phi are mutually exclusive")
        if args.a is None or args.b is None:
            raise ValidationError("--convex needs both --a and --b")
        cert = certify_convex_contraction(space, f, args.a, args.b, sampler, tol)
    else:
        if args.a is not None or args.b is not None:
            raise ValidationError("--a and --b only apply with --convex")
        if args.phi is None:
            raise ValidationError("certify needs either --phi or --convex with --a/--b")
        cert = certify_m_step(space, f, _resolve_phi(args.phi), args.m, sampler, tol)
    for line in _certificate_lines(cert, space):
        print(line)
    return 0 if cert.certified else 1


def cmd_solve(args) -> int:
    domain = _parse_domain(args.domain) if args.domain else None
    f = _resolve_map(args.map, domain)
    space = BMetricSpace(f.domain, _resolve_metric(args.metric), args.s)
    stop = StopCriteria(step_tol=args.step_tol, max_iters=args.max_iters,
                        escape_bound=args.escape_bound)
    trace = picard_iterate(space, f, args.x0, stop, args.m)
    print(f"estimate: {fmt(trace.estimate)}")
    print(f"stop reason: {trace.stop_reason}")
    print(f"iterations: {len(trace) - 1}")
    try:
        rate = estimate_rate(trace, args.alpha_hat)
    except TraceTooShortError:
        print("rate: unavailable (trace too short)")
    else:
        print(f"rate: {_rate_text(rate)}")
    if args.trace:
        write_trace_csv(trace, args.trace)
    return 1 if trace.stop_reason == "escaped" else 0


def cmd_verify_metric(args) -> int:
    metric = _resolve_metric(args.metric)
    domain = _parse_domain(args.domain)
    space = BMetricSpace(domain, metric, args.s)
    sampler = PairSampler(grid_points=args.grid, random_pairs=args.random_triples,
                          seed=args.seed)
    report = verify_axioms(space, sampler, Tolerance(args.tol_abs, args.tol_rel))
    floor = min_b_constant(domain, metric, sampler)
    print(f"metric: {metric.label}")
    print(f"s: {fmt(space.s)}")
    print(f"domain: {domain.describe()}")
    print(f"samples tested: {report.samples_tested}")
    print(f"smallest workable s on these samples: {fmt(floor)}")
    if report.witnesses:
        print(f"witnesses (showing {len(report.witnesses)}):")
        for w in report.witnesses:
            pts = ", ".join(fmt(p) for p in w.points)
            print(f"  {w.axiom} ({pts}): lhs={fmt(w.lhs)} rhs={fmt(w.rhs)}")
    verdict = "pass" if report.passed else "fail"
    scope = "exhaustive" if report.exhaustive else "sampled"
    print(f"result: {verdict} ({scope})")
    return 0 if report.passed else 1


def cmd_verify_phi(args) -> int:
    phi = _resolve_phi(args.phi)
    report = verify_comparison(phi, iters=args.iters, decay_tol=args.decay_tol)
    print(f"phi: {phi.label}")
    print(f"monotone: {'ok' if report.monotone_ok else 'violated'}")
    print(f"subidentity: {'ok' if report.subidentity_ok else 'violated'}")
    worst = max(value for _, value in report.decay_achieved)
    print(f"decay after {report.iters} iterates: worst residual {fmt(worst)}"
          f" (tol {fmt(report.decay_tol)}, {'ok' if report.decay_ok else 'violated'})")
    if report.witnesses:
        print(f"witnesses (showing {len(report.witnesses)}):")
        for w in report.witnesses:
            ins = ", ".join(fmt(v) for v in w.inputs)
            outs = ", ".join(fmt(v) for v in w.values)
            print(f"  {w.law} at ({ins}): phi values ({outs})")
    print(f"result: {'pass' if report.passed else 'fail'}")
    return 0 if report.passed else 1


# ---------------------------------------------------------------------------
# reproduce


class _Checker:
    """Collects expectation lines and remembers which ones failed."""

    def __init__(self):
        self.lines = []
        self.failed = []

    def check(self, ok: bool, text: str) -> None:
        self.lines.append(f"[{'ok' if ok else 'FAIL'}] {text}")
        if not ok:
            self.failed.append(text)


def _reproduce_ex31(chk: _Checker, outdir: Path) -> None:
    f = builtin_lookup("ex31")
    space = BMetricSpace(f.domain, builtin_lookup("absdiff"), 1.0)
    phi = builtin_lookup("linear(0.25)")
    sampler = PairSampler(grid_points=2001, random_pairs=100000, seed=0)

    cert2 = certify_m_step(space, f, phi, 2, sampler)
    _write_lines(outdir / "certificate_m2.txt", _certificate_lines(cert2, space))
    chk.check(cert2.certified,
              f"two-step condition with {phi.label}: {cert2.status} over"
              f" {cert2.pairs_tested} pairs, {cert2.violations_found} violations")

    cert1 = certify_m_step(space, f, phi, 1, sampler)
    _write_lines(outdir / "certificate_m1.txt", _certificate_lines(cert1, space))
    if cert1.worst:
        v = cert1.worst[0]
        detail = f"worst margin {fmt(v.margin)} at x={fmt(v.x)} y={fmt(v.y)}"
    else:
        detail = "no violations"
    chk.check(cert1.status == "refuted",
              f"one-step condition with {phi.label}: {cert1.status}; {detail}")

    estimates = []
    stop = StopCriteria(step_tol=1e-12, max_iters=10 ** 6)
    for x0 in (1.0, 0.7, 0.3):
        trace = picard_iterate(space, f, x0, stop, m=2)
        write_trace_csv(trace, outdir / f"trace_x0_{fmt(x0)}.csv")
        estimates.append(trace.estimate)
        rate = estimate_rate(trace)
        ok = (trace.stop_reason == "step-converged"
              and rate.classification == "geometric"
              and abs(rate.geometric_ratio - 0.25) <= 0.01
              and abs(trace.estimate) < 1e-11)
        chk.check(ok, f"solve x0={fmt(x0)}: {trace.stop_reason} after"
                      f" {len(trace) - 1} steps, estimate {fmt(trace.estimate)},"
                      f" rate {_rate_text(rate)}")
    spread = max(estimates) - min(estimates)
    chk.check(spread <= 1e-10,
              f"the three estimates agree pairwise within 1e-10 (spread {fmt(spread)})")


def _reproduce_ex32(chk: _Checker, outdir: Path) -> None:
    f = builtin_lookup("ex32")
    space = BMetricSpace(f.domain, builtin_lookup("absdiff"), 1.0)
    grid_sampler = PairSampler(grid_points=2001)

    lines = []
    refuted = 0
    tried = 0
    for i in range(1, 9):
        for j in range(1, 9):
            if i + j >= 10:
                continue
            a, b = i / 10.0, j / 10.0
            cert = certify_convex_contraction(space, f, a, b, grid_sampler)
            tried += 1
            refuted += cert.status == "refuted"
            if cert.worst:
                v = cert.worst[0]
                detail = f"worst margin {fmt(v.margin)} at x={fmt(v.x)} y={fmt(v.y)}"
            else:
                detail = "no violations"
            lines.append(f"a={fmt(a)} b={fmt(b)}: {cert.status}, {detail}")
    _write_lines(outdir / "convex_refutations.txt", lines)
    chk.check(refuted == tried == 36,
              f"all {tried} coefficient pairs with a+b<1 refuted ({refuted} refuted)")

    phi = builtin_lookup("ex32phi")
    sampler = PairSampler(grid_points=2001, random_pairs=100000, seed=0)
    cert2 = certify_m_step(space, f, phi, 2, sampler)
    _write_lines(outdir / "certificate_m2.txt", _certificate_lines(cert2, space))
    chk.check(cert2.certified,
              f"two-step condition with {phi.label}: {cert2.status} over"
              f" {cert2.pairs_tested} pairs, {cert2.violations_found} violations")

    trace = picard_iterate(space, f, 0.5,
                           StopCriteria(step_tol=0.0, max_iters=10 ** 4), m=2)
    write_trace_csv(trace, outdir / "trace_x0_0.5.csv")
    rate = estimate_rate(trace, alpha_hat=0.0)
    product = 10 ** 4 * trace.estimate
    ok = (trace.stop_reason == "max-iters"
          and rate.classification == "sublinear"
          and abs(product - 1.0) < 0.01)
    chk.check(ok, f"solve x0=0.5: {trace.stop_reason} after {len(trace) - 1} steps,"
                  f" estimate {fmt(trace.estimate)}, rate {_rate_text(rate)},"
                  f" 10^4 * x_10000 = {fmt(product)}")


_EXPERIMENTS = {"ex31": _reproduce_ex31, "ex32": _reproduce_ex32}


def cmd_reproduce(args) -> int:
    runner = _EXPERIMENTS.get(args.name)
    if runner is None:
        raise UnknownBuiltinError(
            f"unknown experiment {args.name!r}; choose one of: "
            + ", ".join(sorted(_EXPERIMENTS)))
    outdir = Path(args.out) if args.out else Path(args.name)
    outdir.mkdir(parents=True, exist_ok=True)
    chk = _Checker()
    runner(chk, outdir)
    chk.lines.append(f"result: {'PASS' if not chk.failed else 'FAIL'}")
    _write_lines(outdir / "summary.txt", chk.lines)
    for line in chk.lines:
        print(line)
    if chk.failed:
        print(f"failed expectation: {chk.failed[0]}", file=sys.stderr)
        return 1
    return 0


# ---------------------------------------------------------------------------
# parser


def _add_space_flags(p) -> None:
    p.add_argument("--domain", help="closed interval LO,HI")
    p.add_argument("--metric", default="absdiff",
                   help="metric: builtin name or expression in x and y (default absdiff)")
    p.add_argument("--s", type=float, default=1.0,
                   help="relaxation constant of the triangle inequality (default 1)")


def _add_tol_flags(p) -> None:
    p.add_argument("--tol-abs", type=float, default=1e-12,
                   help="absolute comparison slack (default 1e-12)")
    p.add_argument("--tol-rel", type=float, default=1e-9,
                   help="relative comparison slack (default 1e-9)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fixedlab",
        description="Certify contraction conditions on b-metric spaces and "
                    "run Picard iteration with diagnostics.")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    pc = sub.add_parser("certify", help="test a contraction condition on sampled pairs")
    pc.add_argument("--map", required=True,
                    help="self-map: builtin name or expression in x")
    pc.add_argument("--phi", help="comparison function: builtin name or expression in x")
    pc.add_argument("--convex", action="store_true",
                    help="test the two-coefficient second-iterate condition instead")
    pc.add_argument("--a", type=float, help="first convex coefficient")
    pc.add_argument("--b", type=float, help="second convex coefficient")
    pc.add_argument("--m", type=int, default=1, help="window width (default 1)")
    _add_space_flags(pc)
    pc.add_argument("--grid", type=int, default=2001,
                    help="grid points across the domain (default 2001)")
    pc.add_argument("--random-pairs", type=int, default=0,
                    help="extra seeded random pairs (default 0)")
    pc.add_argument("--seed", type=int, default=0, help="random stream seed (default 0)")
    _add_tol_flags(pc)
    pc.set_defaults(func=cmd_certify)

    ps = sub.add_parser("solve", help="run Picard iteration with diagnostics")
    ps.add_argument("--map", required=True,
                    help="self-map: builtin name or expression in x")
    ps.add_argument("--x0", type=float, required=True, help="starting point")
    _add_space_flags(ps)
    ps.add_argument("--step-tol", type=float, default=1e-12,
                    help="stop once a step distance is at most this (default 1e-12)")
    ps.add_argument("--max-iters", type=int, default=10 ** 6,
                    help="iteration budget (default 1000000)")
    ps.add_argument("--escape-bound", type=float, default=1e12,
                    help="stop once d(x0, x_n) exceeds this (default 1e12)")
    ps.add_argument("--m", type=int, default=1,
                    help="window width for the window_max diagnostic (default 1)")
    ps.add_argument("--alpha-hat", type=float, default=None,
                    help="known fixed point for rate residuals (default: final iterate)")
    ps.add_argument("--trace", metavar="CSV", help="write the iterate trace to this file")
    ps.set_defaults(func=cmd_solve)

    pv = sub.add_parser("verify", help="check metric axioms or comparison-function laws")
    vsub = pv.add_subparsers(dest="target", required=True, metavar="TARGET")

    pvm = vsub.add_parser("metric", help="sample the b-metric axioms")
    pvm.add_argument("--metric", required=True,
                     help="metric: builtin name or expression in x and y")
    pvm.add_argument("--s", type=float, default=1.0,
                     help="relaxation constant to test (default 1)")
    pvm.add_argument("--domain", required=True, help="closed interval LO,HI")
    pvm.add_argument("--grid", type=int, default=101,
                     help="grid points across the domain (default 101)")
    pvm.add_argument("--random-triples", type=int, default=0,
                     help="extra seeded random triples (default 0)")
    pvm.add_argument("--seed", type=int, default=0,
                     help="random stream seed (default 0)")
    _add_tol_flags(pvm)
    pvm.set_defaults(func=cmd_verify_metric)

    pvp = vsub.add_parser("phi", help="check the comparison-function laws")
    pvp.add_argument("--phi", required=True,
                     help="comparison function: builtin name or expression in x")
    pvp.add_argument("--iters", type=int, default=256,
                     help="iterates per radius for the decay law (default 256)")
    pvp.add_argument("--decay-tol", type=float, default=1e-9,
                     help="required residual after the iterates (default 1e-9)")
    pvp.set_defaults(func=cmd_verify_phi)

    pr = sub.add_parser("reproduce",
                        help="rerun a packaged worked example and check expectations")
    pr.add_argument("name", metavar="NAME", help="ex31 or ex32")
    pr.add_argument("--out", metavar="DIR",
                    help="output directory (default: the example name)")
    pr.set_defaults(func=cmd_reproduce)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 2
    try:
        return args.func(args)
    except FixedlabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # uniform exit contract even for the unexpected
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
