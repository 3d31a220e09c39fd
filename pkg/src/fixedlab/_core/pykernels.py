"""Pure Python vector kernels.

``eval_many`` walks the AST with numpy arrays and an active-lane mask,
``picard_run`` is a plain Python iteration loop.  These are the fallback
when the compiled extension is unavailable and the reference the
extension is required to match bit for bit, so every arithmetic step
here deliberately mirrors the compiled kernel: the same powi multiply
chains, libm ``pow`` per element, and min/max via a single comparison.

Elements whose evaluation hits a non-finite intermediate are reported in
a boolean ``bad`` array; their output values are unspecified.  Callers
re-run the first bad element through the scalar closure to get an exact
error.
"""

from __future__ import annotations

import math

import numpy as np

from ..errors import DomainEscapeError, EvaluationError
from ..expr import BinOp, Call, If, Neg, Num, Var
from .program import const_int_exponent

__all__ = ["eval_many", "picard_run"]

_CHECKED_BINOPS = {"+", "-", "*", "/"}


def eval_many(cexpr, xs, ys=None):
    """Evaluate ``cexpr`` elementwise over ``xs`` (and ``ys`` if arity 2).

    Returns ``(out, bad)`` where ``out`` is float64 and ``bad`` marks
    elements that produced a non-finite intermediate anywhere in the
    tree.  Both branches of ``if`` are evaluated over the whole array,
    but an element is only flagged for trouble in the branch it selects.
    """
    xs = np.ascontiguousarray(xs, dtype=np.float64)
    if ys is not None:
        ys = np.ascontiguousarray(ys, dtype=np.float64)
    n = xs.shape[0]
    bad = np.zeros(n, dtype=bool)

    def flag(values, active):
        trouble = ~np.isfinite(values)
        if active is not None:
            trouble &= active
        bad[trouble] = True

    def walk(node, active):
        if isinstance(node, Num):
            return np.full(n, node.value)
        if isinstance(node, Var):
            return xs if node.name == "x" else ys
        if isinstance(node, Neg):
            return -walk(node.operand, active)
        if isinstance(node, BinOp):
            if node.op == "^":
                return pow_node(node.left, node.right, active)
            a = walk(node.left, active)
            b = walk(node.right, active)
            if node.op == "+":
                r = a + b
            elif node.op == "-":
                r = a - b
            elif node.op == "*":
                r = a * b
            else:
                r = a / b
            flag(r, active)
            return r
        if isinstance(node, Call):
            return call_node(node, active)
        if isinstance(node, If):
            lv = walk(node.cond.left, active)
            rv = walk(node.cond.right, active)
            op = node.cond.op
            if op == "<":
                cond = lv < rv
            elif op == "<=":
                cond = lv <= rv
            elif op == ">":
                cond = lv > rv
            else:
                cond = lv >= rv
            then_active = cond if active is None else active & cond
            else_active = ~cond if active is None else active & ~cond
            tv = walk(node.then, then_active)
            ev = walk(node.orelse, else_active)
            return np.where(cond, tv, ev)
        raise TypeError(f"unexpected node {node!r}")  # pragma: no cover

    def pow_node(base, expo, active):
        k = const_int_exponent(expo)
        v = walk(base, active)
        if k is not None:
            if k == 0:
                return np.ones(n)
            r = v.copy()
            for _ in range(k - 1):
                r = r * v
            flag(r, active)
            return r
        e = walk(expo, active)
        # libm pow per element so the result matches the scalar closure
        # and the compiled kernel exactly.
        r = np.full(n, np.nan)
        usable = np.isfinite(v) & np.isfinite(e)
        if active is not None:
            usable &= active
        for i in np.nonzero(usable)[0]:
            try:
                r[i] = math.pow(v[i], e[i])
            except (ValueError, OverflowError):
                pass
        flag(r, active)
        return r

    def call_node(node, active):
        if node.func == "pow":
            return pow_node(node.args[0], node.args[1], active)
        if node.func == "abs":
            return np.abs(walk(node.args[0], active))
        if node.func == "sqrt":
            r = np.sqrt(walk(node.args[0], active))
            flag(r, active)
            return r
        a = walk(node.args[0], active)
        b = walk(node.args[1], active)
        if node.func == "min":
            return np.where(b < a, b, a)
        return np.where(b > a, b, a)

    with np.errstate(all="ignore"):
        out = walk(cexpr.ast, None)
    if out.shape != (n,):  # constant expression broadcast
        out = np.broadcast_to(out, (n,)).copy()
    return out, bad


def _make_contains(domain_spec):
    kind = domain_spec[0]
    if kind == "interval":
        lo, hi = domain_spec[1], domain_spec[2]
        return lambda v: lo <= v <= hi
    pts = domain_spec[3]

    def contains(v):
        i = np.searchsorted(pts, v)
        return i < len(pts) and pts[i] == v

    return contains


def picard_run(f_cexpr, d_cexpr, domain_spec, x0, step_tol, max_iters, escape_bound):
    """Iterate ``x_{n+1} = f(x_n)`` from ``x0`` until a stop rule fires.

    Returns ``(iterates, step_dists, reason)`` with reason one of
    ``exact-fixed-point``, ``step-converged``, ``escaped``, ``max-iters``.
    Evaluation failures raise, a domain escape raises
    :class:`DomainEscapeError` whose ``step`` is the index of the iterate
    the map was applied to.
    """
    f = f_cexpr.scalar
    d = d_cexpr.scalar
    contains = _make_contains(domain_spec)
    iterates = [x0]
    steps = []
    reason = "max-iters"
    xn = x0
    for nstep in range(max_iters):
        x1 = f(xn, None)
        if not contains(x1):
            raise DomainEscapeError(
                f"orbit left the domain at step {nstep}: f({_fmt(xn)}) = {_fmt(x1)}",
                step=nstep,
                value=x1,
            )
        d0 = d(xn, x1)
        if d0 < 0.0:
            raise EvaluationError(
                f"metric returned a negative distance {_fmt(d0)} at step {nstep}"
            )
        if nstep == 0 and d0 == 0.0:
            return np.array([x0]), np.zeros(0), "exact-fixed-point"
        iterates.append(x1)
        steps.append(d0)
        if d0 <= step_tol:
            reason = "step-converged"
            break
        de = d(x0, x1)
        if de < 0.0:
            raise EvaluationError(
                f"metric returned a negative distance {_fmt(de)} at step {nstep}"
            )
        if de > escape_bound:
            reason = "escaped"
            break
        xn = x1
    return np.array(iterates), np.array(steps), reason


def _fmt(value):
    text = repr(float(value))
    return text[:-2] if text.endswith(".0") else text
