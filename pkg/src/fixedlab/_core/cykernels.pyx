# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled evaluation kernels.

Same semantics as pykernels, instruction by instruction: powi as a
left-chained multiply, libm pow and sqrt, min/max via one comparison.
The extension is built with -ffp-contract=off so no multiply-add fusion
can change results relative to the interpreted engines.

An element that produces a non-finite intermediate is abandoned at that
instruction with its bad flag set; its output slot holds NaN.
"""

from libc.math cimport NAN, fabs, isfinite, pow, sqrt
from libc.stdint cimport int32_t, uint8_t

import numpy as np

DEF OP_CONST = 0
DEF OP_X = 1
DEF OP_Y = 2
DEF OP_NEG = 3
DEF OP_ADD = 4
DEF OP_SUB = 5
DEF OP_MUL = 6
DEF OP_DIV = 7
DEF OP_POW = 8
DEF OP_POWI = 9
DEF OP_ABS = 10
DEF OP_SQRT = 11
DEF OP_MIN = 12
DEF OP_MAX = 13
DEF OP_JMP = 14
DEF OP_JF_LT = 15
DEF OP_JF_LE = 16
DEF OP_JF_GT = 17
DEF OP_JF_GE = 18


cdef double _eval_one(const int32_t* ops, const int32_t* iargs, const double* consts,
                      int nops, double xv, double yv, double* stack, bint* okp) nogil:
    cdef int pc = 0, sp = 0, op, arg, j, k
    cdef double a, b, r
    while pc < nops:
        op = ops[pc]
        arg = iargs[pc]
        if op == OP_CONST:
            stack[sp] = consts[arg]
            sp += 1
        elif op == OP_X:
            stack[sp] = xv
            sp += 1
        elif op == OP_Y:
            stack[sp] = yv
            sp += 1
        elif op == OP_NEG:
            stack[sp - 1] = -stack[sp - 1]
        elif op == OP_ADD or op == OP_SUB or op == OP_MUL or op == OP_DIV:
            sp -= 1
            a = stack[sp - 1]
            b = stack[sp]
            if op == OP_ADD:
                r = a + b
            elif op == OP_SUB:
                r = a - b
            elif op == OP_MUL:
                r = a * b
            else:
                r = a / b
            if not isfinite(r):
                okp[0] = False
                return NAN
            stack[sp - 1] = r
        elif op == OP_POW:
            sp -= 1
            r = pow(stack[sp - 1], stack[sp])
            if not isfinite(r):
                okp[0] = False
                return NAN
            stack[sp - 1] = r
        elif op == OP_POWI:
            k = arg
            a = stack[sp - 1]
            if k == 0:
                r = 1.0
            else:
                r = a
                for j in range(k - 1):
                    r = r * a
            if not isfinite(r):
                okp[0] = False
                return NAN
            stack[sp - 1] = r
        elif op == OP_ABS:
            stack[sp - 1] = fabs(stack[sp - 1])
        elif op == OP_SQRT:
            r = sqrt(stack[sp - 1])
            if not isfinite(r):
                okp[0] = False
                return NAN
            stack[sp - 1] = r
        elif op == OP_MIN:
            sp -= 1
            a = stack[sp - 1]
            b = stack[sp]
            stack[sp - 1] = b if b < a else a
        elif op == OP_MAX:
            sp -= 1
            a = stack[sp - 1]
            b = stack[sp]
            stack[sp - 1] = b if b > a else a
        elif op == OP_JMP:
            pc = arg
            continue
        else:
            sp -= 2
            a = stack[sp]
            b = stack[sp + 1]
            if op == OP_JF_LT:
                if not a < b:
                    pc = arg
                    continue
            elif op == OP_JF_LE:
                if not a <= b:
                    pc = arg
                    continue
            elif op == OP_JF_GT:
                if not a > b:
                    pc = arg
                    continue
            else:
                if not a >= b:
                    pc = arg
                    continue
        pc += 1
    okp[0] = True
    return stack[0]


def eval_program(int32_t[::1] ops, int32_t[::1] iargs, double[::1] consts, int stack_need,
                 double[::1] xs, double[::1] ys, bint has_y,
                 double[::1] out, uint8_t[::1] bad):
    """Run one program over arrays, filling out and bad in place."""
    cdef Py_ssize_t n = xs.shape[0]
    cdef int nops = <int>ops.shape[0]
    scratch = np.empty(stack_need if stack_need > 0 else 1, dtype=np.float64)
    cdef double[::1] stack = scratch
    cdef const double* cptr = NULL
    if consts.shape[0] > 0:
        cptr = &consts[0]
    cdef Py_ssize_t i
    cdef double yv
    cdef bint ok
    with nogil:
        for i in range(n):
            if has_y:
                yv = ys[i]
            else:
                yv = 0.0
            out[i] = _eval_one(&ops[0], &iargs[0], cptr, nops, xs[i], yv, &stack[0], &ok)
            bad[i] = 0 if ok else 1


cdef bint _in_sorted(const double* pts, Py_ssize_t m, double v) nogil:
    cdef Py_ssize_t lo = 0, hi = m, mid
    while lo < hi:
        mid = (lo + hi) // 2
        if pts[mid] < v:
            lo = mid + 1
        else:
            hi = mid
    return lo < m and pts[lo] == v


# stop / error codes shared with the facade
DEF R_EXACT = 0
DEF R_CONVERGED = 1
DEF R_ESCAPED = 2
DEF R_MAX_ITERS = 3
DEF R_ERR_EVAL = 4
DEF R_ERR_DOMAIN = 5


def picard_program(int32_t[::1] f_ops, int32_t[::1] f_iargs, double[::1] f_consts, int f_stack,
                   int32_t[::1] d_ops, int32_t[::1] d_iargs, double[::1] d_consts, int d_stack,
                   int domain_kind, double lo, double hi, double[::1] points,
                   double x0, double anchor, bint allow_exact,
                   double step_tol, long long max_iters, double escape_bound,
                   double[::1] iterates, double[::1] steps):
    """Picard loop; returns (count, code, err_step).

    domain_kind 0 is the closed interval [lo, hi], 1 a sorted finite set.
    iterates/steps are caller buffers of length max_iters+1 / max_iters.
    ``anchor`` is the point the escape distance is measured from and
    ``allow_exact`` enables the step-0 exact-fixed-point test; both exist
    so a long run can be split into resumable segments.  On an error code
    the trace up to the failing step is preserved so the caller can
    replay it exactly.
    """
    cdef int f_nops = <int>f_ops.shape[0]
    cdef int d_nops = <int>d_ops.shape[0]
    f_scratch = np.empty(f_stack if f_stack > 0 else 1, dtype=np.float64)
    d_scratch = np.empty(d_stack if d_stack > 0 else 1, dtype=np.float64)
    cdef double[::1] fs = f_scratch
    cdef double[::1] ds = d_scratch
    cdef const double* fc = NULL
    cdef const double* dc = NULL
    if f_consts.shape[0] > 0:
        fc = &f_consts[0]
    if d_consts.shape[0] > 0:
        dc = &d_consts[0]
    cdef const double* pts = NULL
    cdef Py_ssize_t npts = points.shape[0]
    if npts > 0:
        pts = &points[0]

    cdef Py_ssize_t count = 1
    cdef long long nstep
    cdef long long err_step = -1
    cdef int code = R_MAX_ITERS
    cdef double xn = x0, x1, d0, de
    cdef bint ok
    iterates[0] = x0
    with nogil:
        for nstep in range(max_iters):
            x1 = _eval_one(&f_ops[0], &f_iargs[0], fc, f_nops, xn, 0.0, &fs[0], &ok)
            if not ok:
                code = R_ERR_EVAL
                err_step = nstep
                break
            if domain_kind == 0:
                if not (lo <= x1 <= hi):
                    code = R_ERR_DOMAIN
                    err_step = nstep
                    break
            else:
                if not _in_sorted(pts, npts, x1):
                    code = R_ERR_DOMAIN
                    err_step = nstep
                    break
            d0 = _eval_one(&d_ops[0], &d_iargs[0], dc, d_nops, xn, x1, &ds[0], &ok)
            if not ok or d0 < 0.0:
                code = R_ERR_EVAL
                err_step = nstep
                break
            if allow_exact and nstep == 0 and d0 == 0.0:
                code = R_EXACT
                break
            iterates[count] = x1
            steps[count - 1] = d0
            count += 1
            if d0 <= step_tol:
                code = R_CONVERGED
                break
            de = _eval_one(&d_ops[0], &d_iargs[0], dc, d_nops, anchor, x1, &ds[0], &ok)
            if not ok or de < 0.0:
                code = R_ERR_EVAL
                err_step = nstep
                break
            if de > escape_bound:
                code = R_ESCAPED
                break
            xn = x1
    return count, code, err_step
