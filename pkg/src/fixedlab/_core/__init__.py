"""Evaluation engines.

Two interchangeable engines drive every batch computation: a compiled
Cython bytecode interpreter and a pure Python numpy walker.  They are
written to the same arithmetic contract (see pykernels), so outputs are
identical bit for bit and everything downstream is engine-agnostic.

Selection: the compiled engine is used when its extension imported
cleanly, else the Python one.  ``FIXEDLAB_ENGINE=python|compiled|auto``
overrides, as does :func:`set_engine` (used by tests and benchmarks).
"""

from __future__ import annotations

import os

import numpy as np

from . import pykernels
from .program import CompiledExpr, Program, compile_program, compile_scalar

try:
    from . import cykernels
except ImportError:  # extension not built; pure Python install
    cykernels = None

__all__ = [
    "CompiledExpr",
    "Program",
    "compile_program",
    "compile_scalar",
    "available_engines",
    "engine_info",
    "get_engine",
    "set_engine",
]

_REASONS = ("exact-fixed-point", "step-converged", "escaped", "max-iters")


class PythonEngine:
    name = "python"
    compiled = False

    def eval_many(self, cexpr, xs, ys=None):
        return pykernels.eval_many(cexpr, xs, ys)

    def picard_run(self, f_cexpr, d_cexpr, domain_spec, x0, step_tol, max_iters, escape_bound):
        return pykernels.picard_run(
            f_cexpr, d_cexpr, domain_spec, x0, step_tol, max_iters, escape_bound
        )


class CompiledEngine:
    name = "compiled"
    compiled = True

    def eval_many(self, cexpr, xs, ys=None):
        xs = np.ascontiguousarray(xs, dtype=np.float64)
        n = xs.shape[0]
        has_y = ys is not None
        ys_arr = np.ascontiguousarray(ys, dtype=np.float64) if has_y else np.zeros(1)
        out = np.empty(n)
        bad = np.zeros(n, dtype=np.uint8)
        p = cexpr.program
        cykernels.eval_program(
            p.ops, p.iargs, p.consts, p.stack_need, xs, ys_arr, has_y, out, bad
        )
        return out, bad.view(bool)

    # Long runs go through the kernel in resumable segments so buffers
    # stay modest whatever max_iters is.
    _SEGMENT = 1 << 20

    def picard_run(self, f_cexpr, d_cexpr, domain_spec, x0, step_tol, max_iters, escape_bound):
        fp = f_cexpr.program
        dp = d_cexpr.program
        if domain_spec[0] == "interval":
            kind, lo, hi = 0, float(domain_spec[1]), float(domain_spec[2])
            pts = np.zeros(0)
        else:
            kind, lo, hi = 1, 0.0, 0.0
            pts = np.ascontiguousarray(domain_spec[3], dtype=np.float64)
        parts_it, parts_st = [], []
        remaining = int(max_iters)
        xn = float(x0)
        first = True
        while True:
            seg = min(remaining, self._SEGMENT)
            iterates = np.empty(seg + 1)
            steps = np.empty(seg)
            count, code, _ = cykernels.picard_program(
                fp.ops, fp.iargs, fp.consts, fp.stack_need,
                dp.ops, dp.iargs, dp.consts, dp.stack_need,
                kind, lo, hi, pts,
                xn, float(x0), first,
                float(step_tol), seg, float(escape_bound),
                iterates, steps,
            )
            if code >= 4:
                # Replay interpreted; identical arithmetic raises the
                # exact error with full context.
                pykernels.picard_run(
                    f_cexpr, d_cexpr, domain_spec, x0, step_tol, max_iters, escape_bound
                )
                raise RuntimeError(
                    "compiled and interpreted iteration disagree; this is a bug"
                )  # pragma: no cover
            parts_it.append(iterates[: count] if first else iterates[1:count])
            parts_st.append(steps[: count - 1])
            remaining -= seg
            if code != 3 or remaining == 0:
                reason = _REASONS[code]
                break
            xn = float(iterates[count - 1])
            first = False
        return np.concatenate(parts_it), np.concatenate(parts_st), reason


_ENGINES = {"python": PythonEngine()}
if cykernels is not None:
    _ENGINES["compiled"] = CompiledEngine()

_override: str | None = None


def available_engines() -> tuple:
    return tuple(sorted(_ENGINES))


def set_engine(name: str | None) -> None:
    """Force an engine by name; ``None`` or ``"auto"`` restores the default."""
    global _override
    if name is None or name == "auto":
        _override = None
        return
    if name not in _ENGINES:
        raise ValueError(
            f"unknown or unavailable engine {name!r}; available: {', '.join(available_engines())}"
        )
    _override = name


def get_engine():
    if _override is not None:
        return _ENGINES[_override]
    env = os.environ.get("FIXEDLAB_ENGINE", "auto")
    if env == "auto":
        return _ENGINES.get("compiled", _ENGINES["python"])
    if env not in _ENGINES:
        raise RuntimeError(
            f"FIXEDLAB_ENGINE={env!r} but available engines are: {', '.join(available_engines())}"
        )
    return _ENGINES[env]


def engine_info() -> dict:
    return {"active": get_engine().name, "available": available_engines()}


def raise_first_bad(cexpr, bad, xs, ys=None):
    """Replay the first flagged element through the scalar closure.

    The closure performs identical arithmetic, so it raises the same
    failure with an exact message (operator, offset, cause).  Reaching
    the end without an exception would mean the engines disagree.
    """
    idx = int(np.argmax(bad))
    x = float(np.asarray(xs)[idx])
    y = None if ys is None else float(np.asarray(ys)[idx])
    cexpr.scalar(x, y)
    raise RuntimeError(
        "batch evaluation flagged an element the scalar evaluator accepts; this is a bug"
    )  # pragma: no cover
