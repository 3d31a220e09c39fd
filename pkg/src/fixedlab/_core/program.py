"""Compilation of expression ASTs to evaluable forms.

Two targets share one source AST:

* a flat stack-machine program (``Program``) consumed by the vector
  kernels, compiled or pure Python;
* a tree of Python closures (``compile_scalar``) used for single-point
  evaluation and for re-running a failed batch element to produce an
  exact error message.

Both targets apply the same algebraic conventions so results agree bit
for bit: ``^``/``pow`` with a constant integer exponent in 0..4 becomes
a left-associated multiply chain, generic ``pow`` goes through libm,
``min``/``max`` select via a single ``<``/``>`` comparison, and only
add, sub, mul, div, pow and sqrt can flag an element as bad.
"""

from __future__ import annotations

import math

import numpy as np

from ..errors import EvaluationError
from ..expr import BinOp, Call, If, Neg, Node, Num, Var, describe_node, parse, to_source

__all__ = [
    "OP_CONST",
    "OP_X",
    "OP_Y",
    "OP_NEG",
    "OP_ADD",
    "OP_SUB",
    "OP_MUL",
    "OP_DIV",
    "OP_POW",
    "OP_POWI",
    "OP_ABS",
    "OP_SQRT",
    "OP_MIN",
    "OP_MAX",
    "OP_JMP",
    "OP_JF_LT",
    "OP_JF_LE",
    "OP_JF_GT",
    "OP_JF_GE",
    "Program",
    "compile_program",
    "compile_scalar",
    "const_int_exponent",
    "CompiledExpr",
]

OP_CONST = 0  # push consts[arg]
OP_X = 1
OP_Y = 2
OP_NEG = 3
OP_ADD = 4
OP_SUB = 5
OP_MUL = 6
OP_DIV = 7
OP_POW = 8
OP_POWI = 9  # arg = exponent in 0..4, left-chained multiplies
OP_ABS = 10
OP_SQRT = 11
OP_MIN = 12
OP_MAX = 13
OP_JMP = 14  # arg = target pc
OP_JF_LT = 15  # pop r, l; jump to arg unless l < r
OP_JF_LE = 16
OP_JF_GT = 17
OP_JF_GE = 18

_JF_FOR_CMP = {"<": OP_JF_LT, "<=": OP_JF_LE, ">": OP_JF_GT, ">=": OP_JF_GE}
POWI_MAX = 4


def const_int_exponent(node: Node):
    """Exponent value if ``node`` is a literal integer in 0..POWI_MAX, else None.

    This is the shared strength-reduction rule: every engine must treat
    ``v^2`` as ``v*v`` (and so on) or compiled and interpreted results
    could differ in the last bit.
    """
    if isinstance(node, Num):
        v = node.value
        if v == int(v) and 0 <= int(v) <= POWI_MAX:
            return int(v)
    return None


class Program:
    """Flat stack-machine form of an expression."""

    __slots__ = ("ops", "iargs", "consts", "stack_need", "arity")

    def __init__(self, ops, iargs, consts, stack_need, arity):
        self.ops = np.asarray(ops, dtype=np.int32)
        self.iargs = np.asarray(iargs, dtype=np.int32)
        self.consts = np.asarray(consts, dtype=np.float64)
        self.stack_need = int(stack_need)
        self.arity = int(arity)

    def __len__(self):
        return len(self.ops)


def compile_program(node: Node, arity: int) -> Program:
    ops: list[int] = []
    iargs: list[int] = []
    consts: list[float] = []

    def emit(op, arg=0):
        ops.append(op)
        iargs.append(arg)
        return len(ops) - 1

    def const_index(value: float) -> int:
        for i, c in enumerate(consts):
            if c == value and math.copysign(1.0, c) == math.copysign(1.0, value):
                return i
        consts.append(value)
        return len(consts) - 1

    def walk(n: Node):
        if isinstance(n, Num):
            emit(OP_CONST, const_index(n.value))
        elif isinstance(n, Var):
            emit(OP_X if n.name == "x" else OP_Y)
        elif isinstance(n, Neg):
            walk(n.operand)
            emit(OP_NEG)
        elif isinstance(n, BinOp):
            if n.op == "^":
                k = const_int_exponent(n.right)
                if k is not None:
                    walk(n.left)
                    emit(OP_POWI, k)
                    return
                walk(n.left)
                walk(n.right)
                emit(OP_POW)
                return
            walk(n.left)
            walk(n.right)
            emit({"+": OP_ADD, "-": OP_SUB, "*": OP_MUL, "/": OP_DIV}[n.op])
        elif isinstance(n, Call):
            if n.func == "pow":
                k = const_int_exponent(n.args[1])
                if k is not None:
                    walk(n.args[0])
                    emit(OP_POWI, k)
                    return
            for a in n.args:
                walk(a)
            emit({"abs": OP_ABS, "sqrt": OP_SQRT, "min": OP_MIN, "max": OP_MAX, "pow": OP_POW}[n.func])
        elif isinstance(n, If):
            walk(n.cond.left)
            walk(n.cond.right)
            jf = emit(_JF_FOR_CMP[n.cond.op])
            walk(n.then)
            jend = emit(OP_JMP)
            iargs[jf] = len(ops)
            walk(n.orelse)
            iargs[jend] = len(ops)
        else:  # pragma: no cover
            raise TypeError(f"unexpected node {n!r}")

    walk(node)

    # Worst-case stack depth by linear scan; jumps only ever skip code
    # whose net stack effect is +1 (a branch body), so a straight-line
    # simulation that treats JF as popping two and JMP as no-op, with the
    # else branch starting where the then branch started, is exact.
    depth = 0
    need = 0
    restore: dict[int, int] = {}
    for pc, (op, arg) in enumerate(zip(ops, iargs)):
        if pc in restore:
            depth = restore[pc]
        if op in (OP_CONST, OP_X, OP_Y):
            depth += 1
        elif op in (OP_ADD, OP_SUB, OP_MUL, OP_DIV, OP_POW, OP_MIN, OP_MAX):
            depth -= 1
        elif op in (OP_JF_LT, OP_JF_LE, OP_JF_GT, OP_JF_GE):
            depth -= 2
            restore[arg] = depth
        elif op == OP_JMP:
            restore[arg] = depth  # value the then branch pushed
            depth -= 1  # else branch re-pushes it
        need = max(need, depth)
    return Program(ops, iargs, consts, need, arity)


def _powi_scalar(v: float, k: int) -> float:
    if k == 0:
        return 1.0
    r = v
    for _ in range(k - 1):
        r = r * v
    return r


def compile_scalar(node: Node, arity: int):
    """Build a closure ``f(x, y) -> float`` that raises EvaluationError.

    Raised errors carry the failing node's operator and source offset, so
    a message like ``division by zero in '/' at offset 7`` points back at
    the expression text.
    """

    def build(n: Node):
        if isinstance(n, Num):
            v = n.value
            return lambda x, y: v
        if isinstance(n, Var):
            if n.name == "x":
                return lambda x, y: x
            return lambda x, y: y
        if isinstance(n, Neg):
            f = build(n.operand)
            return lambda x, y: -f(x, y)
        if isinstance(n, BinOp):
            return build_binop(n)
        if isinstance(n, Call):
            return build_call(n)
        if isinstance(n, If):
            fl = build(n.cond.left)
            fr = build(n.cond.right)
            ft = build(n.then)
            fe = build(n.orelse)
            op = n.cond.op
            if op == "<":
                return lambda x, y: ft(x, y) if fl(x, y) < fr(x, y) else fe(x, y)
            if op == "<=":
                return lambda x, y: ft(x, y) if fl(x, y) <= fr(x, y) else fe(x, y)
            if op == ">":
                return lambda x, y: ft(x, y) if fl(x, y) > fr(x, y) else fe(x, y)
            return lambda x, y: ft(x, y) if fl(x, y) >= fr(x, y) else fe(x, y)
        raise TypeError(f"unexpected node {n!r}")  # pragma: no cover

    def build_binop(n: BinOp):
        where = describe_node(n)
        if n.op == "^":
            return build_pow(n.left, n.right, where)
        fa = build(n.left)
        fb = build(n.right)
        if n.op == "+":
            def run(x, y):
                r = fa(x, y) + fb(x, y)
                if not math.isfinite(r):
                    raise EvaluationError(f"non-finite result from {where}")
                return r
        elif n.op == "-":
            def run(x, y):
                r = fa(x, y) - fb(x, y)
                if not math.isfinite(r):
                    raise EvaluationError(f"non-finite result from {where}")
                return r
        elif n.op == "*":
            def run(x, y):
                r = fa(x, y) * fb(x, y)
                if not math.isfinite(r):
                    raise EvaluationError(f"non-finite result from {where}")
                return r
        else:
            def run(x, y):
                b = fb(x, y)
                if b == 0.0:
                    raise EvaluationError(f"division by zero in {where}")
                r = fa(x, y) / b
                if not math.isfinite(r):
                    raise EvaluationError(f"non-finite result from {where}")
                return r
        return run

    def build_pow(base: Node, expo: Node, where: str):
        k = const_int_exponent(expo)
        fa = build(base)
        if k is not None:
            def run(x, y):
                r = _powi_scalar(fa(x, y), k)
                if not math.isfinite(r):
                    raise EvaluationError(f"non-finite result from {where}")
                return r
            return run
        fb = build(expo)

        def run(x, y):
            try:
                r = math.pow(fa(x, y), fb(x, y))
            except (ValueError, OverflowError) as exc:
                raise EvaluationError(f"math domain error in {where}") from exc
            if not math.isfinite(r):
                raise EvaluationError(f"non-finite result from {where}")
            return r
        return run

    def build_call(n: Call):
        where = describe_node(n)
        if n.func == "pow":
            return build_pow(n.args[0], n.args[1], where)
        if n.func == "abs":
            f = build(n.args[0])
            return lambda x, y: abs(f(x, y))
        if n.func == "sqrt":
            f = build(n.args[0])

            def run(x, y):
                try:
                    return math.sqrt(f(x, y))
                except ValueError as exc:
                    raise EvaluationError(f"math domain error in {where}") from exc
            return run
        fa = build(n.args[0])
        fb = build(n.args[1])
        if n.func == "min":
            def run(x, y):
                a = fa(x, y)
                b = fb(x, y)
                return b if b < a else a
        else:
            def run(x, y):
                a = fa(x, y)
                b = fb(x, y)
                return b if b > a else a
        return run

    return build(node)


class CompiledExpr:
    """An expression ready for evaluation, with lazily built backends."""

    __slots__ = ("ast", "arity", "label", "_scalar", "_program")

    def __init__(self, ast: Node, arity: int, label: str | None = None):
        self.ast = ast
        self.arity = arity
        self.label = label if label is not None else to_source(ast)
        self._scalar = None
        self._program = None

    @classmethod
    def from_source(cls, src: str, arity: int, label: str | None = None) -> "CompiledExpr":
        return cls(parse(src, arity), arity, label)

    @property
    def source(self) -> str:
        return to_source(self.ast)

    @property
    def scalar(self):
        if self._scalar is None:
            self._scalar = compile_scalar(self.ast, self.arity)
        return self._scalar

    @property
    def program(self) -> Program:
        if self._program is None:
            self._program = compile_program(self.ast, self.arity)
        return self._program

    def __call__(self, x: float, y: float | None = None) -> float:
        return self.scalar(float(x), None if y is None else float(y))

    def __repr__(self):
        return f"CompiledExpr({self.source!r}, arity={self.arity})"
