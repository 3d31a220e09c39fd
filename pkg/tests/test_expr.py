import struct

import pytest

from fixedlab import CompiledExpr, format_float, parse, to_source
from fixedlab.errors import ExprSyntaxError, ValidationError
from fixedlab.expr import BinOp, Call, If, Neg, Num, Var

from parser_corpus import ERROR_CASES, EVAL_CASES, ROUNDTRIP_CASES


def bits(v: float) -> bytes:
    return struct.pack("<d", v)


@pytest.mark.parametrize("src,x,y,expected", EVAL_CASES)
def test_eval_case(src, x, y, expected):
    arity = 1 if y is None else 2
    cexpr = CompiledExpr.from_source(src, arity)
    got = cexpr(x) if y is None else cexpr(x, y)
    assert bits(got) == bits(expected), f"{src} -> {got!r}, wanted {expected!r}"


@pytest.mark.parametrize("src,canonical", ROUNDTRIP_CASES)
def test_roundtrip_case(src, canonical):
    ast = parse(src, arity=2)
    assert to_source(ast) == canonical
    # printing then reparsing must reproduce the same tree
    assert parse(canonical, arity=2) == ast


@pytest.mark.parametrize("src,offset,fragment", ERROR_CASES)
def test_error_case(src, offset, fragment):
    with pytest.raises(ExprSyntaxError) as info:
        parse(src, arity=1)
    assert info.value.offset == offset
    assert fragment in str(info.value)


def test_ast_shape_precedence():
    # 2+3*4 groups the product first
    ast = parse("2+3*4")
    assert ast == BinOp("+", Num(2.0), BinOp("*", Num(3.0), Num(4.0)))


def test_ast_shape_right_assoc_pow():
    ast = parse("2^3^2")
    assert ast == BinOp("^", Num(2.0), BinOp("^", Num(3.0), Num(2.0)))


def test_ast_shape_unary_inside_pow():
    # unary minus binds tighter than ^, so -2^2 is (-2)^2
    ast = parse("-2^2")
    assert ast == BinOp("^", Neg(Num(2.0)), Num(2.0))


def test_ast_shape_if():
    ast = parse("if(x<0.5, x/4, x/5)")
    assert isinstance(ast, If)
    assert ast.cond.op == "<"
    assert ast.then == BinOp("/", Var("x"), Num(4.0))


def test_offsets_ignored_in_equality():
    a = parse("x +  1")
    b = parse("x+1")
    assert a == b


def test_offsets_recorded():
    ast = parse("x + 10")
    assert isinstance(ast, BinOp)
    assert ast.right.offset == 5


def test_arity_two_allows_y():
    cexpr = CompiledExpr.from_source("x - y", 2)
    assert cexpr(0.5, 0.2) == 0.3


def test_arity_one_rejects_y():
    with pytest.raises(ExprSyntaxError):
        parse("x - y", arity=1)


def test_arity_validated():
    with pytest.raises(ValidationError):
        parse("x", arity=3)


def test_only_selected_branch_evaluated():
    # the untaken branch may divide by zero without raising
    cexpr = CompiledExpr.from_source("if(x<0.5, 1, 1/(x-x))", 1)
    assert cexpr(0.25) == 1.0


def test_call_nodes_print_with_known_arity():
    ast = parse("max(min(x, 1), 0)")
    assert isinstance(ast, Call)
    assert to_source(ast) == "max(min(x, 1), 0)"


def test_format_float():
    assert format_float(1.0) == "1"
    assert format_float(0.0) == "0"
    assert format_float(0.25) == "0.25"
    assert format_float(1e-9) == "1e-09"
    assert format_float(1.8189894035458566e-13) == "1.8189894035458566e-13"


def test_double_roundtrip_is_stable():
    for src, _, _, _ in EVAL_CASES:
        once = to_source(parse(src, arity=2))
        twice = to_source(parse(once, arity=2))
        assert once == twice
