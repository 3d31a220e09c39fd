"""Shared parser test corpus.

Three tables used by both the unit tests and the acceptance gate:
evaluation cases with exact binary64 expectations, round-trip cases
pinning the canonical printed form, and error cases pinning the
reported 1-based offset plus a fragment of the message.
"""

# (source, x, y or None, exact expected value)
EVAL_CASES = [
    ("2+3*4", 0.0, None, 14.0),
    ("(2+3)*4", 0.0, None, 20.0),
    ("2-3-4", 0.0, None, -5.0),
    ("24/4/2", 0.0, None, 3.0),
    ("2-(3-4)", 0.0, None, 3.0),
    ("2^3^2", 0.0, None, 512.0),
    ("(2^3)^2", 0.0, None, 64.0),
    ("-2^2", 0.0, None, 4.0),
    ("2^-1", 0.0, None, 0.5),
    ("--x", 7.0, None, 7.0),
    ("2*x + 1", 0.25, None, 1.5),
    ("x*y - y*x", 0.1, 0.3, 0.0),
    ("0.1 + 0.2", 0.0, None, 0.30000000000000004),
    ("pow(abs(x-y), 2)", 3.0, 4.0, 1.0),
    ("pow(2, 0.5)", 0.0, None, 2.0 ** 0.5),
    ("min(x, y)", 0.3, 0.2, 0.2),
    ("max(x, y)", 0.3, 0.2, 0.3),
    ("min(-0.0, 0.0)", 0.0, None, -0.0),  # single-comparison min keeps the first on ties
    ("sqrt(x)", 2.25, None, 1.5),
    ("abs(-x)", 0.5, None, 0.5),
    ("x^0", 0.0, None, 1.0),
    ("x^3", -2.0, None, -8.0),
    ("if(x<0.5, 1, 2)", 0.5, None, 2.0),
    ("if(x<=0.5, 1, 2)", 0.5, None, 1.0),
    ("if(x>0.5, 1, 2)", 0.5, None, 2.0),
    ("if(x>=0.5, 1, 2)", 0.5, None, 1.0),
    ("if(x<0.5, x/4, x/5)", 0.5, None, 0.1),
    ("if(x<0.5, x/4, x/5)", 0.25, None, 0.0625),
    ("if(x-y<0, -1, 1)", 0.2, 0.3, -1.0),
]

# (source, canonical printed form)
ROUNDTRIP_CASES = [
    ("2 + 3 * 4", "2+3*4"),
    ("x - x ^ 2", "x-x^2"),
    ("(x)", "x"),
    ("-(x+1)", "-(x+1)"),
    ("x-(y+1)", "x-(y+1)"),
    ("(x-y)-1", "x-y-1"),
    ("x/(y*2)", "x/(y*2)"),
    ("(x/y)*2", "x/y*2"),
    ("(-2)^2", "-2^2"),
    ("x*-y", "x*-y"),
    ("(x+y)^2", "(x+y)^2"),
    ("2^(3^2)", "2^3^2"),
    ("pow( x , y )", "pow(x, y)"),
    ("if( x < 0.5 , x/4 , x/5 )", "if(x<0.5, x/4, x/5)"),
    ("2.50", "2.5"),
    ("1e3", "1000"),
    ("1e-9", "1e-09"),
    ("abs( - x )", "abs(-x)"),
]

# (source, 1-based error offset, fragment expected in the message)
ERROR_CASES = [
    ("", 1, "empty expression"),
    ("x/", 3, "expected a primary"),
    ("x +", 4, "expected a primary"),
    ("*x", 1, "expected a primary"),
    ("()", 2, "expected a primary"),
    ("(x", 3, "expected ')'"),
    ("x y", 3, "trailing input"),
    ("2 < 3", 3, "trailing input"),
    ("1..2", 2, "unexpected character"),
    ("min(x)", 1, "takes 2 arguments"),
    ("foo(1)", 1, "unknown identifier 'foo'"),
    ("y", 1, "variable 'y' is not allowed"),
    ("if(x, 1, 2)", 5, "comparison operator"),
    ("if(x<1, 1)", 10, "expected ','"),
    ("if(x<0.5, 1, 2, 3)", 15, "expected ')'"),
    ("1e999", 1, "overflows binary64"),
]

CASE_COUNT = len(EVAL_CASES) + len(ROUNDTRIP_CASES) + len(ERROR_CASES)
