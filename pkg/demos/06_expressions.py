"""
Coefficient expressions
=======================

Drift and noise are written as small formulas in x.
"""
import numpy as np

from kemeny import eval_expression, parse_expression
from kemeny.errors import DomainError, ParseError

e = parse_expression("-x/2")
print(e, "at 4:", e(4.0))

# ^ groups to the right and binds tighter than unary minus
print("2^3^2 =", parse_expression("2^3^2")(0.0))
print("-x^2 at 3 =", parse_expression("-x^2")(3.0))

# arrays evaluate in one pass
f = parse_expression("exp(-x^2/2) / sqrt(2 * 3.141592653589793)")
print(eval_expression(f, np.linspace(-2, 2, 5)))

for src, x in [("1/x", 0.0), ("x^0.5", -1.0), ("log(x)", -3.0)]:
    try:
        parse_expression(src)(x)
    except DomainError as exc:
        print("domain error:", exc, " x =", exc.x)

for src in ["log(x", "2*y", "foo(x)", "x**2"]:
    try:
        parse_expression(src)
    except ParseError as exc:
        print(f"{src!r:10s} -> {exc}")
