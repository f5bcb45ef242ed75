#!/usr/bin/env python3
"""Completing nilpotents to sl2 triples, exactly, and reading off d.

Everything below runs on Fractions. verify() re-checks the three bracket
relations; the weight decomposition splits the adjoint representation into
irreducible strings, and the largest weight hit by a subalgebra determines
the polynomial degree d of Ad(exp(tX)) on it.
"""

from fractions import Fraction

from horolab.sl2 import (
    d_h_compute,
    decompose_adjoint,
    jacobson_morozov,
    matrix_to_strings,
)

X3 = ((0, 1, 0), (0, 0, 1), (0, 0, 0))  # regular nilpotent in sl3
MIN4 = tuple(
    tuple(1 if (i, j) == (0, 3) else 0 for j in range(4)) for i in range(4)
)  # minimal nilpotent in sl4

for name, x in (("sl3 regular", X3), ("sl4 minimal", MIN4)):
    triple = jacobson_morozov(x)
    assert triple.verify()
    decomp = decompose_adjoint(triple)
    dims = sorted(c.dimension for c in decomp.components)
    print("%s:" % name)
    print("  H = %s" % (matrix_to_strings(triple.h),))
    print("  Y = %s" % (matrix_to_strings(triple.y),))
    print("  adjoint splits into strings of dimensions %s (sum %d)" % (dims, sum(dims)))

# the rotation axis inside sl2: top weight 2, so averaging windows scale by t^2
t2 = jacobson_morozov(((0, 1), (0, 0)))
d2 = decompose_adjoint(t2)
so2 = [((0, 1), (-1, 0))]
print("\nd for so(2) inside sl2: %d" % d_h_compute(d2, so2))

# fractions in, fractions out: a rescaled nilpotent still verifies exactly
tr = jacobson_morozov(((0, Fraction(3, 7)), (0, 0)))
assert tr.verify()
print("X = 3/7 E completes to H = %s, Y = %s" % (matrix_to_strings(tr.h), matrix_to_strings(tr.y)))
