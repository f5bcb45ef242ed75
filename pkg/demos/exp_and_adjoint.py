#!/usr/bin/env python3
"""Matrix exponentials on sl(2) directions and the adjoint operator norm.

Three one-parameter subgroups (unipotent, diagonal, rotation) computed at 256
bits, then the t^2 growth of Ad(u_t) restricted to the rotation axis.
"""

from fractions import Fraction

from horolab.groups import (
    AlgebraElement,
    ad_operator_norm,
    exp_sl2,
    mul,
    unipotent,
)

BITS = 256

ROTATION_AXIS = AlgebraElement(((0, 1), (-1, 0)), BITS)  # E - F


def show(name, g):
    m = g.to_float_array()
    print("%-14s [%12.8f %12.8f; %12.8f %12.8f]" % (name, m[0][0], m[0][1], m[1][0], m[1][1]))


print("exp on the three standard directions")
show("exp(0.5 E)", exp_sl2(AlgebraElement(((0, Fraction(1, 2)), (0, 0)), BITS)))
show("exp(0.3 H)", exp_sl2(AlgebraElement(((Fraction(3, 10), 0), (0, Fraction(-3, 10))), BITS)))
show("exp(0.7(E-F))", exp_sl2(AlgebraElement(((0, Fraction(7, 10)), (Fraction(-7, 10), 0)), BITS)))

# one-parameter identity: exp(sX)exp(tX) = exp((s+t)X), checked at high precision
a = exp_sl2(AlgebraElement(((0, Fraction(1, 3)), (0, 0)), BITS))
b = exp_sl2(AlgebraElement(((0, Fraction(2, 3)), (0, 0)), BITS))
c = exp_sl2(AlgebraElement(((0, 1), (0, 0)), BITS))
prod = mul(a, b)
defect = max(
    abs(float(prod.entries[i][j]) - float(c.entries[i][j])) for i in range(2) for j in range(2)
)
print("\none-parameter identity defect: %.3e" % defect)

print("\nAd(u_t) restricted to the rotation axis grows like t^2:")
print("%10s %16s %12s" % ("t", "norm", "norm/t^2"))
for t in (10.0, 100.0, 1000.0, 10000.0):
    norm = float(ad_operator_norm(unipotent(t, BITS), [ROTATION_AXIS]))
    print("%10.0f %16.6g %12.6f" % (t, norm, norm / t**2))
