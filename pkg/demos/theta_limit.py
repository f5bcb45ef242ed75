#!/usr/bin/env python3
"""Tiny rotations conjugated to a fixed unipotent.

Conjugating the rotation by theta_n = arcsin(alpha / t_n^2) with the diagonal
element of scale sqrt(t_n^2 + 1) lands exactly alpha in the upper corner; all
other entries die at the t_n^-2 rate. Doubling t_n quarters the error, which
the ratio column makes visible. The same limit mechanism runs afterwards from
a generic diagonal sequence, where the limit is found rather than prescribed.
"""

import gmpy2

from horolab.groups import GroupElement, mul, rotation, prec_ctx
from horolab.ratner import TimeSequence, appendix_vn, example_theta_limit

ALPHA = 0.5
DOUBLING = TimeSequence(kind="exponential", rate=float(gmpy2.log(2)))

traj = example_theta_limit(ALPHA, DOUBLING, 12)

print("n    t_n        max |entry - u(%.1f)|   ratio to previous" % ALPHA)
prev = None
for n, g in enumerate(traj, start=1):
    m = g.to_float_array()
    err = max(abs(m[0][0] - 1), abs(m[0][1] - ALPHA), abs(m[1][0]), abs(m[1][1] - 1))
    line = "%-3d %9.1f   %17.3e" % (n, 2.0**n, err)
    if prev:
        line += "   %18.4f" % (err / prev)
    print(line)
    prev = err

# the same limit out of a plain diagonal sequence a_n = diag(e^n, e^-n),
# rotated a quarter turn first so the conjugates are not triangular on the way
with prec_ctx(192):
    quarter = rotation(gmpy2.mpfr(gmpy2.const_pi()) / 4, 192)
    g_seq = [
        mul(GroupElement(((gmpy2.exp(n), 0), (0, gmpy2.exp(-n))), 192), quarter)
        for n in range(1, 13)
    ]
exp = appendix_vn(g_seq)
m = exp.limit.to_float_array()
print("\ngeneric diagonal sequence: converged=%s, unipotent limit=%s" % (exp.converged_at is not None, exp.unipotent_ok))
print("limit = [%.6f %.6f; %.6f %.6f]" % (m[0][0], m[0][1], m[1][0], m[1][1]))
