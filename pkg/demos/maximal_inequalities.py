#!/usr/bin/env python3
"""The two maximal inequalities, checked on concrete data.

First the shift maximal function of an l1 signal, computed exactly over all
effective windows (Fractions, no rounding): alpha * |E_alpha| never exceeds
3 * ||phi||_1. Then the weak-type inequality for ergodic averages of the
doubling map, with the constant-12 bound.
"""

from fractions import Fraction

import numpy as np
from scipy import integrate

from horolab.density import FiniteSignal, maximal_inequality_check, shift_maximal_check

# --- shift maximal -----------------------------------------------------

phi = FiniteSignal(start=-2, values=(Fraction(1, 2), 0, 2, Fraction(-3, 4), 1))
for alpha in ("0.25", "0.5", "1"):
    res = shift_maximal_check(phi, Fraction(alpha))
    print("alpha=%-5s |E|=%-3d  alpha|E|=%-8.4f 3||phi||_1=%.4f  ok=%s"
          % (alpha, len(res.e_alpha), res.lhs, res.rhs, res.ok))

rng = np.random.default_rng(3)
worst = 0.0
for _ in range(200):
    size = int(rng.integers(1, 25))
    vals = tuple(Fraction(int(v), 8) for v in rng.integers(-16, 17, size))
    sig = FiniteSignal(start=int(rng.integers(-10, 10)), values=vals)
    if sig.l1_norm() == 0:
        continue
    r = shift_maximal_check(sig, Fraction(int(rng.integers(1, 12)), 10))
    assert r.ok
    worst = max(worst, r.lhs / r.rhs)
print("200 random signals: worst alpha|E| / 3||phi||_1 = %.4f (theorem says <= 1)" % worst)

# --- weak type for the doubling map ------------------------------------


def psi(u):
    return np.exp(-((u - 0.5) ** 2) / 0.02) - 0.25


n_samples, alpha, beta, n_avg = 600, 0.5, 0.25, 256
length = int((1 + beta) * n_avg) + 2
cur = rng.uniform(0.0, 1.0, n_samples)
vals = np.empty((n_samples, length))
for k in range(length):
    vals[:, k] = psi(cur)
    cur = (2.0 * cur) % 1.0

psi_l1, _err = integrate.quad(lambda u: abs(float(psi(np.array(u)))), 0.0, 1.0)
res = maximal_inequality_check(vals, alpha, beta, n_avg, psi_l1)
print("\ndoubling map, %d starts, N=%d:" % (n_samples, n_avg))
print("  best window shift j = %d" % res.j_n)
print("  empirical mass of the exceptional set: %.4f" % res.nu_mass)
print("  12 ||psi||_1 / (alpha beta) = %.4f, sampling slack %.4f" % (res.bound, res.sampling_slack))
print("  ok = %s" % res.ok)
