#!/usr/bin/env python3
"""Decorrelation of the f_n observables and the law of large numbers.

f_n(theta) compares a test function at the n-th sparse translate against its
limit-unipotent stand-in. Pairs f_n f_m decorrelate like (d_m/d_n)^(1/2) in
the scale gap; summing N of them then obeys an L2 law of large numbers with
second moment decaying polynomially in N.
"""

import math

import numpy as np

from horolab.ratner import (
    TimeSequence,
    UnipotentSchedule,
    correlation_decay_experiment,
    lln_experiment,
)
from horolab.groups import AlgebraElement
from horolab.surface import TestFunction, reduce

schedule = UnipotentSchedule(
    times=TimeSequence(kind="exponential", rate=0.3),
    direction=AlgebraElement(((0, 1), (-1, 0)), 192),
)
phi = TestFunction(kind="distance-bump", center=reduce(0.0, 1.0, 0.0), width=0.5)
rng = np.random.default_rng(23)

pairs = [(6, 6), (10, 6), (14, 6), (18, 6)]
records = correlation_decay_experiment(phi, schedule, pairs, 120, rng)
print("pair (n,m)   E[f_n f_m]     std err     (d_m/d_n)^(1/2)")
for r in records:
    print(" (%2d,%2d)    %+.5f     %.5f     %.5f" % (r.n, r.m, r.estimate, r.std_error, r.ratio))

print("\nLLN: S_N = sum of the first N observables, N = k^4")
res = lln_experiment(phi, schedule, 4, rng.uniform(0.0, 2.0 * math.pi, 30))
med = res.median_abs()
print("  k    N     median |S_N/N|   E[(S_N/N)^2]")
for k in range(1, 5):
    n_val = res.n_grid[k - 1]
    print("%3d %5d   %12.5f   %12.6f" % (k, n_val, med[k - 1], res.second_moments[k - 1]))
if res.slope is not None:
    print("log-log slope of the second moment: %.3f" % res.slope)
