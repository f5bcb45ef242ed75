#!/usr/bin/env python3
"""Sparse orbits at exponential times: precision budgeting and cusp visits.

t_n = e^(lambda n) means the raw translate u(t_n) k_theta has entries of size
t_n, so reducing it faithfully needs about log2(t_n) bits plus a guard. The
policy below allocates exactly that, which is why n_max = 120 at lambda = 0.5
(t_n up to e^60 ~ 1e26) is routine.
"""

import numpy as np

from horolab.orbits import (
    OrbitSpec,
    TimeSequence,
    exponential_policy,
    orbit_coordinate_arrays,
    orbit_prefix,
)

LAM = 0.5
N_MAX = 120

bits = exponential_policy(LAM, N_MAX)
print("precision policy for lambda=%.2f, n_max=%d: %d bits" % (LAM, N_MAX, bits))

spec = OrbitSpec(times=TimeSequence(kind="exponential", rate=LAM), theta=1.234, n_max=N_MAX)
points = orbit_prefix(spec, N_MAX)
x, y, theta = orbit_coordinate_arrays(points)

print("\nfirst five reduced points:")
for n in range(5):
    print("  n=%d  x=%+.6f  y=%.6f  theta=%.6f" % (n + 1, x[n], y[n], theta[n]))

print("\ncusp excursions (y > 10):")
for n in np.nonzero(y > 10.0)[0]:
    print("  n=%-4d t_n=%.3g  y=%.2f" % (n + 1, np.exp(LAM * (n + 1)), y[n]))

print("\nheight stats over %d points: median %.3f, max %.2f at n=%d"
      % (N_MAX, float(np.median(y)), float(y.max()), int(y.argmax()) + 1))
frac_low = float(np.mean(y < 2.0))
print("fraction of time below height 2: %.3f (invariant measure gives %.3f)"
      % (frac_low, 1.0 - (3.0 / np.pi) / 2.0))
