#!/usr/bin/env python3
"""Reduction into the fundamental domain along a sparse horocycle walk.

Each translate u(t_n) k_theta starts far outside the fundamental domain; the
Gauss loop pulls it back with a short word of T/S moves. Injectivity radius
shrinks whenever the walk climbs the cusp. Afterwards, a quick check of the
invariant sampler against the analytic height distribution.
"""

import math

import numpy as np

from horolab.orbits import OrbitSpec, TimeSequence, orbit_prefix
from horolab.surface import haar_sample_batch, injectivity_radius

spec = OrbitSpec(times=TimeSequence(kind="exponential", rate=0.45), theta=0.7, n_max=16)
points = orbit_prefix(spec, 16)

print("n      x        y      moves  inj_radius")
for n, pt in enumerate(points, start=1):
    x, y, _theta = pt.as_floats()
    word = "".join("%s%+d" % (letter, k) for letter, k in pt.word)
    print("%-3d %+7.4f %8.4f  %-5d %9.5f   %s" % (n, x, y, len(pt.word), injectivity_radius(pt), word[:28]))

# ---------------------------------------------------------------
# height marginal of the invariant measure: density is
#   (3/pi) * width(y) / y^2,  width(y) = 1 - 2 sqrt(max(0, 1 - y^2))
# (the domain pinches between the unit circles below y = 1)
# ---------------------------------------------------------------

rng = np.random.default_rng(7)
_x, ys, _th = haar_sample_batch(rng, 40_000)

edges = np.array([math.sqrt(3) / 2, 0.95, 1.0, 1.1, 1.25, 1.5, 2.0, 3.0, 5.0])


def marginal(y):
    width = 1.0 if y >= 1.0 else 1.0 - 2.0 * math.sqrt(1.0 - y * y)
    return (3.0 / math.pi) * width / (y * y)


print("\nheight bin         observed   expected")
for lo, hi in zip(edges[:-1], edges[1:]):
    obs = float(np.mean((ys >= lo) & (ys < hi)))
    # 200-step midpoint rule is plenty here
    grid = np.linspace(lo, hi, 201)
    mid = 0.5 * (grid[:-1] + grid[1:])
    exp_mass = float(np.sum([marginal(v) for v in mid]) * (hi - lo) / 200)
    print("[%5.3f, %5.3f)   %8.4f   %8.4f" % (lo, hi, obs, exp_mass))
tail = float(np.mean(ys >= edges[-1]))
print("[%5.3f,   inf)   %8.4f   %8.4f" % (edges[-1], tail, (3.0 / math.pi) / edges[-1]))
