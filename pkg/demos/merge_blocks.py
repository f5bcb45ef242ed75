#!/usr/bin/env python3
"""Merging a family of high-density index sets into one density-1 set.

Inputs: A_j = integers not divisible by 2^j, so A_j has density exactly
1 - 2^-j, and A_j is only "valid" past N_j = 100 * 2^j. The merge picks block
edges M_1 < M_2 < ... with M_j growing fast enough that each block is sourced
from a deeper (denser) family member, and the union's density climbs toward 1.
"""

import numpy as np

from horolab.density import IndexSet, merge_subsequences, upper_density

HORIZON = 60_000

family = []
for j in range(1, 7):
    members = tuple(int(v) for v in np.arange(1, HORIZON + 1) if v % 2**j)
    family.append((IndexSet(members, HORIZON), 2.0**-j, 100 * 2**j))
    print("A_%d: density %.5f, valid past N=%d" % (j, len(members) / HORIZON, 100 * 2**j))

res = merge_subsequences(family)

print("\n j   block edge M_j   density of merged set on [1, M_j]")
for j, m_edge, dens in res.blocks:
    print("%2d %14d   %.5f  (target >= %.5f)" % (j, m_edge, dens, 1 - 2.0**-j - 3.0 / j))

print("\ncomplete: %s, achieved density %.5f" % (res.complete, res.achieved_density))
print("windowed upper density of the merged set: %.5f"
      % upper_density(res.points, burn_in_fraction=0.2))
