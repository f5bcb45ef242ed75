#!/usr/bin/env python3
"""Single-orbit equidistribution: discrepancy series and the good-length set.

One sparse orbit, one theta. Averages along the orbit prefix are compared to
Monte Carlo Haar integrals over a small dictionary of invariant functions;
the lengths N whose discrepancy falls under epsilon form a set whose windowed
upper density is the headline number.
"""

import numpy as np

from horolab.measures import (
    TestFunction,
    density_one_extraction,
    haar_reference,
    orbit_discrepancy_series,
)
from horolab.orbits import OrbitSpec, TimeSequence
from horolab.surface import reduce

EPS = 0.12

rng = np.random.default_rng(11)

# three interior bumps plus three height profiles; small on purpose so the
# Haar reference stays cheap
dictionary = (
    TestFunction(kind="distance-bump", center=reduce(0.0, 1.0, 0.0), width=0.55),
    TestFunction(kind="distance-bump", center=reduce(0.3, 1.4, 2.0), width=0.55),
    TestFunction(kind="distance-bump", center=reduce(-0.2, 2.2, 4.0), width=0.55),
    TestFunction(kind="height-profile", height_cutoffs=(2.0, 4.0)),
    TestFunction(kind="height-profile", height_cutoffs=(4.0, 8.0)),
    TestFunction(kind="height-profile", height_cutoffs=(8.0, 16.0)),
)

ref = haar_reference(dictionary, 30_000, rng)
print("haar reference (30k samples):")
for f, v, se in zip(ref.dictionary, ref.values, ref.std_errors):
    print("  %-14s %8.5f +- %.5f" % (f.kind, v, se))

spec = OrbitSpec(times=TimeSequence(kind="exponential", rate=0.08), theta=0.9, n_max=600)
series = orbit_discrepancy_series(spec, rng, dictionary=dictionary, haar_ref=ref)

print("\n    N      D_N    noise floor")
for k in range(0, len(series.checkpoints), 6):
    print("%6d  %7.4f  %7.4f" % (series.checkpoints[k], series.values[k], series.noise_floors[k]))
print("%6d  %7.4f  %7.4f" % (series.checkpoints[-1], series.values[-1], series.noise_floors[-1]))

ex = density_one_extraction(series, EPS, burn_in_fraction=0.2)
runs = ex.lengths.to_json_dict()["runs"]
print("\nlengths with D_N <= %.2f (as blocks): %s" % (EPS, runs))
print("windowed upper density: %.4f" % ex.upper_density)
