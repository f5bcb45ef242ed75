"""Sparse horocycle orbits and empirical measures on the modular surface.

The package is organized by capability:

* ``groups``: SL(n, R) arithmetic at explicit precision, decompositions,
  adjoint matrices and operator norms.
* ``sl2``: exact rational sl2-triple completion and weight decompositions.
* ``surface``: reduction to the fundamental domain, quotient metric,
  injectivity radius, Haar sampling, test functions.
* ``orbits``: sparse orbit prefixes u(t_n) k_theta g0 at adaptive precision.
* ``measures``: empirical measures, discrepancy series, translated-measure
  comparisons, density-one extraction.
* ``density``: shift-averaged maximal inequalities and subsequence merging.
* ``ratner``: conjugation-limit experiments, correlation decay, the LLN
  experiment, and ball overlap ratios.
* ``cli``: the ``horolab`` command line.
"""

from __future__ import annotations

from .errors import ConfigError, HorolabError, PrecisionExhausted, VerifierFailure

__all__ = [
    "ConfigError",
    "HorolabError",
    "PrecisionExhausted",
    "VerifierFailure",
    "__version__",
]

__version__ = "0.1.0"
