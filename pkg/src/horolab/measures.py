"""Empirical measures on the quotient and their distance to Haar.

An orbit prefix defines the uniform probability measure on its points. We
watch such measures through a finite dictionary of test functions: the
empirical average of every dictionary function, compared against Monte
Carlo Haar references, gives a computable stand-in for weak-* distance.

Accumulators store each running sum as an exact integer (the function
values, which are float64 in [0, 1], are scaled by 2**1074 so every one of
them is integral). Merging shards is therefore associative and commutative
down to the last bit, which keeps parallel accumulation honest.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple, Sequence

import numpy as np

from .density import IndexSet, upper_density
from .errors import ConfigError
from .groups import GroupElement, mul, rotation, unipotent
from .precision import DEFAULT_PREC
from .surface import (
    FramePoint,
    TestFunction,
    haar_sample_batch,
    reduce,
    reduce_frame_matrix,
)

_SCALE_POW = 1074  # 2**-1074 is the smallest positive float64
_SCALE = 1 << _SCALE_POW
_TWO_53 = 1 << 53

CHECKPOINT_RATIO = 1.15


def _scaled(v: float) -> int:
    """v * 2**1074 as an exact integer, for float64 v in [0, 1]."""
    if not 0.0 <= v <= 1.0:
        raise ValueError("dictionary values must lie in [0, 1], got %r" % (v,))
    m, e = math.frexp(v)
    mant = int(m * _TWO_53)  # exact: m carries at most 53 significant bits
    shift = e - 53 + _SCALE_POW
    # shift only goes negative for subnormal v, whose mantissa has enough
    # trailing zeros that the right shift is still exact
    return mant << shift if shift >= 0 else mant >> (-shift)


def _unscaled(total: int, count: int) -> float:
    """total / (count * 2**1074), correctly rounded via Fraction."""
    return float(Fraction(total, count * _SCALE))


@dataclass(frozen=True)
class EmpiricalMeasure:
    """Uniform measure on `count` frame points, seen through a dictionary.

    sums[i] holds sum_n f_i(pt_n) scaled by 2**1074 as a Python int.
    """

    dictionary: tuple
    sums: tuple
    count: int

    def __post_init__(self):
        if not self.dictionary:
            raise ConfigError("dictionary must not be empty")
        if len(self.sums) != len(self.dictionary):
            raise ConfigError("one running sum per dictionary function")
        if self.count < 0:
            raise ConfigError("negative point count")

    @staticmethod
    def empty(dictionary: Sequence[TestFunction]) -> "EmpiricalMeasure":
        d = tuple(dictionary)
        return EmpiricalMeasure(d, (0,) * len(d), 0)

    def averages(self) -> np.ndarray:
        if self.count == 0:
            raise ConfigError("empty measure has no averages")
        return np.array([_unscaled(s, self.count) for s in self.sums])


def accumulate(measure: EmpiricalMeasure, pt: FramePoint) -> EmpiricalMeasure:
    """Return the measure with one more point folded in."""
    sums = tuple(
        s + _scaled(f.evaluate(pt)) for s, f in zip(measure.sums, measure.dictionary)
    )
    return EmpiricalMeasure(measure.dictionary, sums, measure.count + 1)


def accumulate_batch(measure: EmpiricalMeasure, x, y, theta) -> EmpiricalMeasure:
    """Fold in many points at once; bit-identical to repeated accumulate."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    theta = np.asarray(theta, dtype=float)
    if not (x.shape == y.shape == theta.shape):
        raise ConfigError("coordinate arrays must share a shape")
    sums = list(measure.sums)
    for i, f in enumerate(measure.dictionary):
        vals = f.evaluate_batch(x, y, theta)
        sums[i] += sum(_scaled(float(v)) for v in vals.ravel())
    return EmpiricalMeasure(measure.dictionary, tuple(sums), measure.count + x.size)


def merge(a: EmpiricalMeasure, b: EmpiricalMeasure) -> EmpiricalMeasure:
    if a.dictionary != b.dictionary:
        raise ConfigError("cannot merge measures over different dictionaries")
    sums = tuple(x + y for x, y in zip(a.sums, b.sums))
    return EmpiricalMeasure(a.dictionary, sums, a.count + b.count)


class HaarReference(NamedTuple):
    """Monte Carlo Haar integrals of a dictionary, with standard errors."""

    dictionary: tuple
    values: tuple
    std_errors: tuple
    n_samples: int


def haar_reference(
    dictionary: Sequence[TestFunction], n_samples: int, rng: np.random.Generator
) -> HaarReference:
    if n_samples < 2:
        raise ConfigError("need at least two samples for a standard error")
    x, y, theta = haar_sample_batch(rng, n_samples)
    values = []
    errs = []
    for f in dictionary:
        vals = f.evaluate_batch(x, y, theta)
        values.append(float(np.mean(vals)))
        errs.append(float(np.std(vals, ddof=1) / math.sqrt(n_samples)))
    return HaarReference(tuple(dictionary), tuple(values), tuple(errs), n_samples)


def per_function_deviations(
    measure: EmpiricalMeasure, haar_ref: HaarReference
) -> np.ndarray:
    if measure.dictionary != tuple(haar_ref.dictionary):
        raise ConfigError("haar reference was computed for a different dictionary")
    return np.abs(measure.averages() - np.asarray(haar_ref.values))


def discrepancy(measure: EmpiricalMeasure, haar_ref: HaarReference) -> float:
    """max over the dictionary of |empirical average - Haar reference|."""
    return float(np.max(per_function_deviations(measure, haar_ref)))


def default_dictionary(
    seed: int = 0, precision_bits: int = DEFAULT_PREC
) -> tuple:
    """Twelve width-0.3 distance bumps at pseudo-random low-height centers
    plus four height profiles with lower cutoffs 2, 4, 8, 16.

    The bumps see clumping in the thick part; the height profiles see mass
    escaping to the cusp. Both families are invariant under the lattice by
    construction. The centers are Haar draws conditioned on height at most
    2, so the default is deterministic in `seed`.
    """
    rng = np.random.default_rng(seed)
    funcs = []
    while len(funcs) < 12:
        xs, ys, ths = haar_sample_batch(rng, 32)
        for xi, yi, ti in zip(xs, ys, ths):
            if yi <= 2.0 and len(funcs) < 12:
                center = reduce(float(xi), float(yi), float(ti), precision_bits)
                funcs.append(
                    TestFunction(kind="distance-bump", center=center, width=0.3)
                )
    for lo in (2.0, 4.0, 8.0, 16.0):
        funcs.append(TestFunction(kind="height-profile", height_cutoffs=(lo, 2 * lo)))
    return tuple(funcs)


def dictionary_sha256(dictionary: Sequence[TestFunction]) -> str:
    payload = json.dumps(
        [f.to_json_dict() for f in dictionary], sort_keys=True, separators=(",", ":")
    )
    return hashlib.sha256(payload.encode("ascii")).hexdigest()


def checkpoint_grid(n_max: int, ratio: float = CHECKPOINT_RATIO) -> tuple:
    """Geometric grid 1, 2, 3, ... with multiplicative steps, ending at n_max.

    Densities read off the grid are within one `ratio` factor of densities
    over all N, which is why per-N storage is unnecessary.
    """
    if n_max < 1:
        raise ConfigError("grid needs n_max >= 1")
    if not ratio > 1:
        raise ConfigError("grid ratio must exceed 1")
    out = []
    n = 1
    while n <= n_max:
        out.append(n)
        n = max(n + 1, int(math.ceil(n * ratio)))
    if out[-1] != n_max:
        out.append(n_max)
    return tuple(out)


@dataclass(frozen=True)
class DiscrepancySeries:
    """D_N along a checkpoint grid, with per-function deviations.

    noise_floors[k] is three times the largest combined standard error
    (empirical and Haar-reference, added in quadrature) at checkpoint k;
    a D_N below it is indistinguishable from zero at this sample size.
    """

    checkpoints: tuple
    values: tuple
    deviations: tuple
    noise_floors: tuple
    haar: HaarReference

    def __post_init__(self):
        k = len(self.checkpoints)
        if not (len(self.values) == len(self.deviations) == len(self.noise_floors) == k):
            raise ConfigError("series fields must have one entry per checkpoint")
        if any(v < 0 for v in self.values):
            raise ConfigError("discrepancies are nonnegative")

    def is_noise(self, k: int) -> bool:
        return self.values[k] <= self.noise_floors[k]

    def to_csv(self) -> str:
        names = ["f%02d" % (i + 1) for i in range(len(self.haar.dictionary))]
        lines = ["N,D_N," + ",".join("dev_" + s for s in names)]
        for k, n in enumerate(self.checkpoints):
            row = [str(n), repr(self.values[k])]
            row.extend(repr(d) for d in self.deviations[k])
            lines.append(",".join(row))
        return "\n".join(lines) + "\n"


def translated_measure_discrepancy(
    times,
    g0: GroupElement | None,
    n_max: int,
    m_theta: int,
    rng: np.random.Generator,
    dictionary: Sequence[TestFunction] | None = None,
    haar_ref: HaarReference | None = None,
    haar_samples: int = 200_000,
) -> DiscrepancySeries:
    """Discrepancy of circle averages pushed by u(t_n), along checkpoints.

    For each n the measure adds the M_theta points u(t_n) k_theta g0 with
    the same theta draws throughout, so checkpoint N averages the first
    N * M_theta points. Precision follows the time sequence's policy at
    n_max for the whole run.
    """
    from .orbits import OrbitSpec

    if n_max < 1 or m_theta < 1:
        raise ConfigError("need n_max >= 1 and m_theta >= 1")
    if dictionary is None:
        dictionary = default_dictionary()
    dictionary = tuple(dictionary)
    if haar_ref is None:
        haar_ref = haar_reference(dictionary, haar_samples, rng)
    if tuple(haar_ref.dictionary) != dictionary:
        raise ConfigError("haar reference was computed for a different dictionary")

    bits = OrbitSpec(times=times, n_max=n_max).policy_bits(n_max)
    thetas = rng.uniform(0.0, 2.0 * math.pi, size=m_theta)
    if g0 is None:
        tails = [rotation(th, bits) for th in thetas]
    else:
        lifted = GroupElement.from_rows(g0.entries, precision_bits=bits, normalize=False)
        tails = [mul(rotation(th, bits), lifted) for th in thetas]

    total = n_max * m_theta
    xs = np.empty(total)
    ys = np.empty(total)
    ths = np.empty(total)
    for n in range(1, n_max + 1):
        un = unipotent(times.value(n, bits), bits)
        base = (n - 1) * m_theta
        for j, tail in enumerate(tails):
            pt = reduce_frame_matrix(mul(un, tail).entries, bits)
            xs[base + j], ys[base + j], ths[base + j] = pt.as_floats()

    grid = checkpoint_grid(n_max)
    ends = np.array([n * m_theta for n in grid])
    dev_rows = np.empty((len(grid), len(dictionary)))
    se_rows = np.empty((len(grid), len(dictionary)))
    for i, f in enumerate(dictionary):
        vals = f.evaluate_batch(xs, ys, ths)
        cums = np.cumsum(vals)
        cums2 = np.cumsum(vals * vals)
        means = cums[ends - 1] / ends
        var = np.maximum(cums2[ends - 1] / ends - means * means, 0.0)
        emp_se = np.sqrt(var / ends)
        dev_rows[:, i] = np.abs(means - haar_ref.values[i])
        se_rows[:, i] = np.hypot(emp_se, haar_ref.std_errors[i])

    values = tuple(float(v) for v in dev_rows.max(axis=1))
    floors = tuple(float(3.0 * v) for v in se_rows.max(axis=1))
    deviations = tuple(tuple(float(d) for d in row) for row in dev_rows)
    return DiscrepancySeries(grid, values, deviations, floors, haar_ref)


def orbit_discrepancy_series(
    spec,
    rng: np.random.Generator,
    dictionary: Sequence[TestFunction] | None = None,
    haar_ref: HaarReference | None = None,
    haar_samples: int = 200_000,
) -> DiscrepancySeries:
    """Discrepancy of a single orbit prefix's running averages.

    Checkpoint N compares the empirical average of the first N points of
    orbit_prefix(spec, spec.n_max) against the Haar reference; the whole
    prefix is generated once at the n_max precision. rng only feeds the
    Haar reference when one is not supplied.
    """
    from .orbits import orbit_coordinate_arrays, orbit_prefix

    if dictionary is None:
        dictionary = default_dictionary()
    dictionary = tuple(dictionary)
    if haar_ref is None:
        haar_ref = haar_reference(dictionary, haar_samples, rng)
    if tuple(haar_ref.dictionary) != dictionary:
        raise ConfigError("haar reference was computed for a different dictionary")

    points = orbit_prefix(spec, spec.n_max)
    xs, ys, ths = orbit_coordinate_arrays(points)

    grid = checkpoint_grid(spec.n_max)
    ends = np.array(grid)
    dev_rows = np.empty((len(grid), len(dictionary)))
    se_rows = np.empty((len(grid), len(dictionary)))
    for i, f in enumerate(dictionary):
        vals = f.evaluate_batch(xs, ys, ths)
        cums = np.cumsum(vals)
        cums2 = np.cumsum(vals * vals)
        means = cums[ends - 1] / ends
        var = np.maximum(cums2[ends - 1] / ends - means * means, 0.0)
        emp_se = np.sqrt(var / ends)
        dev_rows[:, i] = np.abs(means - haar_ref.values[i])
        se_rows[:, i] = np.hypot(emp_se, haar_ref.std_errors[i])

    values = tuple(float(v) for v in dev_rows.max(axis=1))
    floors = tuple(float(3.0 * v) for v in se_rows.max(axis=1))
    deviations = tuple(tuple(float(d) for d in row) for row in dev_rows)
    return DiscrepancySeries(grid, values, deviations, floors, haar_ref)


class DefectDetail(NamedTuple):
    defect: float
    std_error: float


def unipotent_defect_detail(
    points: Sequence[FramePoint], f: TestFunction, s: float
) -> DefectDetail:
    """|avg f(pt) - avg f(u(s) pt)| with the paired-sample standard error.

    The shifted point u(s) pt is reduced after left multiplication at the
    point's own precision. Pairing keeps the error estimate tight because
    f(pt) and f(u(s) pt) are strongly correlated for small s.
    """
    if s < 0:
        raise ConfigError("shift must be nonnegative")
    if not points:
        raise ConfigError("need at least one point")
    if s == 0:
        return DefectDetail(0.0, 0.0)
    n = len(points)
    base = np.empty((3, n))
    moved = np.empty((3, n))
    for k, pt in enumerate(points):
        base[:, k] = pt.as_floats()
        bits = pt.precision_bits
        shifted = mul(
            unipotent(s, bits),
            GroupElement.from_rows(pt.matrix(), precision_bits=bits, normalize=False),
        )
        moved[:, k] = reduce_frame_matrix(shifted.entries, bits).as_floats()
    diffs = f.evaluate_batch(*base) - f.evaluate_batch(*moved)
    se = float(np.std(diffs, ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    return DefectDetail(float(abs(np.mean(diffs))), se)


def unipotent_defect(points: Sequence[FramePoint], f: TestFunction, s: float) -> float:
    return unipotent_defect_detail(points, f, s).defect


class ExtractionResult(NamedTuple):
    lengths: IndexSet
    upper_density: float


def density_one_extraction(
    series: DiscrepancySeries, eps: float, burn_in_fraction: float = 0.25
) -> ExtractionResult:
    """Average lengths N with D_N <= eps, read off the checkpoint grid.

    Membership of {N : D_N <= eps} is only observed at checkpoints; each
    qualifying checkpoint N_k stands for the whole block (N_{k-1}, N_k] of
    lengths it summarizes. The returned set is the union of those blocks,
    so its windowed upper density tracks the density of the full set up to
    one grid-ratio factor.
    """
    if not eps > 0:
        raise ConfigError("threshold must be positive")
    members = []
    prev = 0
    for n_k, v in zip(series.checkpoints, series.values):
        if v <= eps:
            members.extend(range(prev + 1, n_k + 1))
        prev = n_k
    idx = IndexSet(tuple(members), int(series.checkpoints[-1]))
    return ExtractionResult(idx, upper_density(idx, burn_in_fraction))


def experiment_manifest(
    kind: str,
    config: dict,
    seed,
    precision_bits: int,
    dictionary: Sequence[TestFunction],
) -> dict:
    """Reproducibility record: what ran, with which knobs, on which dictionary."""
    return {
        "experiment": kind,
        "config": config,
        "seed": seed,
        "precision_bits": precision_bits,
        "dictionary_sha256": dictionary_sha256(dictionary),
    }
