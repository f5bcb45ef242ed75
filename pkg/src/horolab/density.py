"""Integer-set densities, maximal-inequality verifiers, subsequence merging.

Everything here is finite combinatorics. The two maximal-inequality checks
run their averaging cores on exact rationals (Fraction), so an "ok" flag is
a statement about the actual inequality, not about float rounding. Density
values are exact counts divided by exact window lengths, reported as floats.

The limsup in the definition of upper density is replaced throughout by a
finite-horizon max over a burn-in window; every reported density carries
its horizon.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple

import numpy as np


@dataclass(frozen=True)
class IndexSet:
    """Sorted distinct positive integers, all at most `horizon`."""

    members: tuple
    horizon: int

    def __post_init__(self):
        if self.horizon < 1:
            raise ValueError("horizon must be at least 1")
        prev = 0
        for m in self.members:
            if m <= prev:
                raise ValueError("members must be strictly increasing positive integers")
            prev = m
        if self.members and self.members[-1] > self.horizon:
            raise ValueError("members exceed horizon")

    @staticmethod
    def from_array(arr, horizon: int) -> "IndexSet":
        vals = sorted({int(v) for v in np.asarray(arr).ravel()})
        return IndexSet(tuple(vals), int(horizon))

    def count_upto(self, n: int) -> int:
        return bisect_right(self.members, n)

    def density_at(self, n: int) -> float:
        return self.count_upto(n) / n

    def to_json_dict(self) -> dict:
        runs = []
        for m in self.members:
            if runs and m == runs[-1][1] + 1:
                runs[-1][1] = m
            else:
                runs.append([m, m])
        return {"horizon": self.horizon, "runs": runs}

    @staticmethod
    def from_json_dict(d: dict) -> "IndexSet":
        members = []
        for lo, hi in d["runs"]:
            members.extend(range(int(lo), int(hi) + 1))
        return IndexSet(tuple(members), int(d["horizon"]))


@dataclass(frozen=True)
class FiniteSignal:
    """Finitely supported function on the integers: values on
    [start, start + len(values))."""

    start: int
    values: tuple

    def l1_norm(self) -> Fraction:
        return sum((abs(Fraction(v)) for v in self.values), Fraction(0))

    def value(self, i: int) -> Fraction:
        k = i - self.start
        if 0 <= k < len(self.values):
            return Fraction(self.values[k])
        return Fraction(0)


def upper_density(a: IndexSet, burn_in_fraction: float) -> float:
    """max over N in [burn_in * horizon, horizon] of #(A n [1, N]) / N."""
    if not 0 <= burn_in_fraction < 1:
        raise ValueError("burn-in fraction must be in [0, 1)")
    h = a.horizon
    lo = max(1, int(math.ceil(burn_in_fraction * h)))
    ns = np.arange(lo, h + 1, dtype=np.int64)
    counts = np.searchsorted(np.asarray(a.members, dtype=np.int64), ns, side="right")
    return float(np.max(counts / ns))


class ShiftMaximalResult(NamedTuple):
    e_alpha: tuple
    lhs: float
    rhs: float
    ok: bool


def shift_maximal_check(phi: FiniteSignal, alpha) -> ShiftMaximalResult:
    """Exceptional set of the shift maximal function, checked exactly.

    phi*(a) = sup over N >= 1 of |(1/N) sum_{i<N} phi(a + i)|. The sup is
    attained among the finitely many windows that still intersect the
    support, and phi*(a) <= ||phi||_1 / (gap to the support), so only
    finitely many a can exceed alpha. Everything runs on Fractions; the
    verdict compares alpha * |E_alpha| against 3 ||phi||_1 exactly.
    """
    alpha = Fraction(alpha)
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    norm = phi.l1_norm()
    if norm == 0:
        return ShiftMaximalResult((), 0.0, float(3 * norm), True)
    support_lo = phi.start
    support_hi = phi.start + len(phi.values) - 1
    # below a_min the first nonzero window already averages below alpha
    a_min = support_lo - int(norm / alpha) - 2
    exceptional = []
    for a in range(a_min, support_hi + 1):
        total = Fraction(0)
        best = Fraction(0)
        for n in range(1, support_hi - a + 2):
            total += phi.value(a + n - 1)
            avg = abs(total) / n
            if avg > best:
                best = avg
        if best > alpha:
            exceptional.append(a)
    lhs = alpha * len(exceptional)
    rhs = 3 * norm
    return ShiftMaximalResult(tuple(exceptional), float(lhs), float(rhs), lhs <= rhs)


class MaximalInequalityResult(NamedTuple):
    j_n: int
    nu_mass: float
    bound: float
    sampling_slack: float
    ok: bool


def maximal_e_set(orbit_values: np.ndarray, alpha: float, n_avg: int, j: int) -> np.ndarray:
    """Boolean mask of samples whose windowed maximal average exceeds alpha.

    orbit_values has one row per sample; the window starts at column j and
    averages run over M = 1..n_avg.
    """
    vals = np.asarray(orbit_values, dtype=float)
    window = vals[:, j : j + n_avg]
    sums = np.cumsum(window, axis=1)
    avgs = np.abs(sums) / np.arange(1, n_avg + 1)
    return np.max(avgs, axis=1) > alpha


def maximal_inequality_check(
    orbit_values, alpha: float, beta: float, n_avg: int, psi_l1_mu: float
) -> MaximalInequalityResult:
    """Weak-type maximal inequality over shifted windows.

    For each shift j in [0, beta N) the exceptional set collects samples
    whose running averages over the window starting at j exceed alpha
    somewhere up to length N. Returns the best (smallest-mass) shift and
    compares against 12 ||psi||_L1 / (alpha beta). The nu-mass is an
    empirical fraction over the provided samples, so the verdict allows a
    3 / sqrt(#samples) sampling slack.
    """
    vals = np.asarray(orbit_values, dtype=float)
    if vals.ndim != 2:
        raise ValueError("orbit_values must be a 2d array (samples x time)")
    if not 0 < beta < 1:
        raise ValueError("beta must be in (0, 1)")
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    n = int(n_avg)
    needed = (1 + beta) * n + 1
    if vals.shape[1] < needed - 1e-9:
        raise ValueError(
            "need orbit values of length at least (1+beta)N + 1 = %.1f, got %d"
            % (needed, vals.shape[1])
        )
    n_samples = vals.shape[0]
    j_count = int(math.ceil(beta * n))
    best_j = 0
    best_mass = math.inf
    for j in range(j_count):
        mass = float(np.mean(maximal_e_set(vals, alpha, n, j)))
        if mass < best_mass:
            best_mass = mass
            best_j = j
    bound = 12.0 * float(psi_l1_mu) / (alpha * beta)
    slack = 3.0 / math.sqrt(n_samples)
    return MaximalInequalityResult(
        best_j, best_mass, bound, slack, best_mass <= bound + slack
    )


class MergeResult(NamedTuple):
    points: IndexSet
    blocks: tuple  # (j, right edge M_j, merged density at M_j)
    achieved_density: float
    complete: bool


def merge_subsequences(family) -> MergeResult:
    """Merge good index sets along a lacunary block decomposition.

    family is a list of (A_j, epsilon_j, N_j) with epsilon_j nonincreasing:
    A_j is good at quality epsilon_j once the index passes N_j. Block edges
    M_1 < M_2 < ... are chosen greedily so that M_j is at least N_j, at
    least (j-1) M_{j-1} (the ratio condition), and A_j has captured enough
    density by M_j. Block j of the output copies A_j on (M_{j-1}, M_j].

    The construction makes the merged density at M_j at least
    1 - delta_j - 3/j for j >= 3, where delta_j is A_j's own end-horizon
    density deficit: everything A_j lost plus the entire foreign prefix
    (M_{j-1} indices at most, and M_{j-1} <= M_j / (j-1)).

    If the horizon runs out the merge is returned as built, flagged
    incomplete, with the density it actually achieved.
    """
    if not family:
        raise ValueError("need at least one subsequence")
    eps_prev = math.inf
    for _, eps, _ in family:
        if eps > eps_prev + 1e-15:
            raise ValueError("quality thresholds must be nonincreasing")
        eps_prev = eps
    horizon = min(a.horizon for a, _, _ in family)
    merged = []
    blocks = []
    m_prev = 0  # M_0: block j copies A_j on (M_{j-1}, M_j]
    complete = True
    for j, (a_j, _, n_j) in enumerate(family, 1):
        deficit = 1.0 - a_j.count_upto(horizon) / horizon
        capture = 1.0 - deficit - (1.0 / (j - 1) if j >= 2 else 1.0)
        lo = max(int(n_j), (j - 1) * m_prev if j >= 2 else 1, m_prev + 1)
        if lo > horizon:
            complete = False
            break
        ns = np.arange(lo, horizon + 1, dtype=np.int64)
        counts = np.searchsorted(np.asarray(a_j.members, dtype=np.int64), ns, side="right")
        good = counts / ns >= capture - 1e-12
        if not np.any(good):
            complete = False
            break
        m_j = int(ns[int(np.argmax(good))])
        start = bisect_right(a_j.members, m_prev)
        stop = bisect_right(a_j.members, m_j)
        merged.extend(a_j.members[start:stop])
        merged_arr = np.asarray(merged, dtype=np.int64)
        blocks.append((j, m_j, float(np.searchsorted(merged_arr, m_j, side="right") / m_j)))
        m_prev = m_j
    if not blocks:
        return MergeResult(IndexSet((), horizon), (), 0.0, False)
    points = IndexSet(tuple(merged), m_prev)
    achieved = blocks[-1][2]
    return MergeResult(points, tuple(blocks), achieved, complete)


def window_average(values, start: int, length: int) -> Fraction:
    """(1/length) sum of values[start .. start+length-1], exact; indices
    outside the array count as zero."""
    if length < 1:
        raise ValueError("window length must be positive")
    total = Fraction(0)
    for i in range(start, start + length):
        if 0 <= i < len(values):
            total += Fraction(values[i])
    return total / length


def average_of_average_defect(values, start: int, n_outer: int, m_inner: int):
    """Exact defect |A_N(A_M psi)(start) - A_N(psi)(start)| and its bound.

    Averaging an averaged signal only disturbs the plain average near the
    two ends of the outer window, which gives the bound 2 M ||psi||_inf / N.
    Returns (defect, bound) as exact Fractions.
    """
    inner = [window_average(values, k, m_inner) for k in range(start, start + n_outer)]
    lhs = sum(inner, Fraction(0)) / n_outer
    rhs = window_average(values, start, n_outer)
    sup = max((abs(Fraction(v)) for v in values), default=Fraction(0))
    bound = Fraction(2 * m_inner, n_outer) * sup
    return abs(lhs - rhs), bound
