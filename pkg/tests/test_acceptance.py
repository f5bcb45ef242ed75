"""Acceptance suite: one test per shipped claim, at the stated tolerance.

Run `pytest tests/test_acceptance.py -v` for one pass/fail line per
criterion. Each test enforces its own wall-clock budget; the statistical
checks state their sampling slack explicitly in the assertion.
"""

from __future__ import annotations

import math
import time

import numpy as np
from scipy import integrate, stats

from horolab.density import (
    FiniteSignal,
    IndexSet,
    maximal_inequality_check,
    merge_subsequences,
    shift_maximal_check,
)
from horolab.groups import AlgebraElement, ad_operator_norm, unipotent
from horolab.measures import (
    default_dictionary,
    density_one_extraction,
    haar_reference,
    orbit_discrepancy_series,
)
from horolab.orbits import OrbitSpec, TimeSequence, orbit_coordinate_arrays, orbit_prefix
from horolab.ratner import (
    UnipotentSchedule,
    ball_overlap_ratio,
    correlation_decay_experiment,
    correlation_fit,
    example_theta_limit,
    lln_experiment,
)
from horolab.sl2 import d_h_compute, decompose_adjoint, jacobson_morozov
from horolab.surface import TestFunction, haar_integral, haar_sample_batch, reduce


def e_minus_f():
    return AlgebraElement.from_rows(((0, 1), (-1, 0)), 192)


def base_bump(width=0.5):
    return TestFunction(kind="distance-bump", center=reduce(0.0, 1.0, 0.0), width=width)


def test_criterion_01_shift_maximal_inequality_fuzz():
    t0 = time.monotonic()
    rng = np.random.default_rng(101)
    for i in range(1000):
        size = int(rng.integers(1, 30))
        start = int(rng.integers(-20, 20))
        values = tuple(float(v) for v in np.round(rng.normal(size=size), 3))
        alpha = float(rng.uniform(0.1, 2.0))
        res = shift_maximal_check(FiniteSignal(start, values), alpha)
        assert res.ok, "violation at signal %d: lhs=%r rhs=%r" % (i, res.lhs, res.rhs)
    assert time.monotonic() - t0 < 10.0


def _doubling_psi(u):
    return np.exp(-((u - 0.5) ** 2) / 0.02) - 0.25


def test_criterion_02_weak_type_maximal_verifier():
    t0 = time.monotonic()
    rng = np.random.default_rng(102)

    n_samples, alpha, beta, n_avg = 1000, 0.5, 0.25, 512
    length = int((1 + beta) * n_avg) + 2
    cur = rng.uniform(0.0, 1.0, n_samples)
    vals = np.empty((n_samples, length))
    for k in range(length):
        vals[:, k] = _doubling_psi(cur)
        cur = (2.0 * cur) % 1.0
    psi_l1, _ = integrate.quad(lambda u: abs(float(_doubling_psi(np.array(u)))), 0.0, 1.0)
    doubling = maximal_inequality_check(vals, alpha, beta, n_avg, psi_l1)
    assert doubling.ok, "doubling map: mass %r > bound %r + slack %r" % (
        doubling.nu_mass,
        doubling.bound,
        doubling.sampling_slack,
    )

    m_theta, n_avg_h = 200, 256
    times = TimeSequence(kind="exponential", rate=0.1)
    phi = TestFunction(kind="height-profile", height_cutoffs=(4.0, 8.0))
    length_h = int((1 + beta) * n_avg_h) + 2
    thetas = rng.uniform(0.0, 2.0 * math.pi, m_theta)
    vals_h = np.empty((m_theta, length_h))
    for i, th in enumerate(thetas):
        spec = OrbitSpec(times=times, theta=float(th), n_max=length_h)
        x, y, t = orbit_coordinate_arrays(orbit_prefix(spec, length_h))
        vals_h[i] = phi.evaluate_batch(x, y, t)
    phi_l1, _se = haar_integral(phi, 200_000, rng)
    horocycle = maximal_inequality_check(vals_h, alpha, beta, n_avg_h, phi_l1)
    assert horocycle.ok, "horocycle: mass %r > bound %r + slack %r" % (
        horocycle.nu_mass,
        horocycle.bound,
        horocycle.sampling_slack,
    )
    assert time.monotonic() - t0 < 300.0


def test_criterion_03_unipotent_theta_limit():
    t0 = time.monotonic()
    doubling = TimeSequence(kind="exponential", rate=math.log(2.0))
    for alpha in (0.25, 0.5, 0.9):
        traj = example_theta_limit(alpha, doubling, 12)
        limit = np.array([[1.0, alpha], [0.0, 1.0]])
        errors = [float(np.max(np.abs(g.to_float_array() - limit))) for g in traj]
        assert errors[11] < 1e-6, "alpha=%r error at n=12 is %r" % (alpha, errors[11])
        for n in range(1, 12):
            ratio = errors[n] / errors[n - 1]
            assert 0.125 <= ratio <= 0.375, "alpha=%r ratio %r at n=%d" % (alpha, ratio, n + 1)
    assert time.monotonic() - t0 < 1.0


def _regular_nilpotent(n):
    return tuple(
        tuple(1 if j == i + 1 else 0 for j in range(n)) for i in range(n)
    )


def _minimal_nilpotent(n):
    return tuple(
        tuple(1 if (i, j) == (0, n - 1) else 0 for j in range(n)) for i in range(n)
    )


def test_criterion_04_jacobson_morozov_exactness():
    t0 = time.monotonic()
    for n in (2, 3, 4):
        for x in (_regular_nilpotent(n), _minimal_nilpotent(n)):
            triple = jacobson_morozov(x)
            assert triple.verify(), "bracket relations fail for n=%d, x=%r" % (n, x)
            decomp = decompose_adjoint(triple)
            total = sum(c.dimension for c in decomp.components)
            assert total == n * n - 1, "dims sum %d != %d" % (total, n * n - 1)
    sl2 = decompose_adjoint(jacobson_morozov(_regular_nilpotent(2)))
    assert d_h_compute(sl2, [((0, 1), (-1, 0))]) == 2
    assert time.monotonic() - t0 < 5.0


def test_criterion_05_adjoint_scale_law():
    t0 = time.monotonic()
    v = e_minus_f()
    for t in (10.0, 100.0, 1000.0, 10000.0):
        norm = float(ad_operator_norm(unipotent(t, 256), restrict_to=[v]))
        assert 0.25 <= norm / t**2 <= 4.0, "t=%r gives %r" % (t, norm / t**2)
    assert time.monotonic() - t0 < 1.0


def test_criterion_06_correlation_decay():
    t0 = time.monotonic()
    rng = np.random.default_rng(106)
    schedule = UnipotentSchedule(
        times=TimeSequence(kind="exponential", rate=0.3), direction=e_minus_f()
    )
    base = 6
    pairs = [(base, base)] + [(base + g, base) for g in (5, 10, 15)]
    records = correlation_decay_experiment(base_bump(), schedule, pairs, 400, rng)
    far = [r for r in records if r.n != r.m]
    slope, _used = correlation_fit(records)
    below_noise = all(abs(r.estimate) <= 3.0 * r.std_error for r in far)
    assert (slope is not None and slope >= 0.3) or below_noise, (
        "slope %r, far pairs %r"
        % (slope, [(r.n, r.estimate, r.std_error) for r in far])
    )
    assert time.monotonic() - t0 < 600.0


def test_criterion_07_law_of_large_numbers():
    t0 = time.monotonic()
    rng = np.random.default_rng(107)
    schedule = UnipotentSchedule(
        times=TimeSequence(kind="exponential", rate=0.3), direction=e_minus_f()
    )
    thetas = rng.uniform(0.0, 2.0 * math.pi, 100)
    res = lln_experiment(base_bump(), schedule, 6, thetas)
    med = res.median_abs()
    for k in range(2, 6):
        assert med[k] < med[k - 1], "median |S/N| not decreasing at k=%d: %r" % (
            k + 1,
            med,
        )
    assert res.slope is not None and res.slope <= -0.3, "second-moment slope %r" % (
        res.slope,
    )
    assert time.monotonic() - t0 < 600.0


def test_criterion_08_sparse_equidistribution_extraction():
    t0 = time.monotonic()
    rng = np.random.default_rng(108)
    dictionary = default_dictionary()
    ref = haar_reference(dictionary, 200_000, rng)
    times = TimeSequence(kind="exponential", rate=0.05)
    good = 0
    densities = []
    for _run in range(20):
        theta = float(rng.uniform(0.0, 2.0 * math.pi))
        spec = OrbitSpec(times=times, theta=theta, n_max=2000)
        series = orbit_discrepancy_series(spec, rng, dictionary=dictionary, haar_ref=ref)
        extraction = density_one_extraction(series, 0.1, burn_in_fraction=0.2)
        densities.append(extraction.upper_density)
        if extraction.upper_density >= 0.8:
            good += 1
    assert good >= 18, "only %d/20 runs reached density 0.8: %r" % (good, densities)
    assert time.monotonic() - t0 < 1800.0


def test_criterion_09_merge_density_guarantee():
    t0 = time.monotonic()
    horizon = 60_000
    family = []
    for j in range(1, 7):
        members = tuple(int(v) for v in np.arange(1, horizon + 1) if v % 2**j)
        family.append((IndexSet(members, horizon), 2.0**-j, 100 * 2**j))
    res = merge_subsequences(family)
    assert res.complete
    j_last, _m_last, dens = res.blocks[-1]
    assert dens >= 1.0 - 2.0**-j_last - 3.0 / j_last, "density %r at J=%d" % (
        dens,
        j_last,
    )
    assert time.monotonic() - t0 < 1.0


def test_criterion_10_ball_overlap_scaling():
    t0 = time.monotonic()
    rng = np.random.default_rng(110)
    circle = ball_overlap_ratio("circle", 0.1, 0.02, 10, rng)
    assert circle.ratio == 0.02 / 0.1 and circle.std_error == 0.0
    assert ball_overlap_ratio("circle", 0.1, 0.0, 10, rng).ratio == 0.0
    assert ball_overlap_ratio("circle", 0.1, 0.5, 10, rng) == (2.0, 0.0, True)
    small = ball_overlap_ratio("sl2", 0.3, 0.03, 100_000, rng)
    large = ball_overlap_ratio("sl2", 0.3, 0.06, 100_000, rng)
    factor = large.ratio / small.ratio
    assert 2.0 * 0.85 <= factor <= 2.0 * 1.15, "doubling factor %r" % (factor,)
    assert time.monotonic() - t0 < 60.0


def _y_marginal_density(y):
    width = np.where(y >= 1.0, 1.0, 1.0 - 2.0 * np.sqrt(np.maximum(1.0 - y * y, 0.0)))
    return width / (y * y) / (math.pi / 3.0)


def test_criterion_11_haar_sampler_chi_square():
    t0 = time.monotonic()
    rng = np.random.default_rng(111)
    n = 100_000
    _, y, _ = haar_sample_batch(rng, n)
    edges = [math.sqrt(3) / 2, 0.92, 1.0, 1.1, 1.25, 1.45, 1.8, 2.5, 4.0, np.inf]
    obs, _ = np.histogram(y, bins=edges)
    probs = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        if np.isfinite(hi):
            val, _ = integrate.quad(_y_marginal_density, lo, hi, limit=200)
        else:
            val = (3.0 / math.pi) / lo
        probs.append(val)
    probs = np.array(probs)
    assert probs.sum() == 1.0 or abs(probs.sum() - 1.0) < 1e-6
    expected = probs * n
    chi2 = float(np.sum((obs - expected) ** 2 / expected))
    threshold = float(stats.chi2.ppf(0.99, df=len(probs) - 1))
    assert chi2 < threshold, "chi2 %r >= %r" % (chi2, threshold)
    assert time.monotonic() - t0 < 10.0
