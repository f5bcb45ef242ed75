import math

import gmpy2
import numpy as np
import pytest
from scipy import integrate, stats

from horolab.errors import PrecisionExhausted
from horolab.surface import (
    FramePoint,
    TestFunction,
    frame_coordinates,
    frame_distance,
    frame_log_norm,
    gamma_ball,
    haar_integral,
    haar_sample,
    haar_sample_batch,
    injectivity_radius,
    invariant_height,
    quotient_distance,
    reduce,
    reduce_frame_matrix,
    section_float,
    section_matrix,
)

PREC = 128


def mobius_int(g, z):
    (a, b), (c, d) = g
    return (a * z + b) / (c * z + d)


def random_gamma(rng, length):
    T = ((1, 1), (0, 1))
    Ti = ((1, -1), (0, 1))
    S = ((0, -1), (1, 0))
    g = ((1, 0), (0, 1))
    for _ in range(length):
        l = (T, Ti, S)[rng.integers(0, 3)]
        g = (
            (
                g[0][0] * l[0][0] + g[0][1] * l[1][0],
                g[0][0] * l[0][1] + g[0][1] * l[1][1],
            ),
            (
                g[1][0] * l[0][0] + g[1][1] * l[1][0],
                g[1][0] * l[0][1] + g[1][1] * l[1][1],
            ),
        )
    return g


# ---------------------------------------------------------------------------
# reduction


def test_reduce_identity_point():
    pt = reduce(0.0, 1.0, 0.0, PREC)
    assert pt.word == ()
    assert float(pt.x) == 0.0 and float(pt.y) == 1.0 and float(pt.theta) == 0.0


def test_reduce_one_plus_i():
    pt = reduce(1.0, 1.0, 0.0, PREC)
    assert pt.word == (("T", -1),)
    assert float(pt.x) == pytest.approx(0.0, abs=1e-30)
    assert float(pt.y) == pytest.approx(1.0, abs=1e-30)
    assert float(pt.theta) == 0.0


def test_reduce_idempotent_exact():
    rng = np.random.default_rng(7)
    for _ in range(25):
        x0 = rng.uniform(-40, 40)
        y0 = math.exp(rng.uniform(-6, 4))
        th = rng.uniform(0, 2 * math.pi)
        pt = reduce(x0, y0, th, PREC)
        again = reduce(pt.x, pt.y, pt.theta, PREC)
        assert again.word == ()
        assert again.x == pt.x
        assert again.y == pt.y
        assert again.theta == pt.theta


def test_reduce_against_exhaustive_ball():
    # brute force over all lattice images from a large word ball
    z = complex(0.3, 0.01)
    ball = gamma_ball(14)
    best = None
    for g in ball.astype(int):
        w = mobius_int(((g[0][0], g[0][1]), (g[1][0], g[1][1])), z)
        if -0.5 <= w.real < 0.5 and abs(w) >= 1.0 - 1e-12:
            best = w
    assert best is not None
    pt = reduce(0.3, 0.01, 0.0, 256)
    assert float(pt.x) == pytest.approx(best.real, abs=1e-9)
    assert float(pt.y) == pytest.approx(best.imag, abs=1e-9)


def test_reduce_corner_lands_on_unit_circle():
    # a point just inside the unit circle near the corner reduces to the
    # boundary: |reduced z| = 1 within 1e-5
    pt = reduce(0.5, 0.866025, 0.0, PREC)
    x, y, _ = pt.as_floats()
    assert math.hypot(x, y) == pytest.approx(1.0, abs=1e-5)
    assert y == pytest.approx(math.sqrt(3) / 2, abs=1e-5)
    assert -0.5 <= x < 0.5


def test_reduce_lattice_invariance_base_point():
    rng = np.random.default_rng(21)
    for _ in range(20):
        x0 = rng.uniform(-2, 2)
        y0 = math.exp(rng.uniform(-2, 2))
        gamma = random_gamma(rng, int(rng.integers(1, 6)))
        z = complex(x0, y0)
        w = mobius_int(gamma, z)
        p1 = reduce(x0, y0, 0.0, 192)
        p2 = reduce(w.real, w.imag, 0.0, 192)
        assert float(p1.x) == pytest.approx(float(p2.x), abs=1e-7)
        assert float(p1.y) == pytest.approx(float(p2.y), abs=1e-7)
        f = TestFunction(kind="height-profile", height_cutoffs=(1.5, 3.0))
        assert f.evaluate(p1) == pytest.approx(f.evaluate(p2), abs=1e-7)


def test_reduce_word_reconstructs_original():
    rng = np.random.default_rng(3)
    for _ in range(10):
        x0 = rng.uniform(-30, 30)
        y0 = math.exp(rng.uniform(-5, 3))
        th = rng.uniform(0, 2 * math.pi)
        pt = reduce(x0, y0, th, 256)
        orig = pt.original_matrix()
        x1, y1, th1 = frame_coordinates(orig, 256)
        assert float(x1) == pytest.approx(x0, rel=1e-20, abs=1e-20)
        assert float(y1) == pytest.approx(y0, rel=1e-20)
        dth = (float(th1) - th) % (2 * math.pi)
        assert min(dth, 2 * math.pi - dth) < 1e-20


def test_reduce_fundamental_domain_invariants():
    rng = np.random.default_rng(11)
    for _ in range(40):
        x0 = rng.uniform(-50, 50)
        y0 = math.exp(rng.uniform(-7, 5))
        pt = reduce(x0, y0, rng.uniform(0, 7), PREC)
        x, y, th = pt.as_floats()
        assert -0.5 <= x < 0.5
        assert x * x + y * y >= 1.0 - 2.0 ** (-PREC // 2) * 1.001
        assert y >= math.sqrt(3) / 2 * (1 - 1e-20)
        assert 0 <= th < 2 * math.pi


def test_reduce_huge_translation_word():
    pt = reduce(10**40, 1.0, 0.0, 256)
    assert pt.word == (("T", -(10**40)),)
    assert float(pt.y) == pytest.approx(1.0)


def test_reduce_rejects_unresolvable_translation():
    with pytest.raises(PrecisionExhausted):
        reduce(2.0**80, 1.0, 0.0, 96)


def test_reduce_rejects_bad_y():
    with pytest.raises(ValueError):
        reduce(0.0, -1.0, 0.0, PREC)


def test_reduce_frame_matrix_matches_point_api():
    m = section_matrix(3.7, 0.2, 1.1, 192)
    p1 = reduce_frame_matrix(m, 192)
    p2 = reduce(3.7, 0.2, 1.1, 192)
    assert float(p1.x) == pytest.approx(float(p2.x), abs=1e-40)
    assert float(p1.y) == pytest.approx(float(p2.y), abs=1e-40)
    assert float(p1.theta) == pytest.approx(float(p2.theta), abs=1e-40)
    assert p1.word == p2.word


def test_invariant_height_examples():
    assert float(invariant_height(reduce(0.0, 10.0, 0.0, PREC))) == pytest.approx(10.0)
    assert float(invariant_height(reduce(7.0, 10.0, 0.0, PREC))) == pytest.approx(10.0)
    assert float(invariant_height(reduce(0.0, 0.1, 0.0, PREC))) == pytest.approx(10.0)


def test_frame_point_json_roundtrip():
    pt = reduce(5.3, 0.02, 2.2, 192)
    d = pt.to_json_dict()
    back = FramePoint.from_json_dict(d)
    assert back.x == pt.x and back.y == pt.y and back.theta == pt.theta
    assert back.word == pt.word and back.precision_bits == pt.precision_bits


# ---------------------------------------------------------------------------
# metric


def test_log_norm_rotation():
    for phi in (0.3, 1.2, 2.9):
        k = np.array([[math.cos(phi), math.sin(phi)], [-math.sin(phi), math.cos(phi)]])
        assert frame_log_norm(k) == pytest.approx(math.sqrt(2) * phi, rel=1e-12)


def test_log_norm_unipotent_and_diagonal():
    u = np.array([[1.0, 0.25], [0.0, 1.0]])
    assert frame_log_norm(u) == pytest.approx(0.25, rel=1e-12)
    a = np.array([[math.exp(0.7), 0.0], [0.0, math.exp(-0.7)]])
    assert frame_log_norm(a) == pytest.approx(0.7 * math.sqrt(2), rel=1e-12)


def test_log_norm_negative_trace_branch():
    val = frame_log_norm(-np.eye(2))
    assert val == pytest.approx(math.sqrt(2) * math.pi, rel=1e-12)
    m = -np.array([[math.exp(0.5), 0.0], [0.0, math.exp(-0.5)]])
    expect = math.sqrt(2 * math.pi**2 + 0.5)
    assert frame_log_norm(m) == pytest.approx(expect, rel=1e-12)


def test_frame_distance_symmetry_and_triangle():
    rng = np.random.default_rng(5)
    wide = section_float(
        rng.uniform(-0.5, 0.5, 12), rng.uniform(0.9, 3.0, 12), rng.uniform(0, 6.28, 12)
    )
    for i in range(12):
        for j in range(12):
            dij = frame_distance(wide[i], wide[j])
            dji = frame_distance(wide[j], wide[i])
            assert dij == pytest.approx(dji, rel=1e-12, abs=1e-12)
    # triangle inequality holds within the documented 10 percent slack for
    # frames within unit distance of each other (the log-norm is only a
    # local metric; see the frame_distance docstring)
    near = section_float(
        rng.uniform(0.0, 0.3, 12), rng.uniform(1.0, 1.3, 12), rng.uniform(0, 0.3, 12)
    )
    for i in range(10):
        d_ac = frame_distance(near[i], near[i + 2])
        d_ab = frame_distance(near[i], near[i + 1])
        d_bc = frame_distance(near[i + 1], near[i + 2])
        assert d_ac <= 1.1 * (d_ab + d_bc) + 1e-9


def test_quotient_distance_zero_on_same_point():
    a = reduce(0.1, 1.3, 0.5, PREC)
    assert quotient_distance(a, a) == pytest.approx(0.0, abs=1e-12)


def test_quotient_distance_rotation_by_pi_is_zero():
    # -I is a lattice element, so rotating the frame at i by pi returns to
    # the same quotient point
    a = reduce(0.0, 1.0, 0.0, PREC)
    b = reduce(0.0, 1.0, math.pi, PREC)
    assert quotient_distance(a, b) == pytest.approx(0.0, abs=1e-9)


def test_quotient_distance_fiber_at_elliptic_point():
    # the inversion fixes i, so the in-fiber route costs sqrt(2) times the
    # angle difference folded to the nearest multiple of pi/2; the actual
    # minimum is even smaller here because the order-6 elliptic element at
    # the corner provides a shortcut. Check both facts, with scipy's matrix
    # log as an independent oracle for the winning element.
    from scipy.linalg import logm

    a = reduce(0.0, 1.0, 0.0, PREC)
    b = reduce(0.0, 1.0, math.pi / 3, PREC)
    d = quotient_distance(a, b)
    assert d <= math.sqrt(2) * math.pi / 6 + 1e-12
    gamma0 = np.array([[0.0, 1.0], [-1.0, 1.0]])
    phi = math.pi / 3
    k_inv = np.array([[math.cos(phi), -math.sin(phi)], [math.sin(phi), math.cos(phi)]])
    oracle = float(np.linalg.norm(logm(gamma0 @ k_inv), "fro"))
    assert d == pytest.approx(oracle, rel=1e-9)


def test_quotient_distance_small_fiber_rotation_at_i():
    # at the identity frame a small fiber rotation costs exactly sqrt(2)
    # times the angle (no lattice shortcut competes at this scale)
    a = reduce(0.0, 1.0, 0.0, PREC)
    b = reduce(0.0, 1.0, 0.05, PREC)
    assert quotient_distance(a, b) == pytest.approx(math.sqrt(2) * 0.05, rel=1e-9)


def test_quotient_distance_generic_fiber():
    # fiber moves are left rotations, so right invariance makes a small
    # fiber rotation cost exactly sqrt(2) times the angle at any base point
    x0, y0, dth = 0.13, 1.7, 0.05
    a = reduce(x0, y0, 0.0, PREC)
    b = reduce(x0, y0, dth, PREC)
    assert quotient_distance(a, b) == pytest.approx(math.sqrt(2) * dth, rel=1e-9)


def test_quotient_distance_budget_stability_interior():
    a = reduce(0.0, 1.0, 0.0, PREC)
    b = reduce(0.4, 1.0, 0.0, PREC)
    d0 = quotient_distance(a, b, word_budget=0)
    d8 = quotient_distance(a, b, word_budget=8)
    assert d0 == pytest.approx(d8, rel=1e-12)


def test_quotient_distance_wraps_domain_boundary():
    # two points on opposite vertical edges are lattice neighbors
    a = reduce(-0.499, 1.4, 0.2, PREC)
    b = reduce(0.499, 1.4, 0.2, PREC)
    d = quotient_distance(a, b)
    naive = frame_distance(a.matrix_float(), b.matrix_float())
    assert d < 0.01
    assert naive > 0.5


def test_quotient_distance_symmetry():
    rng = np.random.default_rng(17)
    for _ in range(10):
        a = haar_sample(rng)
        b = haar_sample(rng)
        assert quotient_distance(a, b) == pytest.approx(
            quotient_distance(b, a), rel=1e-10, abs=1e-10
        )


def test_quotient_distance_triangle():
    rng = np.random.default_rng(19)
    for _ in range(10):
        a, b, c = (haar_sample(rng) for _ in range(3))
        ab = quotient_distance(a, b)
        bc = quotient_distance(b, c)
        ac = quotient_distance(a, c)
        assert ac <= 1.1 * (ab + bc) + 1e-9


def test_injectivity_radius_at_base_frame():
    # shortest loop at the identity frame is the unipotent, length 1
    pt = reduce(0.0, 1.0, 0.0, PREC)
    assert injectivity_radius(pt) == pytest.approx(0.5, rel=1e-9)


def test_injectivity_radius_cusp_decay():
    pt_high = reduce(0.0, 100.0, 0.0, PREC)
    pt_low = reduce(0.0, 1.0, 0.0, PREC)
    assert injectivity_radius(pt_high) <= injectivity_radius(pt_low) / 50.0
    assert injectivity_radius(pt_high) == pytest.approx(1.0 / 200.0, rel=1e-6)


def test_injectivity_height_product_bounded():
    # 2 y inj(y) is exactly 1 in the cusp regime
    for y in (2.0, 5.0, 17.0, 60.0, 100.0):
        pt = reduce(0.2, y, 1.0, PREC)
        prod = 2.0 * y * injectivity_radius(pt)
        assert 0.9 <= prod <= 1.1


def test_injectivity_radius_positive_and_bounded():
    rng = np.random.default_rng(23)
    for _ in range(15):
        pt = haar_sample(rng)
        r = injectivity_radius(pt)
        assert 0 < r <= 0.5 * math.sqrt(2) * math.pi


# ---------------------------------------------------------------------------
# Haar sampling and integration


def test_haar_sampler_in_domain():
    rng = np.random.default_rng(29)
    x, y, th = haar_sample_batch(rng, 2000)
    assert np.all(x >= -0.5) and np.all(x < 0.5)
    assert np.all(x * x + y * y >= 1.0)
    assert np.all(y >= math.sqrt(3) / 2)
    assert np.all((th >= 0) & (th < 2 * math.pi))


def _y_marginal_density(y):
    # fundamental-domain width at height y, over total area pi/3
    width = np.where(y >= 1.0, 1.0, 1.0 - 2.0 * np.sqrt(np.maximum(1.0 - y * y, 0.0)))
    return width / (y * y) / (math.pi / 3.0)


def test_haar_y_marginal_chi_square():
    rng = np.random.default_rng(31)
    n = 100_000
    _, y, _ = haar_sample_batch(rng, n)
    edges = [math.sqrt(3) / 2, 0.92, 1.0, 1.1, 1.25, 1.45, 1.8, 2.5, 4.0, np.inf]
    obs, _ = np.histogram(y, bins=edges)
    probs = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        if np.isfinite(hi):
            val, _ = integrate.quad(_y_marginal_density, lo, hi, limit=200)
        else:
            # analytic tail: density is (3/pi)/y^2 for y >= 1
            val = (3.0 / math.pi) / lo
        probs.append(val)
    probs = np.array(probs)
    assert probs.sum() == pytest.approx(1.0, abs=1e-6)
    expected = probs * n
    chi2 = float(np.sum((obs - expected) ** 2 / expected))
    threshold = stats.chi2.ppf(0.99, df=len(probs) - 1)
    assert chi2 < threshold


def test_haar_mass_above_height_two():
    # exact value (1/2) / (pi/3) = 3/(2 pi)
    rng = np.random.default_rng(37)
    n = 100_000
    _, y, _ = haar_sample_batch(rng, n)
    p_hat = float(np.mean(y > 2.0))
    p = 3.0 / (2.0 * math.pi)
    se = math.sqrt(p * (1 - p) / n)
    assert abs(p_hat - p) <= 3 * se


def test_haar_x_mean_zero():
    rng = np.random.default_rng(41)
    x, _, _ = haar_sample_batch(rng, 100_000)
    assert abs(float(np.mean(x))) <= 3.0 * float(np.std(x)) / math.sqrt(len(x))


def test_haar_integral_constant_one():
    rng = np.random.default_rng(43)
    f = TestFunction(kind="height-profile", height_cutoffs=(1e9, 2e9))
    est, se = haar_integral(f, 500, rng)
    assert est == 1.0 and se == 0.0


def test_haar_integral_function_supported_below_domain():
    rng = np.random.default_rng(47)
    f = TestFunction(kind="height-profile", height_cutoffs=(0.5, 0.7))
    est, se = haar_integral(f, 500, rng)
    assert est == 0.0 and se == 0.0


def test_haar_integral_rejects_tiny_sample_count():
    rng = np.random.default_rng(53)
    f = TestFunction(kind="height-profile", height_cutoffs=(1.0, 2.0))
    with pytest.raises(ValueError):
        haar_integral(f, 50, rng)


def test_haar_integral_bump_matches_volume_prediction():
    # small-ball prediction: the integral is (4/3) pi w^3 <bump> / V with
    # V = sqrt(2) pi^2 / 6 the metric volume of the quotient (theta runs a
    # double cover since -I is a lattice element) and <bump> the mean of the
    # profile over the unit ball, integral of 3 s^2 bump(s)
    rng = np.random.default_rng(59)
    center = reduce(0.0, 1.2, 1.0, PREC)
    w = 0.3
    f = TestFunction(kind="distance-bump", center=center, width=w)
    est, se = haar_integral(f, 20_000, rng)
    mean_bump, _ = integrate.quad(
        lambda s: 3 * s * s * math.exp(1 - 1 / (1 - s * s)), 0.0, 1.0
    )
    vol = math.sqrt(2) * math.pi**2 / 6
    predicted = (4.0 / 3.0) * math.pi * w**3 * mean_bump / vol
    assert est == pytest.approx(predicted, rel=0.15)
    assert se < 0.002


# ---------------------------------------------------------------------------
# test functions


def test_height_profile_values():
    f = TestFunction(kind="height-profile", height_cutoffs=(2.0, 4.0))
    y = np.array([0.9, 2.0, 3.0, 4.0, 10.0])
    vals = f.evaluate_batch(np.zeros(5), y, np.zeros(5))
    assert vals[0] == 1.0 and vals[1] == 1.0
    assert 0.0 < vals[2] < 1.0
    assert vals[2] == pytest.approx(0.5, abs=1e-12)  # symmetric step at midpoint
    assert vals[3] == 0.0 and vals[4] == 0.0


def test_bump_profile_shape():
    from horolab.surface import bump_profile

    assert bump_profile(np.array([0.0]))[0] == pytest.approx(1.0)
    assert bump_profile(np.array([0.999]))[0] > 0.0
    assert bump_profile(np.array([1.0]))[0] == 0.0
    assert bump_profile(np.array([-2.0]))[0] == 0.0


def test_distance_bump_center_value_and_support():
    center = reduce(0.1, 1.5, 0.7, PREC)
    f = TestFunction(kind="distance-bump", center=center, width=0.25)
    assert f.evaluate(center) == pytest.approx(1.0, abs=1e-9)
    far = reduce(0.0, 3.0, 0.7, PREC)
    assert f.evaluate(far) == 0.0


def test_distance_bump_batch_matches_scalar():
    rng = np.random.default_rng(61)
    center = reduce(0.0, 1.1, 0.3, PREC)
    f = TestFunction(kind="distance-bump", center=center, width=0.4)
    x, y, th = haar_sample_batch(rng, 50)
    batch = f.evaluate_batch(x, y, th)
    for i in range(50):
        pt = reduce(x[i], y[i], th[i], PREC)
        assert batch[i] == pytest.approx(f.evaluate(pt), abs=1e-10)


def test_distance_bump_continuous_across_boundary():
    center = reduce(0.2, 1.3, 0.0, PREC)
    f = TestFunction(kind="distance-bump", center=center, width=0.9)
    left = reduce(-0.4999, 1.3, 0.0, PREC)
    right = reduce(0.4999, 1.3, 0.0, PREC)
    assert f.evaluate(left) == pytest.approx(f.evaluate(right), abs=1e-3)


def test_test_function_validation():
    with pytest.raises(ValueError):
        TestFunction(kind="distance-bump", width=0.3)
    with pytest.raises(ValueError):
        TestFunction(kind="height-profile", height_cutoffs=(3.0, 2.0))
    with pytest.raises(ValueError):
        TestFunction(kind="mystery")


def test_test_function_json_roundtrip():
    center = reduce(0.1, 1.2, 0.4, PREC)
    f = TestFunction(kind="distance-bump", center=center, width=0.3)
    g = TestFunction.from_json_dict(f.to_json_dict())
    assert g.kind == f.kind and g.width == f.width
    assert g.center.x == f.center.x

    h = TestFunction(kind="height-profile", height_cutoffs=(2.0, 4.0))
    h2 = TestFunction.from_json_dict(h.to_json_dict())
    assert h2.height_cutoffs == (2.0, 4.0)


def test_lipschitz_bound_is_an_upper_bound():
    rng = np.random.default_rng(67)
    center = reduce(0.0, 1.2, 0.0, PREC)
    f = TestFunction(kind="distance-bump", center=center, width=0.5)
    lip = f.lipschitz_bound()
    for _ in range(20):
        a = haar_sample(rng)
        b = haar_sample(rng)
        d = quotient_distance(a, b)
        if d > 0:
            assert abs(f.evaluate(a) - f.evaluate(b)) <= lip * d * 1.05


def test_gamma_ball_growth_and_contents():
    b0 = gamma_ball(0)
    assert b0.shape == (1, 2, 2)
    b2 = gamma_ball(2)
    mats = {tuple(m.astype(int).flatten()) for m in b2}
    assert (1, 0, 0, 1) in mats
    assert (-1, 0, 0, -1) in mats  # S^2 = -I
    b8 = gamma_ball(8)
    assert len(b8) > 200
