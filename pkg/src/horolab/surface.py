"""Geometry of the modular surface and its unit tangent bundle.

A point of the quotient is represented by reduced coordinates: a base point
x + iy in the standard fundamental domain (|x| <= 1/2, x^2 + y^2 >= 1, with
the half-open conventions below) plus a frame angle theta in [0, 2pi).

Reduction works on the lattice-shape coordinate of a matrix g = (a b; c d):

    tau(g) = (b + i d) / (a + i c),     Im tau = 1 / (a^2 + c^2) > 0,

with frame angle theta(g) = -atan2(c, a). Right multiplication by a lattice
element gamma = (p q; r s) acts on tau as the Mobius map (s tau + q)/(r tau
+ p), so the full modular group is available and the two classical moves are

    g T^(-m) = (a, b - m a; c, d - m c)   tau -> tau - m
    g S      = (b, -a; d, -c)             tau -> -1/tau.

Left rotation k_phi advances theta by phi and fixes tau, which is what makes
theta an honest fiber coordinate. The section with tau = x + iy and angle
theta is

    g = ( cos(theta)/sqrt(y)   (x cos(theta) + y sin(theta))/sqrt(y) )
        (-sin(theta)/sqrt(y)   (y cos(theta) - x sin(theta))/sqrt(y) ).

Distances use the right-invariant frame metric d(g, h) = ||log(g h^-1)||_F
with the principal 2x2 matrix logarithm in closed form; for trace <= -2 the
value sqrt(2 pi^2 + ||log(-M)||^2) is used (the -I turn costs sqrt(2) pi,
the distance from the identity to -I through the rotation subgroup).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import gmpy2
import numpy as np

from .errors import PrecisionExhausted
from .precision import DEFAULT_PREC, decimal_to_mpfr, mpfr_to_decimal, prec_ctx, to_mpfr

SQRT3_HALF = math.sqrt(3.0) / 2.0
DELTA_MINUS_I = math.sqrt(2.0) * math.pi  # frame distance from I to -I


# ---------------------------------------------------------------------------
# frame points


@dataclass(frozen=True)
class FramePoint:
    """Reduced coordinates (x, y, theta) plus the reducing word.

    The word lists the right-multiplication moves that were applied, in
    order, as (letter, exponent) pairs: ("T", -m) for a translation move
    g -> g T^(-m) and ("S", 1) for an inversion. Translation exponents can
    be astronomically large for far-out orbit points, which is why runs are
    recorded as one entry instead of repeated letters.
    """

    x: object
    y: object
    theta: object
    word: tuple
    precision_bits: int

    def as_floats(self):
        return float(self.x), float(self.y), float(self.theta)

    def gamma(self):
        """The recorded reducing element as an exact integer matrix.

        The reduction computed g_reduced = g_original * gamma, so the
        original frame is matrix() * gamma^-1.
        """
        a, b, c, d = 1, 0, 0, 1
        for letter, exponent in self.word:
            if letter == "T":
                # right-multiply by (1 e; 0 1)
                b, d = b + exponent * a, d + exponent * c
            elif letter == "S":
                a, b, c, d = b, -a, d, -c
            else:
                raise ValueError("unknown word letter %r" % (letter,))
        return ((a, b), (c, d))

    def matrix(self):
        """Section matrix of the reduced frame (tuple rows of mpfr)."""
        return section_matrix(self.x, self.y, self.theta, self.precision_bits)

    def matrix_float(self) -> np.ndarray:
        x, y, th = self.as_floats()
        return section_float(np.array([x]), np.array([y]), np.array([th]))[0]

    def original_matrix(self):
        """Reconstruct the frame that was fed to reduce (mpfr rows)."""
        bits = self.precision_bits
        (a, b), (c, d) = self.gamma()
        # gamma^-1 = (d -b; -c a) exactly
        inv = ((d, -b), (-c, a))
        g = self.matrix()
        with prec_ctx(bits):
            return tuple(
                tuple(
                    gmpy2.fsum([g[i][k] * inv[k][j] for k in range(2)])
                    for j in range(2)
                )
                for i in range(2)
            )

    def to_json_dict(self) -> dict:
        return {
            "x": mpfr_to_decimal(self.x),
            "y": mpfr_to_decimal(self.y),
            "theta": mpfr_to_decimal(self.theta),
            "word": [[letter, exponent] for letter, exponent in self.word],
            "precision_bits": self.precision_bits,
        }

    @staticmethod
    def from_json_dict(d: dict) -> "FramePoint":
        bits = int(d["precision_bits"])
        return FramePoint(
            decimal_to_mpfr(d["x"], bits),
            decimal_to_mpfr(d["y"], bits),
            decimal_to_mpfr(d["theta"], bits),
            tuple((str(l), int(e)) for l, e in d["word"]),
            bits,
        )


def normalize_angle(theta, bits):
    """theta mod 2pi in [0, 2pi); exact identity for inputs already there."""
    with prec_ctx(bits):
        th = to_mpfr(theta, bits)
        two_pi = 2 * gmpy2.const_pi()
        k = gmpy2.floor(th / two_pi)
        if k != 0:
            th = th - k * two_pi
        if th >= two_pi:
            th = th - two_pi
        if th < 0:
            th = th + two_pi
        return th


def section_matrix(x, y, theta, bits):
    with prec_ctx(bits):
        xv = to_mpfr(x, bits)
        yv = to_mpfr(y, bits)
        th = to_mpfr(theta, bits)
        if yv <= 0:
            raise ValueError("y must be positive")
        sq = gmpy2.sqrt(yv)
        c = gmpy2.cos(th)
        s = gmpy2.sin(th)
        return (
            (c / sq, (xv * c + yv * s) / sq),
            (-s / sq, (yv * c - xv * s) / sq),
        )


def frame_coordinates(m, bits):
    """(x, y, theta) of a matrix from its lattice-shape coordinate."""
    a, b = m[0]
    c, d = m[1]
    with prec_ctx(bits):
        den = a * a + c * c
        if den <= 0:
            raise ValueError("degenerate frame matrix")
        y = 1 / den
        x = (a * b + c * d) * y
        theta = normalize_angle(-gmpy2.atan2(c, a), bits)
        return x, y, theta


def section_float(x, y, theta) -> np.ndarray:
    """Vectorized float64 section matrices, shape (..., 2, 2)."""
    sq = np.sqrt(y)
    c = np.cos(theta)
    s = np.sin(theta)
    out = np.empty(np.broadcast(x, y, theta).shape + (2, 2))
    out[..., 0, 0] = c / sq
    out[..., 0, 1] = (x * c + y * s) / sq
    out[..., 1, 0] = -s / sq
    out[..., 1, 1] = (y * c - x * s) / sq
    return out


def _inv2_float(m: np.ndarray) -> np.ndarray:
    """Inverse of det-1 2x2 float matrices: adjugate."""
    out = np.empty_like(m)
    out[..., 0, 0] = m[..., 1, 1]
    out[..., 0, 1] = -m[..., 0, 1]
    out[..., 1, 0] = -m[..., 1, 0]
    out[..., 1, 1] = m[..., 0, 0]
    return out


# ---------------------------------------------------------------------------
# reduction


def reduce(x, y, theta=0.0, precision_bits: int = DEFAULT_PREC) -> FramePoint:
    """Reduce the frame with base point x + iy and angle theta.

    The fast path returns inputs that already satisfy the fundamental-domain
    conditions unchanged (up to angle normalization), which makes reduce
    exactly idempotent on its own outputs.
    """
    bits = int(precision_bits)
    with prec_ctx(bits):
        xv = to_mpfr(x, bits)
        yv = to_mpfr(y, bits)
        if not yv > 0:
            raise ValueError("upper-half-plane point needs y > 0, got %s" % yv)
        tol = gmpy2.exp2(-(bits // 2))
        half = gmpy2.mpfr(1) / 2
        if -half <= xv < half and xv * xv + yv * yv >= 1 - tol:
            return FramePoint(xv, yv, normalize_angle(theta, bits), (), bits)
    return reduce_frame_matrix(section_matrix(x, y, theta, bits), bits)


def reduce_frame(g) -> FramePoint:
    """Reduce a GroupElement (2x2) to a FramePoint at its own precision."""
    if g.n != 2:
        raise ValueError("frames live in SL(2, R)")
    return reduce_frame_matrix(g.entries, g.precision_bits)


def reduce_frame_matrix(entries, bits: int) -> FramePoint:
    a, b = entries[0]
    c, d = entries[1]
    with prec_ctx(bits):
        tol = gmpy2.exp2(-(bits // 2))
        half = gmpy2.mpfr(1) / 2
        x_limit = gmpy2.exp2(bits - 48)
        den0 = a * a + c * c
        if den0 <= 0:
            raise ValueError("degenerate frame matrix")
        y0 = 1 / den0
        x0 = (a * b + c * d) * y0
        log_scale = 0.0
        if x0 != 0:
            log_scale += max(0.0, float(gmpy2.log2(abs(x0))))
        log_scale += abs(float(gmpy2.log2(y0)))
        cap = 64 + int(8 * (1 + log_scale))
        word = []
        x_val = None
        y_val = None
        for _ in range(cap):
            den = a * a + c * c
            y_val = 1 / den
            x_val = (a * b + c * d) * y_val
            if abs(x_val) >= x_limit:
                raise PrecisionExhausted(
                    "translation part %.3g exceeds resolvable range at %d bits"
                    % (float(gmpy2.log2(abs(x_val))), bits)
                )
            m = int(gmpy2.floor(x_val + half))
            if m != 0:
                x_new = x_val - m
                if x_new >= half:  # rounding pushed us onto the closed edge
                    m += 1
                    x_new = x_val - m
                b = b - m * a
                d = d - m * c
                word.append(("T", -m))
                x_val = x_new
            if x_val * x_val + y_val * y_val >= 1 - tol:
                break
            a, b, c, d = b, -a, d, -c
            word.append(("S", 1))
        else:
            raise PrecisionExhausted(
                "reduction did not terminate in %d moves at %d bits" % (cap, bits)
            )
        theta = normalize_angle(-gmpy2.atan2(c, a), bits)
        return FramePoint(x_val, y_val, theta, tuple(word), bits)


def invariant_height(pt: FramePoint):
    """Height y of the reduced representative; constant on lattice orbits."""
    return pt.y


# ---------------------------------------------------------------------------
# frame metric


def _log_norm_base(t2: np.ndarray, nf: np.ndarray) -> np.ndarray:
    """||log M||_F for half-trace t2 > -1, given ||M - t2 I||_F = nf."""
    with np.errstate(invalid="ignore", divide="ignore"):
        omega = np.arccos(np.clip(t2, -1.0, 1.0))
        fac_e = np.where(omega < 1e-8, 1.0, omega / np.maximum(np.sin(omega), 1e-300))
        mu = np.arccosh(np.clip(t2, 1.0, None))
        fac_h = np.where(mu < 1e-8, 1.0, mu / np.maximum(np.sinh(mu), 1e-300))
    return np.where(t2 >= 1.0, fac_h, fac_e) * nf


def frame_log_norm(m: np.ndarray) -> np.ndarray:
    """||log M||_F of det-1 matrices, vectorized over leading axes.

    For trace <= -2 (no real principal log) the convention is
    sqrt(2 pi^2 + ||log(-M)||^2). Accuracy is float64, around 1e-12 except
    within ~1e-8 of trace -2.
    """
    t2 = 0.5 * (m[..., 0, 0] + m[..., 1, 1])
    nf = np.sqrt(
        (m[..., 0, 0] - t2) ** 2
        + (m[..., 1, 1] - t2) ** 2
        + m[..., 0, 1] ** 2
        + m[..., 1, 0] ** 2
    )
    pos = _log_norm_base(t2, nf)
    neg = _log_norm_base(-t2, nf)  # traceless part of -M has the same norm
    return np.where(t2 > -1.0, pos, np.sqrt(2.0 * math.pi**2 + neg**2))


def frame_distance(g: np.ndarray, h: np.ndarray) -> float:
    """Right-invariant distance ||log(g h^-1)||_F between two frames.

    Exactly symmetric (M and M^-1 share trace and log norm). The triangle
    inequality holds within about 10 percent for frames at distance up to
    roughly 1 of each other; at large separations the log norm is only a
    quasi-metric and can overshoot, which is why quotient computations
    minimize it over lattice translates rather than compose it.
    """
    return float(frame_log_norm(g @ _inv2_float(h)))


_BALL_CACHE: dict = {}

_T = ((1, 1), (0, 1))
_T_INV = ((1, -1), (0, 1))
_S = ((0, -1), (1, 0))


def _imul(a, b):
    return (
        (a[0][0] * b[0][0] + a[0][1] * b[1][0], a[0][0] * b[0][1] + a[0][1] * b[1][1]),
        (a[1][0] * b[0][0] + a[1][1] * b[1][0], a[1][0] * b[0][1] + a[1][1] * b[1][1]),
    )


def gamma_ball(word_budget: int) -> np.ndarray:
    """All products of at most word_budget letters from {T, T^-1, S}, deduplicated.

    Returned as a float64 array of shape (count, 2, 2) in a deterministic
    (sorted) order; includes the identity, and -I once the budget reaches 2.
    """
    budget = int(word_budget)
    if budget < 0:
        raise ValueError("word budget must be nonnegative")
    if budget in _BALL_CACHE:
        return _BALL_CACHE[budget]
    ident = ((1, 0), (0, 1))
    seen = {ident}
    frontier = [ident]
    for _ in range(budget):
        nxt = []
        for g in frontier:
            for letter in (_T, _T_INV, _S):
                h = _imul(g, letter)
                if h not in seen:
                    seen.add(h)
                    nxt.append(h)
        frontier = nxt
    # close under inverses so minima over the ball are exactly symmetric
    # (the word ball itself is not: S^-1 = SSS costs three letters)
    for (a, b), (c, d) in list(seen):
        seen.add(((d, -b), (-c, a)))
    ordered = sorted(seen)
    arr = np.array(ordered, dtype=float)
    _BALL_CACHE[budget] = arr
    return arr


def quotient_distance(a: FramePoint, b: FramePoint, word_budget: int = 8) -> float:
    """min over gamma in the word ball of d(g_a, g_b gamma).

    An upper bound on the true quotient distance; exact for points of
    moderate height (both below about 100) once word_budget >= 8.
    """
    ball = gamma_ball(word_budget)
    ga = a.matrix_float()
    gb_inv = _inv2_float(b.matrix_float())
    m = np.einsum("ij,mjk,kl->mil", ga, ball, gb_inv)
    return float(np.min(frame_log_norm(m)))


def injectivity_radius(pt: FramePoint, word_budget: int = 8) -> float:
    """Half the length of the shortest lattice loop at pt.

    Computed as (1/2) min over gamma != +-I in the word ball of
    ||log(g gamma g^-1)||; -I is excluded because it acts trivially on the
    quotient. Near the cusp the unipotent loop gives the 1/(2y) decay.
    """
    ball = gamma_ball(word_budget)
    mask = ~(
        np.all(ball == np.eye(2), axis=(1, 2))
        | np.all(ball == -np.eye(2), axis=(1, 2))
    )
    g = pt.matrix_float()
    m = np.einsum("ij,mjk,kl->mil", g, ball[mask], _inv2_float(g))
    return 0.5 * float(np.min(frame_log_norm(m)))


# ---------------------------------------------------------------------------
# Haar measure


def haar_sample_batch(rng: np.random.Generator, n: int):
    """n Haar draws as float arrays (x, y, theta); rejection on the strip."""
    xs, ys = [], []
    need = int(n)
    while need > 0:
        k = int(need / 0.9) + 8
        x = rng.uniform(-0.5, 0.5, k)
        u = rng.uniform(0.0, 1.0, k)
        y = SQRT3_HALF / (1.0 - u)
        keep = x * x + y * y >= 1.0
        xs.append(x[keep])
        ys.append(y[keep])
        need -= int(keep.sum())
    x = np.concatenate(xs)[:n]
    y = np.concatenate(ys)[:n]
    theta = rng.uniform(0.0, 2.0 * math.pi, n)
    return x, y, theta


def haar_sample(rng: np.random.Generator, precision_bits: int = DEFAULT_PREC) -> FramePoint:
    """One sample from the Haar probability measure on the frame bundle.

    x is uniform on [-1/2, 1/2), y follows the 1/y^2 law on [sqrt(3)/2, oo)
    by inverse CDF, pairs outside the fundamental domain are rejected
    (acceptance rate about 0.9069), theta is uniform.
    """
    bits = int(precision_bits)
    while True:
        x = rng.uniform(-0.5, 0.5)
        y = SQRT3_HALF / (1.0 - rng.uniform(0.0, 1.0))
        if x * x + y * y >= 1.0:
            break
    theta = rng.uniform(0.0, 2.0 * math.pi)
    with prec_ctx(bits):
        return FramePoint(
            to_mpfr(x, bits), to_mpfr(y, bits), normalize_angle(theta, bits), (), bits
        )


def haar_integral(f, n_samples: int, rng: np.random.Generator):
    """Monte Carlo (estimate, standard error) of a test function."""
    n = int(n_samples)
    if n < 100:
        raise ValueError("need at least 100 samples, got %d" % n)
    x, y, theta = haar_sample_batch(rng, n)
    if isinstance(f, TestFunction):
        vals = f.evaluate_batch(x, y, theta)
    else:
        vals = np.asarray(f(x, y, theta), dtype=float)
    est = float(np.mean(vals))
    se = float(np.std(vals, ddof=1) / math.sqrt(n))
    return est, se


# ---------------------------------------------------------------------------
# test functions


def _smooth_step_down(s: np.ndarray) -> np.ndarray:
    """C-infinity transition: 1 at s <= 0 down to 0 at s >= 1."""
    s = np.clip(s, 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore", under="ignore"):
        p = np.where(s > 0.0, np.exp(-1.0 / np.maximum(s, 1e-300)), 0.0)
        q = np.where(s < 1.0, np.exp(-1.0 / np.maximum(1.0 - s, 1e-300)), 0.0)
    return q / (p + q)


def bump_profile(s: np.ndarray) -> np.ndarray:
    """The standard C-infinity bump exp(1 - 1/(1 - s^2)) on |s| < 1."""
    s = np.asarray(s, dtype=float)
    inside = np.abs(s) < 1.0
    out = np.zeros_like(s)
    with np.errstate(divide="ignore", over="ignore", under="ignore"):
        vals = np.exp(1.0 - 1.0 / np.maximum(1.0 - s * s, 1e-300))
    out[inside] = vals[inside]
    return out


_BUMP_SLOPE_GRID = np.linspace(-0.999, 0.999, 65537)
_BUMP_MAX_SLOPE = float(
    np.max(
        np.abs(
            bump_profile(_BUMP_SLOPE_GRID)
            * (-2.0 * _BUMP_SLOPE_GRID)
            / (1.0 - _BUMP_SLOPE_GRID**2) ** 2
        )
    )
)


@dataclass(frozen=True)
class TestFunction:
    """Continuous [0,1]-valued function on the quotient.

    kind "height-profile": 1 below height_cutoffs[0], smooth monotone drop,
    0 above height_cutoffs[1]. Built from the invariant height only, so
    lattice invariance is automatic.

    kind "distance-bump": bump_profile(quotient_distance(center, .)/width).
    Compact support of radius width around the center frame; continuity on
    the quotient holds because the distance already minimizes over lattice
    translates.
    """

    __test__ = False  # keep pytest from collecting this as a test class

    kind: str
    center: FramePoint | None = None
    width: float = 0.0
    height_cutoffs: tuple | None = None
    word_budget: int = 8

    def __post_init__(self):
        if self.kind == "distance-bump":
            if self.center is None or not self.width > 0:
                raise ValueError("distance-bump needs a center and positive width")
        elif self.kind == "height-profile":
            if self.height_cutoffs is None:
                raise ValueError("height-profile needs height_cutoffs")
            lo, hi = self.height_cutoffs
            if not (0 < lo < hi):
                raise ValueError("need 0 < lower < upper cutoff")
        else:
            raise ValueError("unknown kind %r" % (self.kind,))

    def evaluate_batch(self, x, y, theta, chunk: int = 8192) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        theta = np.asarray(theta, dtype=float)
        if self.kind == "height-profile":
            lo, hi = self.height_cutoffs
            s = (y - lo) / (hi - lo)
            return _smooth_step_down(s)
        ball = gamma_ball(self.word_budget)
        center_m = self.center.matrix_float()
        pre = np.einsum("ij,mjk->mik", center_m, ball)
        n = x.shape[0]
        out = np.empty(n)
        for start in range(0, n, chunk):
            stop = min(start + chunk, n)
            sec = section_float(x[start:stop], y[start:stop], theta[start:stop])
            inv = _inv2_float(sec)
            m = np.einsum("mij,njk->nmik", pre, inv)
            dist = np.min(frame_log_norm(m), axis=1)
            out[start:stop] = bump_profile(dist / self.width)
        return out

    def evaluate(self, pt: FramePoint) -> float:
        if self.kind == "distance-bump":
            d = quotient_distance(self.center, pt, self.word_budget)
            return float(bump_profile(np.array([d / self.width]))[0])
        x, y, _ = pt.as_floats()
        return float(self.evaluate_batch(np.array([x]), np.array([y]), np.array([0.0]))[0])

    def lipschitz_bound(self) -> float:
        """Documented upper bound on the Lipschitz constant in the frame metric.

        distance-bump: max slope of the bump profile divided by width (the
        quotient distance is 1-Lipschitz). height-profile: the height changes
        at most like sqrt(2) y per unit frame distance, so the bound is
        max|step'| * sqrt(2) * hi / (hi - lo).
        """
        if self.kind == "distance-bump":
            return _BUMP_MAX_SLOPE / self.width
        lo, hi = self.height_cutoffs
        # max slope of the C-infinity step on [0,1] is about 2.0 at s = 1/2
        grid = np.linspace(0.0, 1.0, 65537)
        step_slope = float(np.max(np.abs(np.gradient(_smooth_step_down(grid), grid))))
        return step_slope * math.sqrt(2.0) * hi / (hi - lo)

    def to_json_dict(self) -> dict:
        d = {"kind": self.kind, "width": self.width, "word_budget": self.word_budget}
        if self.center is not None:
            d["center"] = self.center.to_json_dict()
        if self.height_cutoffs is not None:
            d["height_cutoffs"] = list(self.height_cutoffs)
        return d

    @staticmethod
    def from_json_dict(d: dict) -> "TestFunction":
        center = FramePoint.from_json_dict(d["center"]) if "center" in d else None
        cutoffs = tuple(d["height_cutoffs"]) if "height_cutoffs" in d else None
        return TestFunction(
            kind=d["kind"],
            center=center,
            width=float(d.get("width", 0.0)),
            height_cutoffs=cutoffs,
            word_budget=int(d.get("word_budget", 8)),
        )
