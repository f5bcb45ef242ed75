"""Conjugation-limit experiments, correlated differences, and ball overlaps.

Three families of experiments around one mechanism: tiny algebra vectors
v_n, shrunk at exactly the rate the adjoint action of g_n grows, produce
conjugates g_n exp(v_n) g_n^{-1} that converge to a nontrivial unipotent
element. The f_n machinery then measures how test functions feel that
drift along rotated orbits, including correlation decay between different
n, a law-of-large-numbers run over theta panels, and the small-ball
overlap ratios that drive the second-moment bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import gmpy2
import numpy as np

from .errors import ConfigError
from .groups import (
    AlgebraElement,
    GroupElement,
    _mat_inverse,
    _mat_mul,
    ad_operator_norm,
    cartan_kah,
    exp_sl2,
    mul,
    rotation,
    sl2_basis,
    unipotent,
)
from .orbits import TimeSequence
from .precision import prec_ctx
from .sl2 import decompose_adjoint, jacobson_morozov, d_of_vector
from .surface import TestFunction, injectivity_radius, frame_log_norm, reduce_frame_matrix

_CAUCHY_TOL = 1e-8
_CAUCHY_WINDOW = 5
_CERT_TOL = 1e-6

_DECOMP = None


def _weight_decomposition():
    """Chain decomposition of the sl2 adjoint action for the standard
    upper nilpotent, computed once (it is exact rational data)."""
    global _DECOMP
    if _DECOMP is None:
        _DECOMP = decompose_adjoint(jacobson_morozov(((0, 1), (0, 0))))
    return _DECOMP


def unipotent_degree(v) -> int:
    """Largest chain index of v under ad of the upper nilpotent.

    Degree 0 means Ad(u(t)) v = v for all t; the zero vector also reports
    0. The growth law is |Ad(u_t) v| = Theta(t^degree).
    """
    report = d_of_vector(_weight_decomposition(), v)
    return 0 if report.is_zero else report.d


def _scale_algebra(v: AlgebraElement, scale, bits: int) -> AlgebraElement:
    with prec_ctx(bits):
        rows = tuple(tuple(x * scale for x in row) for row in v.entries)
    return AlgebraElement.from_rows(rows, bits)


def _conjugate_algebra(g: GroupElement, v: AlgebraElement) -> AlgebraElement:
    bits = g.precision_bits
    ginv = _mat_inverse(g.entries, bits)
    w = _mat_mul(_mat_mul(g.entries, v.entries, bits), ginv, bits)
    return AlgebraElement.from_rows(w, bits)


def example_theta_limit(alpha: float, times: TimeSequence, n_count: int) -> list:
    """Conjugates a_n k_{theta_n} a_n^{-1} with sin(theta_n) = alpha / t_n^2.

    a_n = diag(s_n, 1/s_n) with s_n^2 = t_n^2 + 1, the diagonal scale whose
    off-diagonal growth matches a time-t_n horocycle displacement. Exactly,
    the conjugate is

        (cos theta_n, (t_n^2 + 1) sin theta_n; -sin theta_n / (t_n^2 + 1),
         cos theta_n),

    so the top-right entry is alpha + alpha/t_n^2 while every other entry is
    within O(t_n^-4) of the identity; the limit is (1 alpha; 0 1) and the
    worst entrywise error is exactly alpha/t_n^2 for every n.
    """
    if not 0 < alpha < 1:
        raise ConfigError("alpha must be in (0, 1)")
    if n_count < 1:
        raise ConfigError("need at least one index")
    out = []
    for n in range(1, n_count + 1):
        t_probe = times.value(n, 64)
        if t_probe <= 0:
            raise ConfigError("times must be positive for the theta limit")
        texp = max(1, gmpy2.get_exp(t_probe))
        bits = 160 + 6 * texp
        with prec_ctx(bits):
            t = times.value(n, bits)
            ratio = alpha / (t * t)
            if ratio > 1:
                raise ConfigError(
                    "alpha / t_n^2 = %s exceeds 1 at n = %d (times too small)"
                    % (float(ratio), n)
                )
            theta = gmpy2.asin(ratio)
            c = gmpy2.cos(theta)
            s = gmpy2.sin(theta)
            scale = t * t + 1
            g = GroupElement(((c, scale * s), (-s / scale, c)), bits)
        out.append(g)
    return out


@dataclass(frozen=True)
class ConjugationExperiment:
    """Trajectory g_n exp(v_n) g_n^{-1} with convergence certificates.

    scaling_mode says how v_n shrinks: "d_h_power" divides the direction
    by t_n^degree (the unipotent schedule), "ad_norm" divides by the full
    adjoint operator norm of g_n (the escaping-sequence construction).
    converged_at is the 1-based right edge of the first entrywise Cauchy
    window (tolerance 1e-8, width 5), or None. selected lists the 1-based
    indices clustered around the limit representative; for the Cauchy case
    it is the whole tail from the detection point.
    """

    times: TimeSequence | None
    direction: AlgebraElement
    scaling_mode: str
    trajectory: tuple
    degree: int | None
    limit: GroupElement | None
    converged_at: int | None
    selected: tuple
    unipotent_ok: bool
    centralizer_ok: bool

    def to_csv(self) -> str:
        ref = None if self.limit is None else self.limit.to_float_array()
        lines = ["n,m00,m01,m10,m11,dist_to_limit"]
        for k, g in enumerate(self.trajectory):
            m = g.to_float_array()
            dist = "" if ref is None else repr(float(np.max(np.abs(m - ref))))
            lines.append(
                "%d,%s,%s,%s,%s,%s"
                % (
                    k + 1,
                    repr(float(m[0, 0])),
                    repr(float(m[0, 1])),
                    repr(float(m[1, 0])),
                    repr(float(m[1, 1])),
                    dist,
                )
            )
        return "\n".join(lines) + "\n"


def _detect_cauchy(mats: Sequence[np.ndarray]) -> int | None:
    for end in range(_CAUCHY_WINDOW - 1, len(mats)):
        window = mats[end - _CAUCHY_WINDOW + 1 : end + 1]
        spread = max(
            float(np.max(np.abs(window[i] - window[j])))
            for i in range(_CAUCHY_WINDOW)
            for j in range(i + 1, _CAUCHY_WINDOW)
        )
        if spread < _CAUCHY_TOL:
            return end + 1
    return None


def _unipotent_certificate(m: np.ndarray, tol: float = _CERT_TOL) -> bool:
    eig = np.linalg.eigvals(m)
    return bool(np.all(np.abs(eig - 1.0) <= tol))


def _centralizer_certificate(m: np.ndarray, tol: float = _CERT_TOL) -> bool:
    u1 = np.array([[1.0, 1.0], [0.0, 1.0]])
    comm = m @ u1 @ np.linalg.inv(m) @ np.linalg.inv(u1)
    return bool(np.max(np.abs(comm - np.eye(2))) <= tol)


def jm_conjugation(v: AlgebraElement, times: TimeSequence, n_count: int) -> ConjugationExperiment:
    """Trajectory exp(Ad(u(t_n)) v / t_n^d) for the chain degree d of v.

    The scaling matches growth against shrinkage exactly, so the highest
    chain component survives and everything below dies; the limit is a
    nontrivial unipotent element commuting with the flow. Convergence is
    detected by the Cauchy window and then certified (eigenvalues within
    1e-6 of 1, commutator with u(1) within 1e-6 of the identity).
    """
    if n_count < 1:
        raise ConfigError("need at least one index")
    d = unipotent_degree(v)
    if d == 0:
        raise ConfigError(
            "direction is centralized by the unipotent flow (degree 0); "
            "the scaled conjugates never move"
        )
    traj = []
    floats = []
    for n in range(1, n_count + 1):
        bits = max(192, times.default_policy_bits(n) + 32)
        with prec_ctx(bits):
            t = times.value(n, bits)
            if t <= 0:
                raise ConfigError("times must be positive")
            vn = _scale_algebra(
                AlgebraElement.from_rows(v.entries, bits), 1 / t**d, bits
            )
            u_n = unipotent(t, bits)
            w = _conjugate_algebra(u_n, vn)
            g = exp_sl2(w)
        traj.append(g)
        floats.append(g.to_float_array())
    converged_at = _detect_cauchy(floats)
    if converged_at is None:
        limit = None
        selected = ()
        unip = cent = False
    else:
        limit = traj[-1]
        selected = tuple(range(converged_at, n_count + 1))
        unip = _unipotent_certificate(floats[-1])
        cent = _centralizer_certificate(floats[-1])
    return ConjugationExperiment(
        times=times,
        direction=v,
        scaling_mode="d_h_power",
        trajectory=tuple(traj),
        degree=d,
        limit=limit,
        converged_at=converged_at,
        selected=selected,
        unipotent_ok=unip,
        centralizer_ok=cent,
    )


def appendix_vn(g_seq: Sequence[GroupElement]) -> ConjugationExperiment:
    """Trajectory exp(Ad(g_n) v_n) with v_n = (E - F) / |Ad(g_n)|.

    E - F spans the involution-fixed directions (sigma(X) = -X^T fixes
    exactly so(2) inside sl2), and dividing by the full adjoint norm keeps
    the pushed vectors bounded. When the sequence escapes every bounded
    set (Cartan sigma values growing), the trajectory clusters along a
    subsequence at a nontrivial unipotent element; the selected indices
    are the points within 1e-6 of the deepest-escape representative.
    """
    g_seq = list(g_seq)
    if not g_seq:
        raise ConfigError("need a nonempty sequence")
    sigmas = [float(cartan_kah(g).sigma) for g in g_seq]
    if max(sigmas) < 10.0:
        raise ConfigError(
            "sequence stays in a bounded region (max Cartan sigma %.3g < 10)"
            % max(sigmas)
        )
    traj = []
    floats = []
    direction = None
    for g in g_seq:
        bits = g.precision_bits
        _, e_mat, f_mat = sl2_basis(bits)
        with prec_ctx(bits):
            rows = tuple(
                tuple(a - b for a, b in zip(re, rf))
                for re, rf in zip(e_mat.entries, f_mat.entries)
            )
        v = AlgebraElement.from_rows(rows, bits)
        if direction is None:
            direction = v
        norm = ad_operator_norm(g)
        with prec_ctx(bits):
            vn = _scale_algebra(v, 1 / norm, bits)
        w = _conjugate_algebra(g, vn)
        ge = exp_sl2(w)
        traj.append(ge)
        floats.append(ge.to_float_array())
    ref_idx = max(range(len(sigmas)), key=lambda i: sigmas[i])
    ref = floats[ref_idx]
    selected = tuple(
        i + 1 for i, m in enumerate(floats) if float(np.max(np.abs(m - ref))) <= _CERT_TOL
    )
    if len(selected) >= 2:
        limit = traj[ref_idx]
        converged_at = selected[0]
        unip = _unipotent_certificate(ref)
        cent = _centralizer_certificate(ref)
    else:
        limit = None
        converged_at = None
        selected = ()
        unip = cent = False
    return ConjugationExperiment(
        times=None,
        direction=direction,
        scaling_mode="ad_norm",
        trajectory=tuple(traj),
        degree=None,
        limit=limit,
        converged_at=converged_at,
        selected=selected,
        unipotent_ok=unip,
        centralizer_ok=cent,
    )


@dataclass(frozen=True)
class UnipotentSchedule:
    """g_n = u(t_n) with direction v shrunk by t_n^degree.

    The degree is computed from the chain decomposition; a zero direction
    is allowed (every f_n is then identically zero), but a nonzero
    centralized direction is rejected because the scale t_n^0 never
    shrinks it.
    """

    times: TimeSequence
    direction: AlgebraElement

    def degree(self) -> int:
        return unipotent_degree(self.direction)

    def is_zero(self) -> bool:
        return all(float(x) == 0.0 for row in self.direction.entries for x in row)

    def bits_for(self, n: int) -> int:
        return max(160, self.times.default_policy_bits(n) + 32)

    def restricted_norm(self, n: int) -> float:
        """|Ad(u(t_n))| restricted to the direction line (the d_n scale)."""
        bits = self.bits_for(n)
        u_n = unipotent(self.times.value(n, bits), bits)
        v = AlgebraElement.from_rows(self.direction.entries, bits)
        return float(ad_operator_norm(u_n, restrict_to=[v]))


def _schedule_pair(schedule: UnipotentSchedule, n: int):
    """(perturbed, plain) group elements g_n exp(v_n) and g_n at index n."""
    bits = schedule.bits_for(n)
    d = schedule.degree()
    if d == 0 and not schedule.is_zero():
        raise ConfigError("schedule direction is centralized; no usable scaling")
    with prec_ctx(bits):
        t = schedule.times.value(n, bits)
        u_n = unipotent(t, bits)
        if schedule.is_zero():
            return u_n, u_n
        vn = _scale_algebra(
            AlgebraElement.from_rows(schedule.direction.entries, bits), 1 / t**d, bits
        )
        w = _conjugate_algebra(u_n, vn)
        pert = mul(exp_sl2(w), u_n)
    return pert, u_n


def _panel_points(g: GroupElement, g0: GroupElement | None, thetas) -> list:
    """Reduced frame points g k_theta g0 over a theta panel."""
    bits = g.precision_bits
    pts = []
    for th in thetas:
        tail = rotation(float(th), bits)
        if g0 is not None:
            tail = mul(tail, GroupElement.from_rows(g0.entries, precision_bits=bits, normalize=False))
        pts.append(reduce_frame_matrix(mul(g, tail).entries, bits))
    return pts


def f_n_panel(
    phi: TestFunction,
    g0: GroupElement | None,
    schedule: UnipotentSchedule,
    n: int,
    thetas,
) -> np.ndarray:
    """phi(g_n exp(v_n) k_theta g0) - phi(g_n k_theta g0) over the panel."""
    thetas = np.atleast_1d(np.asarray(thetas, dtype=float))
    if schedule.is_zero():
        return np.zeros(thetas.shape)
    pert, plain = _schedule_pair(schedule, n)
    pts_a = _panel_points(pert, g0, thetas)
    pts_b = _panel_points(plain, g0, thetas)
    coords_a = np.array([p.as_floats() for p in pts_a])
    coords_b = np.array([p.as_floats() for p in pts_b])
    vals_a = phi.evaluate_batch(coords_a[:, 0], coords_a[:, 1], coords_a[:, 2])
    vals_b = phi.evaluate_batch(coords_b[:, 0], coords_b[:, 1], coords_b[:, 2])
    return vals_a - vals_b


def f_n_eval(
    phi: TestFunction,
    g0: GroupElement | None,
    schedule: UnipotentSchedule,
    n: int,
    theta: float,
) -> float:
    return float(f_n_panel(phi, g0, schedule, n, [theta])[0])


class CorrelationRecord(NamedTuple):
    """Monte Carlo estimate of the f_n f_m correlation at one index pair.

    ratio is (d_m / d_n)^(1/2) for the direction-restricted adjoint norms;
    discarded is the thin-part fraction of the panel dropped before
    averaging (0.0 unless a thick radius was requested).
    """

    n: int
    m: int
    estimate: float
    std_error: float
    ratio: float
    discarded: float = 0.0


def correlation_decay_experiment(
    phi: TestFunction,
    schedule: UnipotentSchedule,
    pairs: Sequence[tuple],
    m_theta: int,
    rng: np.random.Generator,
    thick_radius: float | None = None,
) -> list:
    """Estimates of mean_theta f_n f_m for each pair, sorted by (n, m).

    One theta panel is drawn and shared by all pairs. With a thick_radius,
    samples whose unperturbed orbit point at either index has injectivity
    radius below it are dropped from that pair's average (the discarded
    fraction is recorded on the record; nothing is asserted about it).
    """
    if m_theta < 2:
        raise ConfigError("need at least two theta samples")
    pairs = [(int(n), int(m)) for n, m in pairs]
    for n, m in pairs:
        if m < 1 or n < m:
            raise ConfigError("pairs need n >= m >= 1")
    thetas = rng.uniform(0.0, 2.0 * math.pi, size=m_theta)
    needed = sorted({k for p in pairs for k in p})
    values = {}
    thick = {}
    for k in needed:
        pert, plain = _schedule_pair(schedule, k)
        pts_a = _panel_points(pert, None, thetas)
        pts_b = _panel_points(plain, None, thetas)
        ca = np.array([p.as_floats() for p in pts_a])
        cb = np.array([p.as_floats() for p in pts_b])
        va = phi.evaluate_batch(ca[:, 0], ca[:, 1], ca[:, 2])
        vb = phi.evaluate_batch(cb[:, 0], cb[:, 1], cb[:, 2])
        values[k] = va - vb
        if thick_radius is not None:
            thick[k] = np.array([injectivity_radius(p) >= thick_radius for p in pts_b])
    norms = {k: schedule.restricted_norm(k) for k in needed}
    records = []
    for n, m in sorted(set(pairs)):
        keep = np.ones(m_theta, dtype=bool)
        if thick_radius is not None:
            keep = thick[n] & thick[m]
        prod = values[n][keep] * values[m][keep]
        kept = int(prod.size)
        if kept < 2:
            raise ConfigError(
                "thick radius %.3g leaves fewer than two samples at pair (%d, %d)"
                % (thick_radius, n, m)
            )
        est = float(np.mean(prod))
        se = float(np.std(prod, ddof=1) / math.sqrt(kept))
        ratio = math.sqrt(norms[m] / norms[n])
        records.append(
            CorrelationRecord(n, m, est, se, ratio, 1.0 - kept / m_theta)
        )
    return records


def correlation_fit(records: Sequence[CorrelationRecord], noise_multiple: float = 3.0):
    """Least-squares slope of log|corr| against log(ratio).

    Only off-diagonal records whose estimate clears noise_multiple times
    the standard error enter the fit. Returns (slope, points_used);
    slope is None when fewer than two records qualify.
    """
    xs = []
    ys = []
    for r in records:
        if r.n == r.m or r.ratio >= 1.0:
            continue
        if abs(r.estimate) <= noise_multiple * r.std_error:
            continue
        xs.append(math.log(r.ratio))
        ys.append(math.log(abs(r.estimate)))
    if len(xs) < 2:
        return None, len(xs)
    slope = float(np.polyfit(xs, ys, 1)[0])
    return slope, len(xs)


def correlations_to_csv(records: Sequence[CorrelationRecord]) -> str:
    lines = ["n,m,estimate,std_error,ratio,discarded"]
    for r in records:
        lines.append(
            "%d,%d,%s,%s,%s,%s"
            % (r.n, r.m, repr(r.estimate), repr(r.std_error), repr(r.ratio), repr(r.discarded))
        )
    return "\n".join(lines) + "\n"


class LLNResult(NamedTuple):
    """Curves S_{N_k}/N_k over a theta panel, N_k = k^4.

    second_moments[k-1] is mean_theta (S_{N_k}/N_k)^2; slope is the
    log-log fit of that against N (None when every moment vanishes).
    """

    n_grid: tuple
    curves: np.ndarray
    second_moments: tuple
    slope: float | None

    def median_abs(self) -> np.ndarray:
        return np.median(np.abs(self.curves), axis=0)

    def to_csv(self) -> str:
        med = self.median_abs()
        lines = ["k,N,median_abs,second_moment"]
        for i, n in enumerate(self.n_grid):
            lines.append(
                "%d,%d,%s,%s" % (i + 1, n, repr(float(med[i])), repr(self.second_moments[i]))
            )
        return "\n".join(lines) + "\n"


def lln_experiment(
    phi: TestFunction,
    schedule: UnipotentSchedule,
    k_max: int,
    thetas,
) -> LLNResult:
    """Partial sums S_N = sum_{n<=N} f_n along the fourth-power grid.

    Everything is computed on one shared theta panel; the curves are the
    per-sample normalized sums at each N_k and the second moments average
    their squares. Weak correlation shows up as second moments decaying
    roughly like N^{-1/2}.
    """
    if k_max < 3:
        raise ConfigError("need k_max >= 3")
    thetas = np.atleast_1d(np.asarray(thetas, dtype=float))
    if thetas.size < 1:
        raise ConfigError("need a nonempty theta panel")
    n_grid = tuple(k**4 for k in range(1, k_max + 1))
    running = np.zeros(thetas.shape)
    curves = np.empty((thetas.size, k_max))
    moments = []
    grid_pos = 0
    for n in range(1, n_grid[-1] + 1):
        running = running + f_n_panel(phi, None, schedule, n, thetas)
        if n == n_grid[grid_pos]:
            curves[:, grid_pos] = running / n
            moments.append(float(np.mean((running / n) ** 2)))
            grid_pos += 1
    slope = None
    if all(m > 0 for m in moments):
        slope = float(
            np.polyfit(np.log(np.asarray(n_grid, dtype=float)), np.log(moments), 1)[0]
        )
    return LLNResult(n_grid, curves, tuple(moments), slope)


class OverlapResult(NamedTuple):
    ratio: float
    std_error: float
    saturated: bool


def _exp_sl2_floats(a, b, c) -> np.ndarray:
    """exp of X = (a H0 + b (E+F) + c (E-F)) / sqrt(2), vectorized.

    The coordinates are orthonormal for the Frobenius norm, so |X| is the
    Euclidean length of (a, b, c). Eigenvalues of X are +-alpha with
    alpha^2 = (a^2 + b^2 - c^2) / 2; the closed form handles both signs.
    """
    s2 = math.sqrt(2.0)
    x00 = a / s2
    x01 = (b + c) / s2
    x10 = (b - c) / s2
    alpha2 = (a * a + b * b - c * c) / 2.0
    aa = np.abs(alpha2)
    root = np.sqrt(np.maximum(aa, 1e-300))
    # cosh/sinhc for alpha2 > 0, cos/sinc for alpha2 < 0; both ~ 1 + alpha2/2
    c0 = np.where(alpha2 >= 0, np.cosh(root), np.cos(root))
    with np.errstate(invalid="ignore"):
        c1 = np.where(alpha2 >= 0, np.sinh(root) / root, np.sin(root) / root)
    c1 = np.where(aa < 1e-12, 1.0 + alpha2 / 6.0, c1)
    out = np.empty(np.broadcast(a, b).shape + (2, 2))
    out[..., 0, 0] = c0 + c1 * x00
    out[..., 0, 1] = c1 * x01
    out[..., 1, 0] = c1 * x10
    out[..., 1, 1] = c0 - c1 * x00
    return out


def ball_overlap_ratio(
    group: str,
    r: float,
    d: float,
    m_samples: int,
    rng: np.random.Generator,
) -> OverlapResult:
    """Haar mass of (h B_r symmetric-difference B_r) over the mass of B_r.

    h sits at distance d from the identity. The circle case is the exact
    arc formula |h B diff B| / |B| = min(d / r, 2); at d >= 2r the arcs
    are disjoint and the ratio saturates at 2 (flagged, no sampling). The
    sl2 case is Monte Carlo in exponential coordinates: points uniform in
    the metric ball via the exact exp-Jacobian sinh^2(alpha)/alpha^2
    acceptance weight, membership tested through the principal-log norm,
    h a rotation at distance d. Radii must stay well below 1 for the
    chord metric to behave like a metric.
    """
    if not r > 0:
        raise ConfigError("radius must be positive")
    if d < 0:
        raise ConfigError("displacement must be nonnegative")
    if group == "circle":
        if d >= 2 * r:
            return OverlapResult(2.0, 0.0, True)
        return OverlapResult(d / r, 0.0, False)
    if group != "sl2":
        raise ConfigError("group must be 'circle' or 'sl2'")
    if d >= 2 * r:
        return OverlapResult(2.0, 0.0, True)
    if m_samples < 2:
        raise ConfigError("need at least two samples")
    # rejection sample (a, b, c) uniform-in-ball, then thin by the Jacobian
    half = r / math.sqrt(2.0)
    w_max = (math.sinh(half) / half) ** 2 if half > 0 else 1.0
    kept = []
    need = m_samples
    while need > 0:
        batch = max(1024, int(need * 1.3))
        vec = rng.normal(size=(batch, 3))
        vec /= np.linalg.norm(vec, axis=1)[:, None]
        radii = r * rng.uniform(size=batch) ** (1.0 / 3.0)
        pts = vec * radii[:, None]
        alpha2 = (pts[:, 0] ** 2 + pts[:, 1] ** 2 - pts[:, 2] ** 2) / 2.0
        aa = np.sqrt(np.abs(alpha2))
        with np.errstate(invalid="ignore", divide="ignore"):
            w = np.where(
                alpha2 >= 0,
                np.where(aa > 1e-8, (np.sinh(aa) / np.maximum(aa, 1e-300)) ** 2, 1.0),
                np.where(aa > 1e-8, (np.sin(aa) / np.maximum(aa, 1e-300)) ** 2, 1.0),
            )
        accept = rng.uniform(size=batch) * w_max < w
        sel = pts[accept]
        kept.append(sel)
        need -= sel.shape[0]
    sample = np.concatenate(kept)[:m_samples]
    mats = _exp_sl2_floats(sample[:, 0], sample[:, 1], sample[:, 2])
    phi = d / math.sqrt(2.0)
    hinv = np.array(
        [[math.cos(phi), -math.sin(phi)], [math.sin(phi), math.cos(phi)]]
    )
    member = frame_log_norm(np.einsum("ij,njk->nik", hinv, mats)) <= r
    inter = member.astype(float)
    ratio = 2.0 * (1.0 - float(np.mean(inter)))
    se = 2.0 * float(np.std(inter, ddof=1) / math.sqrt(m_samples))
    return OverlapResult(ratio, se, False)
