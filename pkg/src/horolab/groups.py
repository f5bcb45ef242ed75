"""Matrix group arithmetic for SL(n, R) at explicit bit precision.

Everything downstream (frame reduction, orbit generation, conjugation limits)
is built on the two value types here:

* ``GroupElement``: an n x n real matrix of determinant 1, entries stored as
  MPFR floats created at ``precision_bits``. Multiplication renormalizes the
  determinant by scalar division with det^(1/n) and propagates the minimum of
  the operand precisions.
* ``AlgebraElement``: a trace-zero n x n matrix (a tangent vector at the
  identity).

The fixed ordered basis of sl_n used for adjoint matrices puts the diagonal
differences D_k = E_kk - E_(k+1)(k+1) first, then the elementary matrices
E_ij (i != j) in lexicographic order. For n = 2 this is exactly
(H0, E, F) = (diag(1,-1), upper, lower), the basis all examples use.

Operator norms are taken with respect to the Frobenius inner product on the
algebra. ``ad_operator_norm`` computes the norm of Ad(g) composed with
orthogonal projection onto the span of a given basis (equivalently, the norm
of the restriction of Ad(g) to that span); the heavy lifting happens on
scaled float64 Gram matrices, giving about 1e-12 relative accuracy, far
inside the documented 2^-32 contract.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple, Sequence

import gmpy2
import numpy as np
import scipy.linalg

from .precision import DEFAULT_PREC, prec_ctx, to_mpfr

Matrix = tuple  # tuple of row tuples of mpfr


def _mat(rows, bits):
    return tuple(tuple(to_mpfr(x, bits) for x in row) for row in rows)


def _mat_identity(n, bits):
    with prec_ctx(bits):
        one = gmpy2.mpfr(1)
        zero = gmpy2.mpfr(0)
    return tuple(tuple(one if i == j else zero for j in range(n)) for i in range(n))


def _mat_mul(a, b, bits):
    n = len(a)
    m = len(b[0])
    k_dim = len(b)
    with prec_ctx(bits):
        return tuple(
            tuple(gmpy2.fsum([a[i][k] * b[k][j] for k in range(k_dim)]) for j in range(m))
            for i in range(n)
        )


def _mat_scale(a, s, bits):
    with prec_ctx(bits):
        return tuple(tuple(x * s for x in row) for row in a)


def _mat_add(a, b, bits):
    with prec_ctx(bits):
        return tuple(tuple(x + y for x, y in zip(ra, rb)) for ra, rb in zip(a, b))


def _mat_det(a, bits):
    n = len(a)
    if n == 1:
        return a[0][0]
    if n == 2:
        with prec_ctx(bits):
            return a[0][0] * a[1][1] - a[0][1] * a[1][0]
    # small-n Gaussian elimination with partial pivoting
    with prec_ctx(bits):
        rows = [list(r) for r in a]
        det = gmpy2.mpfr(1)
        for col in range(n):
            piv = max(range(col, n), key=lambda r: abs(rows[r][col]))
            if rows[piv][col] == 0:
                return gmpy2.mpfr(0)
            if piv != col:
                rows[col], rows[piv] = rows[piv], rows[col]
                det = -det
            det *= rows[col][col]
            inv = 1 / rows[col][col]
            for r in range(col + 1, n):
                f = rows[r][col] * inv
                if f != 0:
                    for c in range(col, n):
                        rows[r][c] -= f * rows[col][c]
        return det


def _mat_inverse(a, bits):
    n = len(a)
    if n == 2:
        with prec_ctx(bits):
            det = a[0][0] * a[1][1] - a[0][1] * a[1][0]
            inv = 1 / det
            return (
                (a[1][1] * inv, -a[0][1] * inv),
                (-a[1][0] * inv, a[0][0] * inv),
            )
    with prec_ctx(bits):
        rows = [list(r) + [gmpy2.mpfr(1) if i == j else gmpy2.mpfr(0) for j in range(n)]
                for i, r in enumerate(a)]
        for col in range(n):
            piv = max(range(col, n), key=lambda r: abs(rows[r][col]))
            if rows[piv][col] == 0:
                raise ZeroDivisionError("singular matrix")
            rows[col], rows[piv] = rows[piv], rows[col]
            inv = 1 / rows[col][col]
            rows[col] = [x * inv for x in rows[col]]
            for r in range(n):
                if r != col and rows[r][col] != 0:
                    f = rows[r][col]
                    rows[r] = [x - f * y for x, y in zip(rows[r], rows[col])]
        return tuple(tuple(row[n:]) for row in rows)


def _frobenius(a, bits):
    with prec_ctx(bits):
        return gmpy2.sqrt(gmpy2.fsum([x * x for row in a for x in row]))


@dataclass(frozen=True)
class GroupElement:
    """Element of SL(n, R) carrying its working precision."""

    entries: Matrix
    precision_bits: int

    @staticmethod
    def from_rows(rows, precision_bits: int = DEFAULT_PREC, normalize: bool = True) -> "GroupElement":
        bits = int(precision_bits)
        m = _mat(rows, bits)
        n = len(m)
        if any(len(r) != n for r in m):
            raise ValueError("matrix must be square")
        det = _mat_det(m, bits)
        if det <= 0:
            raise ValueError("group elements must have positive determinant, got %s" % det)
        if normalize:
            with prec_ctx(bits):
                scale = 1 / gmpy2.root(det, n)
            m = _mat_scale(m, scale, bits)
        return GroupElement(m, bits)

    @staticmethod
    def identity(n: int = 2, precision_bits: int = DEFAULT_PREC) -> "GroupElement":
        return GroupElement(_mat_identity(n, precision_bits), int(precision_bits))

    @property
    def n(self) -> int:
        return len(self.entries)

    def det(self):
        return _mat_det(self.entries, self.precision_bits)

    def det_defect(self):
        """|det - 1|, which the construction contract keeps below 2^(-p/2)."""
        with prec_ctx(self.precision_bits):
            return abs(self.det() - 1)

    def inverse(self) -> "GroupElement":
        return GroupElement(_mat_inverse(self.entries, self.precision_bits), self.precision_bits)

    def transpose(self) -> "GroupElement":
        n = self.n
        return GroupElement(
            tuple(tuple(self.entries[j][i] for j in range(n)) for i in range(n)),
            self.precision_bits,
        )

    def to_float_array(self) -> np.ndarray:
        return np.array([[float(x) for x in row] for row in self.entries], dtype=float)

    def __repr__(self):
        flat = ", ".join("%.6g" % float(x) for row in self.entries for x in row)
        return "GroupElement[%dx%d@%d](%s)" % (self.n, self.n, self.precision_bits, flat)


@dataclass(frozen=True)
class AlgebraElement:
    """Trace-zero n x n matrix at explicit precision."""

    entries: Matrix
    precision_bits: int

    @staticmethod
    def from_rows(rows, precision_bits: int = DEFAULT_PREC) -> "AlgebraElement":
        bits = int(precision_bits)
        m = _mat(rows, bits)
        n = len(m)
        if any(len(r) != n for r in m):
            raise ValueError("matrix must be square")
        with prec_ctx(bits):
            tr = gmpy2.fsum([m[i][i] for i in range(n)])
            limit = gmpy2.exp2(-(bits // 2))
            if abs(tr) > limit * max(1, int(float(_frobenius(m, bits)) + 1)):
                raise ValueError("algebra elements must be trace-zero, trace = %s" % tr)
        return AlgebraElement(m, bits)

    @property
    def n(self) -> int:
        return len(self.entries)

    def scale(self, s) -> "AlgebraElement":
        with prec_ctx(self.precision_bits):
            sm = gmpy2.mpfr(s) if not isinstance(s, Fraction) else to_mpfr(s, self.precision_bits)
        return AlgebraElement(_mat_scale(self.entries, sm, self.precision_bits), self.precision_bits)

    def add(self, other: "AlgebraElement") -> "AlgebraElement":
        bits = min(self.precision_bits, other.precision_bits)
        return AlgebraElement(_mat_add(self.entries, other.entries, bits), bits)

    def norm(self):
        """Frobenius norm."""
        return _frobenius(self.entries, self.precision_bits)

    def to_float_array(self) -> np.ndarray:
        return np.array([[float(x) for x in row] for row in self.entries], dtype=float)

    def __repr__(self):
        flat = ", ".join("%.6g" % float(x) for row in self.entries for x in row)
        return "AlgebraElement[%dx%d@%d](%s)" % (self.n, self.n, self.precision_bits, flat)


def bracket(x: AlgebraElement, y: AlgebraElement) -> AlgebraElement:
    """Lie bracket [x, y] = xy - yx."""
    bits = min(x.precision_bits, y.precision_bits)
    xy = _mat_mul(x.entries, y.entries, bits)
    yx = _mat_mul(y.entries, x.entries, bits)
    with prec_ctx(bits):
        return AlgebraElement(
            tuple(tuple(a - b for a, b in zip(ra, rb)) for ra, rb in zip(xy, yx)), bits
        )


# ---------------------------------------------------------------------------
# standard constructors


def unipotent(t, precision_bits: int = DEFAULT_PREC) -> GroupElement:
    """u(t) = [[1, t], [0, 1]]."""
    bits = int(precision_bits)
    with prec_ctx(bits):
        one = gmpy2.mpfr(1)
        zero = gmpy2.mpfr(0)
        tv = to_mpfr(t, bits)
    return GroupElement(((one, tv), (zero, one)), bits)


def rotation(theta, precision_bits: int = DEFAULT_PREC) -> GroupElement:
    """k_theta = [[cos, sin], [-sin, cos]]."""
    bits = int(precision_bits)
    with prec_ctx(bits):
        th = to_mpfr(theta, bits)
        c = gmpy2.cos(th)
        s = gmpy2.sin(th)
        ns = -s
    return GroupElement(((c, s), (ns, c)), bits)


def diagonal(sigma, precision_bits: int = DEFAULT_PREC) -> GroupElement:
    """diag(sigma, 1/sigma) for sigma > 0."""
    bits = int(precision_bits)
    with prec_ctx(bits):
        sv = to_mpfr(sigma, bits)
        if sv <= 0:
            raise ValueError("sigma must be positive")
        zero = gmpy2.mpfr(0)
        return GroupElement(((sv, zero), (zero, 1 / sv)), bits)


def sl2_basis(precision_bits: int = DEFAULT_PREC):
    """The ordered basis (H0, E, F) of sl_2."""
    bits = int(precision_bits)
    h0 = AlgebraElement.from_rows(((1, 0), (0, -1)), bits)
    e = AlgebraElement.from_rows(((0, 1), (0, 0)), bits)
    f = AlgebraElement.from_rows(((0, 0), (1, 0)), bits)
    return h0, e, f


def sln_basis_int(n: int):
    """Fixed ordered basis of sl_n as integer matrices: D_1..D_(n-1), then E_ij lex."""
    basis = []
    for k in range(n - 1):
        m = [[0] * n for _ in range(n)]
        m[k][k] = 1
        m[k + 1][k + 1] = -1
        basis.append(tuple(tuple(r) for r in m))
    for i in range(n):
        for j in range(n):
            if i != j:
                m = [[0] * n for _ in range(n)]
                m[i][j] = 1
                basis.append(tuple(tuple(r) for r in m))
    return basis


def expand_in_sln_basis(m, bits):
    """Coordinates of a trace-zero matrix in the fixed sl_n basis.

    The diagonal part diag(d_1..d_n) with sum zero expands over the D_k with
    coefficients equal to the partial sums d_1 + ... + d_k; off-diagonal
    entries are coefficients of the matching E_ij directly.
    """
    n = len(m)
    coords = []
    with prec_ctx(bits):
        run = gmpy2.mpfr(0)
        for k in range(n - 1):
            run = run + m[k][k]
            coords.append(run)
        for i in range(n):
            for j in range(n):
                if i != j:
                    coords.append(m[i][j])
    return coords


# ---------------------------------------------------------------------------
# core operations


def mul(g: GroupElement, h: GroupElement) -> GroupElement:
    """Group multiplication with determinant renormalization.

    Renormalization only happens when the computed determinant is
    trustworthy: with entries of size S the determinant of an n x n product
    carries absolute rounding error about S^n 2^-p, so once that bound
    reaches 2^(-p/2) the measured det says nothing and dividing by it would
    corrupt the matrix. Products of unimodular factors keep det = 1
    analytically, so skipping the correction in that regime is sound.
    """
    if g.n != h.n:
        raise ValueError("dimension mismatch: %d vs %d" % (g.n, h.n))
    bits = min(g.precision_bits, h.precision_bits)
    n = g.n
    m = _mat_mul(g.entries, h.entries, bits)
    det = _mat_det(m, bits)
    with prec_ctx(bits):
        top = max(abs(v) for row in m for v in row)
        err_bound = (max(top, 1) ** n) * gmpy2.exp2(-bits + 4 + n)
        if err_bound < gmpy2.exp2(-(bits // 2) - 2):
            if det <= 0:
                raise ValueError("product determinant not positive")
            scale = 1 / gmpy2.root(det, n)
            if scale != 1:
                m = _mat_scale(m, scale, bits)
    return GroupElement(m, bits)


def exp_sl2(x: AlgebraElement) -> GroupElement:
    """Matrix exponential of a trace-zero matrix.

    For 2x2 the Cayley-Hamilton closed form is used: with d = det X,
    exp(X) = cos(sqrt(d)) I + (sin(sqrt(d))/sqrt(d)) X for d > 0, the
    cosh/sinh analog for d < 0, and I + X for d = 0. Larger n falls back to
    scaling-and-squaring with a full-precision Taylor tail.
    """
    bits = x.precision_bits
    n = x.n
    if n == 2:
        with prec_ctx(bits):
            d = x.entries[0][0] * x.entries[1][1] - x.entries[0][1] * x.entries[1][0]
            if d == 0:
                c0, c1 = gmpy2.mpfr(1), gmpy2.mpfr(1)
            elif d > 0:
                s = gmpy2.sqrt(d)
                c0, c1 = gmpy2.cos(s), gmpy2.sin(s) / s
            else:
                s = gmpy2.sqrt(-d)
                c0, c1 = gmpy2.cosh(s), gmpy2.sinh(s) / s
            e = x.entries
            return GroupElement(
                (
                    (c0 + c1 * e[0][0], c1 * e[0][1]),
                    (c1 * e[1][0], c0 + c1 * e[1][1]),
                ),
                bits,
            )
    # scaling and squaring
    with prec_ctx(bits):
        top = max(abs(v) for row in x.entries for v in row)
        k = 0
        if top > gmpy2.mpfr(1) / 4:
            k = int(gmpy2.ceil(gmpy2.log2(top * 4))) + 1
        y = _mat_scale(x.entries, gmpy2.exp2(-k), bits)
        total = _mat_identity(n, bits)
        term = _mat_identity(n, bits)
        tol = gmpy2.exp2(-(bits + 16))
        for j in range(1, 16 * (bits + n)):
            term = _mat_scale(_mat_mul(term, y, bits), gmpy2.mpfr(1) / j, bits)
            total = _mat_add(total, term, bits)
            if max(abs(v) for row in term for v in row) < tol:
                break
        for _ in range(k):
            total = _mat_mul(total, total, bits)
    return GroupElement(total, bits)


def adjoint_matrix(g: GroupElement):
    """Matrix of Ad(g): v -> g v g^-1 in the fixed sl_n basis (rows = output coords)."""
    bits = g.precision_bits
    n = g.n
    ginv = _mat_inverse(g.entries, bits)
    basis = sln_basis_int(n)
    cols = []
    for b in basis:
        bm = _mat(b, bits)
        img = _mat_mul(_mat_mul(g.entries, bm, bits), ginv, bits)
        cols.append(expand_in_sln_basis(img, bits))
    dim = len(basis)
    return tuple(tuple(cols[j][i] for j in range(dim)) for i in range(dim))


def ad_operator_norm(g: GroupElement, restrict_to: Sequence[AlgebraElement] | None = None):
    """Operator norm of Ad(g), optionally restricted to the span of `restrict_to`.

    Norms are induced by the Frobenius inner product on the algebra. Returns
    an mpfr (values like e^(2 lambda n) overflow float64 for long orbits).
    """
    bits = g.precision_bits
    n = g.n
    ginv = _mat_inverse(g.entries, bits)
    if restrict_to is None:
        mats = [_mat(b, bits) for b in sln_basis_int(n)]
    else:
        for b in restrict_to:
            if b.n != n:
                raise ValueError("basis dimension mismatch")
        mats = [b.entries for b in restrict_to]
    images = [_mat_mul(_mat_mul(g.entries, bm, bits), ginv, bits) for bm in mats]
    if len(mats) == 1:
        with prec_ctx(bits):
            num = _frobenius(images[0], bits)
            den = _frobenius(mats[0], bits)
            if den == 0:
                raise ValueError("zero basis vector")
            return num / den
    with prec_ctx(bits):
        gram_a = [
            [gmpy2.fsum([x * y for rx, ry in zip(images[i], images[j]) for x, y in zip(rx, ry)])
             for j in range(len(mats))]
            for i in range(len(mats))
        ]
        gram_b = [
            [gmpy2.fsum([x * y for rx, ry in zip(mats[i], mats[j]) for x, y in zip(rx, ry)])
             for j in range(len(mats))]
            for i in range(len(mats))
        ]
        scale = max(abs(gram_a[i][i]) for i in range(len(mats)))
        if scale == 0:
            return gmpy2.mpfr(0)
        a_f = np.array([[float(v / scale) for v in row] for row in gram_a])
        b_f = np.array([[float(v) for v in row] for row in gram_b])
        lam = scipy.linalg.eigh(a_f, b_f, eigvals_only=True)[-1]
        lam = max(lam, 0.0)
        return gmpy2.sqrt(scale * gmpy2.mpfr(lam))


class KAHDecomposition(NamedTuple):
    """g = k a h with k, h rotations and a = diag(sigma, 1/sigma), sigma >= 1."""

    k: GroupElement
    a: GroupElement
    h: GroupElement

    @property
    def sigma(self):
        return self.a.entries[0][0]


def cartan_kah(g: GroupElement) -> KAHDecomposition:
    """KAH (Cartan) decomposition of a 2x2 element, via the SVD of g.

    A rotation input returns (g, I, I); the diagonal of a is nonincreasing.
    """
    if g.n != 2:
        raise ValueError("cartan_kah implemented for 2x2 elements")
    bits = g.precision_bits
    e = g.entries
    with prec_ctx(bits):
        # S = g^T g, symmetric positive definite with det 1
        p = e[0][0] * e[0][0] + e[1][0] * e[1][0]
        q = e[0][0] * e[0][1] + e[1][0] * e[1][1]
        r = e[0][1] * e[0][1] + e[1][1] * e[1][1]
        half_gap = (p - r) / 2
        disc = gmpy2.sqrt(half_gap * half_gap + q * q)
        mu_plus = (p + r) / 2 + disc
        sigma = gmpy2.sqrt(mu_plus)
        tol = gmpy2.exp2(-(bits - 8))
        if sigma <= 1 + tol:
            ident = GroupElement.identity(2, bits)
            return KAHDecomposition(g, ident, ident)
        # eigenvector of S for mu_plus; pick the better conditioned expression
        v1 = (q, mu_plus - p)
        v2 = (mu_plus - r, q)
        if v2[0] * v2[0] + v2[1] * v2[1] > v1[0] * v1[0] + v1[1] * v1[1]:
            v1 = v2
        norm = gmpy2.sqrt(v1[0] * v1[0] + v1[1] * v1[1])
        c, s = v1[0] / norm, v1[1] / norm
        h = GroupElement(((c, s), (-s, c)), bits)
        a = GroupElement(((sigma, gmpy2.mpfr(0)), (gmpy2.mpfr(0), 1 / sigma)), bits)
        a_inv = ((1 / sigma, gmpy2.mpfr(0)), (gmpy2.mpfr(0), sigma))
        k_m = _mat_mul(_mat_mul(g.entries, ((c, -s), (s, c)), bits), a_inv, bits)
        k = GroupElement(k_m, bits)
    return KAHDecomposition(k, a, h)


class IwasawaDecomposition(NamedTuple):
    """g = k a n with k a rotation, a positive diagonal, n unit upper triangular."""

    k: GroupElement
    a: GroupElement
    n: GroupElement


def iwasawa(g: GroupElement) -> IwasawaDecomposition:
    """Iwasawa decomposition of a 2x2 element by Gram-Schmidt on the first column."""
    if g.n != 2:
        raise ValueError("iwasawa implemented for 2x2 elements")
    bits = g.precision_bits
    e = g.entries
    with prec_ctx(bits):
        rho = gmpy2.sqrt(e[0][0] * e[0][0] + e[1][0] * e[1][0])
        c = e[0][0] / rho
        s = e[1][0] / rho
        k = GroupElement(((c, -s), (s, c)), bits)
        # k^T g is upper triangular with diagonal (rho, 1/rho)
        x = (c * e[0][1] + s * e[1][1]) / rho
        zero = gmpy2.mpfr(0)
        one = gmpy2.mpfr(1)
        a = GroupElement(((rho, zero), (zero, 1 / rho)), bits)
        n = GroupElement(((one, x), (zero, one)), bits)
    return IwasawaDecomposition(k, a, n)
