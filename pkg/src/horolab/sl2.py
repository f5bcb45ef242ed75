"""Exact sl2-triple completion and weight decompositions over the rationals.

Everything here runs on ``fractions.Fraction`` with zero tolerance: the
outputs calibrate the floating-point modules, so this layer must not
contribute rounding error of its own. Matrices are tuples of row tuples of
Fractions; linear algebra is a small reduced-row-echelon solver.

Coordinates on sl_n use the same fixed ordered basis as the numeric layer
(diagonal differences D_k first, then elementary matrices E_ij in
lexicographic order; for n = 2 that is (H0, E, F)).

The chain bases produced by ``decompose_adjoint`` are normalized so that
ad(X) w_l = l w_(l-1), which makes the unipotent transport identity

    Ad(u_t) w_l = sum_k C(l, k) t^(l-k) w_k

hold literally, coefficient by coefficient.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import factorial
from typing import Sequence

from .groups import AlgebraElement, sln_basis_int

FrMatrix = tuple  # tuple of row tuples of Fraction


def _to_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    if isinstance(x, float):
        return Fraction(x)
    # gmpy2 mpfr and mpq both expose as_integer_ratio
    if hasattr(x, "as_integer_ratio"):
        num, den = x.as_integer_ratio()
        return Fraction(int(num), int(den))
    raise TypeError("cannot convert %r to an exact rational" % (x,))


def fr_matrix(rows) -> FrMatrix:
    if isinstance(rows, AlgebraElement):
        rows = rows.entries
    m = tuple(tuple(_to_fraction(x) for x in row) for row in rows)
    n = len(m)
    if any(len(r) != n for r in m):
        raise ValueError("matrix must be square")
    return m


def _zero(n) -> FrMatrix:
    return tuple(tuple(Fraction(0) for _ in range(n)) for _ in range(n))


def _add(a, b):
    return tuple(tuple(x + y for x, y in zip(ra, rb)) for ra, rb in zip(a, b))


def _sub(a, b):
    return tuple(tuple(x - y for x, y in zip(ra, rb)) for ra, rb in zip(a, b))


def _scale(a, s):
    s = _to_fraction(s)
    return tuple(tuple(x * s for x in row) for row in a)


def _matmul(a, b):
    n = len(a)
    return tuple(
        tuple(sum((a[i][k] * b[k][j] for k in range(n)), Fraction(0)) for j in range(n))
        for i in range(n)
    )


def fr_bracket(a, b):
    return _sub(_matmul(a, b), _matmul(b, a))


def _is_zero(a) -> bool:
    return all(x == 0 for row in a for x in row)


def _trace(a) -> Fraction:
    return sum((a[i][i] for i in range(len(a))), Fraction(0))


def _coords(m) -> tuple:
    """Exact coordinates of a trace-zero matrix in the fixed sl_n basis."""
    n = len(m)
    out = []
    run = Fraction(0)
    for k in range(n - 1):
        run = run + m[k][k]
        out.append(run)
    for i in range(n):
        for j in range(n):
            if i != j:
                out.append(m[i][j])
    return tuple(out)


def _from_coords(coords, n) -> FrMatrix:
    basis = sln_basis_int(n)
    m = [[Fraction(0)] * n for _ in range(n)]
    for c, b in zip(coords, basis):
        c = _to_fraction(c)
        if c != 0:
            for i in range(n):
                for j in range(n):
                    if b[i][j]:
                        m[i][j] += c * b[i][j]
    return tuple(tuple(row) for row in m)


def _ad_matrix(m) -> list:
    """Columns: coordinates of [m, b_j] over the fixed basis. Returns list of rows."""
    n = len(m)
    basis = [fr_matrix(b) for b in sln_basis_int(n)]
    cols = [_coords(fr_bracket(m, b)) for b in basis]
    dim = len(basis)
    return [[cols[j][i] for j in range(dim)] for i in range(dim)]


# ---------------------------------------------------------------------------
# exact linear solving


def _rref(rows):
    """In-place reduced row echelon form; returns pivot column list."""
    n_rows = len(rows)
    n_cols = len(rows[0]) if n_rows else 0
    pivots = []
    r = 0
    for c in range(n_cols):
        piv = None
        for i in range(r, n_rows):
            if rows[i][c] != 0:
                piv = i
                break
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        inv = 1 / rows[r][c]
        rows[r] = [x * inv for x in rows[r]]
        for i in range(n_rows):
            if i != r and rows[i][c] != 0:
                f = rows[i][c]
                rows[i] = [x - f * y for x, y in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
        if r == n_rows:
            break
    return pivots


def solve_exact(a_rows, b):
    """One exact solution of A x = b with free variables set to zero, or None."""
    n_cols = len(a_rows[0])
    aug = [list(row) + [bv] for row, bv in zip(a_rows, b)]
    pivots = _rref(aug)
    for i in range(len(aug)):
        if all(aug[i][j] == 0 for j in range(n_cols)) and aug[i][n_cols] != 0:
            return None
    x = [Fraction(0)] * n_cols
    for r, c in enumerate(pivots):
        if c < n_cols:
            x[c] = aug[r][n_cols]
    if pivots and pivots[-1] == n_cols:
        return None
    return x


def nullspace_exact(a_rows):
    """Exact basis of the kernel of A, free-variable convention, deterministic order."""
    n_cols = len(a_rows[0])
    work = [list(row) for row in a_rows]
    pivots = _rref(work)
    pivot_set = set(pivots)
    basis = []
    for free in range(n_cols):
        if free in pivot_set:
            continue
        v = [Fraction(0)] * n_cols
        v[free] = Fraction(1)
        for r, c in enumerate(pivots):
            v[c] = -work[r][free]
        basis.append(tuple(v))
    return basis


# ---------------------------------------------------------------------------
# triples


@dataclass(frozen=True)
class Sl2Triple:
    """Exact matrices with [H,X] = 2X, [H,Y] = -2Y, [X,Y] = H."""

    h: FrMatrix
    x: FrMatrix
    y: FrMatrix

    @property
    def n(self) -> int:
        return len(self.x)

    def verify(self) -> bool:
        return (
            _is_zero(_sub(fr_bracket(self.h, self.x), _scale(self.x, 2)))
            and _is_zero(_add(fr_bracket(self.h, self.y), _scale(self.y, 2)))
            and _is_zero(_sub(fr_bracket(self.x, self.y), self.h))
        )

    def to_json_dict(self) -> dict:
        return {
            "n": self.n,
            "H": matrix_to_strings(self.h),
            "X": matrix_to_strings(self.x),
            "Y": matrix_to_strings(self.y),
        }

    @staticmethod
    def from_json_dict(d: dict) -> "Sl2Triple":
        t = Sl2Triple(fr_matrix(d["H"]), fr_matrix(d["X"]), fr_matrix(d["Y"]))
        if not t.verify():
            raise ValueError("serialized triple fails the bracket relations")
        return t


def matrix_to_strings(m) -> list:
    return [[str(x) for x in row] for row in m]


def jacobson_morozov(x_rows) -> Sl2Triple:
    """Complete a nonzero nilpotent X in sl_n(Q) to an exact sl2-triple.

    H is found by solving ad(X)^2 W = -2X and taking H = [X, W], which lands
    in the image of ad(X) as the construction requires. When the diagonal
    part of that H already satisfies [H, X] = 2X we keep the diagonal part;
    this canonicalization is what makes regular and minimal nilpotents come
    out as the familiar integer diagonals, and it is the documented
    determinism tie-break (together with the free-variables-to-zero
    convention of the exact solver).
    """
    x = fr_matrix(x_rows)
    n = len(x)
    if _trace(x) != 0:
        raise ValueError("X must be trace-zero")
    if _is_zero(x):
        raise ValueError("X = 0 admits no sl2-triple")
    power = x
    for _ in range(n - 1):
        power = _matmul(power, x)
    if not _is_zero(power):
        raise ValueError("X is not nilpotent (X^n != 0)")

    dim = n * n - 1
    ad_x = _ad_matrix(x)
    ad_x2 = [
        [sum((ad_x[i][k] * ad_x[k][j] for k in range(dim)), Fraction(0)) for j in range(dim)]
        for i in range(dim)
    ]
    target = [-2 * c for c in _coords(x)]
    w = solve_exact(ad_x2, target)
    if w is None:
        raise ValueError("ad(X)^2 W = -2X has no solution; X is not nilpotent over Q")
    h = fr_bracket(x, _from_coords(w, n))
    h_diag = tuple(
        tuple(h[i][i] if i == j else Fraction(0) for j in range(n)) for i in range(n)
    )
    if _is_zero(_sub(fr_bracket(h_diag, x), _scale(x, 2))):
        h = h_diag

    # Y is the unique solution of [X, Y] = H with ad(H) Y = -2 Y
    ad_h = _ad_matrix(h)
    stacked = []
    rhs = []
    h_coords = _coords(h)
    for i in range(dim):
        stacked.append(list(ad_x[i]))
        rhs.append(h_coords[i])
    for i in range(dim):
        row = list(ad_h[i])
        row[i] = row[i] + 2
        stacked.append(row)
        rhs.append(Fraction(0))
    y = solve_exact(stacked, rhs)
    if y is None:
        raise ValueError("no Y completes the triple; invalid nilpotent input")
    triple = Sl2Triple(h, x, _from_coords(y, n))
    if not triple.verify():
        raise ValueError("internal error: constructed triple fails bracket relations")
    return triple


# ---------------------------------------------------------------------------
# weight decomposition


@dataclass(frozen=True)
class WeightComponent:
    """One irreducible piece: highest weight n_i, chain basis w_0..w_(n_i)."""

    weight: int
    basis_coords: tuple  # tuple of coordinate tuples, length weight + 1

    @property
    def dimension(self) -> int:
        return self.weight + 1


@dataclass(frozen=True)
class WeightDecomposition:
    """Decomposition of the adjoint representation under an sl2-triple."""

    triple: Sl2Triple
    components: tuple  # tuple of WeightComponent
    _expansion_rows: tuple  # rows of the inverse change-of-basis matrix

    @property
    def n(self) -> int:
        return self.triple.n

    def component_matrices(self, i: int) -> list:
        """Chain basis of component i as exact matrices."""
        comp = self.components[i]
        return [_from_coords(c, self.n) for c in comp.basis_coords]

    def expand(self, v_coords) -> list:
        """Per-component coefficient lists of a vector given in the fixed basis."""
        dim = len(v_coords)
        coeffs = [
            sum((self._expansion_rows[i][j] * v_coords[j] for j in range(dim)), Fraction(0))
            for i in range(dim)
        ]
        out = []
        pos = 0
        for comp in self.components:
            out.append(coeffs[pos : pos + comp.dimension])
            pos += comp.dimension
        return out

    def to_json_dict(self) -> dict:
        return {
            "n": self.n,
            "triple": self.triple.to_json_dict(),
            "components": [
                {
                    "weight": comp.weight,
                    "basis": [
                        matrix_to_strings(_from_coords(c, self.n))
                        for c in comp.basis_coords
                    ],
                }
                for comp in self.components
            ],
        }


def decompose_adjoint(triple: Sl2Triple) -> WeightDecomposition:
    """Split sl_n into irreducible sl2-components under the triple.

    Eigenspaces of ad(H) are computed exactly for integer eigenvalues in
    [-2(n-1), 2(n-1)]; if their dimensions do not exhaust n^2 - 1 the triple
    does not act semisimply with integer weights and is rejected. Highest
    weight vectors are ker(ad X) inside each eigenspace; chains descend by
    ad(Y) with the normalization w_l = (ad Y)^l w_0 * (n_i - l)!/n_i!.
    """
    n = triple.n
    dim = n * n - 1
    ad_h = _ad_matrix(triple.h)
    ad_x = _ad_matrix(triple.x)
    max_weight = 2 * (n - 1)

    total = 0
    for lam in range(-max_weight, max_weight + 1):
        shifted = [
            [ad_h[i][j] - (lam if i == j else 0) for j in range(dim)] for i in range(dim)
        ]
        total += len(nullspace_exact(shifted))
    if total != dim:
        raise ValueError(
            "ad(H) is not semisimple with integer eigenvalues; invalid triple"
        )

    y_mat = triple.y
    components = []
    for lam in range(max_weight, -1, -1):
        shifted = [
            [ad_h[i][j] - (lam if i == j else 0) for j in range(dim)] for i in range(dim)
        ]
        stacked = [list(r) for r in ad_x] + [list(r) for r in shifted]
        for w0 in nullspace_exact(stacked):
            chain = [tuple(w0)]
            current = _from_coords(w0, n)
            for l in range(1, lam + 1):
                current = fr_bracket(y_mat, current)
                norm = Fraction(factorial(lam - l), factorial(lam))
                chain.append(_coords(_scale(current, norm)))
            components.append(WeightComponent(lam, tuple(chain)))

    if sum(c.dimension for c in components) != dim:
        raise ValueError("component dimensions do not sum to dim sl_n; invalid triple")

    # invert the change of basis exactly: columns are the chain vectors
    cols = [c for comp in components for c in comp.basis_coords]
    aug = [
        [cols[j][i] for j in range(dim)] + [Fraction(1) if k == i else Fraction(0) for k in range(dim)]
        for i in range(dim)
    ]
    pivots = _rref(aug)
    if len(pivots) != dim:
        raise ValueError("chain vectors do not form a basis; invalid triple")
    inverse_rows = tuple(tuple(row[dim:]) for row in aug)
    return WeightDecomposition(triple, tuple(components), inverse_rows)


# ---------------------------------------------------------------------------
# degrees


@dataclass(frozen=True)
class DegreeReport:
    """Degrees d_i(v) per component plus their maximum d(v).

    ``per_component[i]`` is the largest chain index l with a nonzero
    coefficient on component i, or None when v has no part there. ``d`` is
    the maximum over components, or None when v = 0 (the degenerate marker).
    """

    per_component: tuple
    d: int | None
    argmax: tuple

    @property
    def is_zero(self) -> bool:
        return self.d is None


def d_of_vector(decomp: WeightDecomposition, v) -> DegreeReport:
    """Exact degrees of v with respect to the weight decomposition.

    v may be an AlgebraElement (binary floats convert exactly), a matrix of
    rationals, or anything fr_matrix accepts.
    """
    m = fr_matrix(v)
    if len(m) != decomp.n:
        raise ValueError("dimension mismatch")
    if _trace(m) != 0:
        raise ValueError("v must be trace-zero")
    per_comp = decomp.expand(_coords(m))
    degrees = []
    for coeffs in per_comp:
        top = None
        for l, c in enumerate(coeffs):
            if c != 0:
                top = l
        degrees.append(top)
    defined = [d for d in degrees if d is not None]
    if not defined:
        return DegreeReport(tuple(degrees), None, ())
    d = max(defined)
    argmax = tuple(i for i, deg in enumerate(degrees) if deg == d)
    return DegreeReport(tuple(degrees), d, argmax)


def d_h_compute(decomp: WeightDecomposition, h_basis: Sequence) -> int:
    """d_H = max over basis vectors of d(v); the top-coefficient maps are
    linear, so the maximum over a spanning set equals the maximum over the
    subalgebra."""
    if not h_basis:
        raise ValueError("empty subalgebra basis")
    best = None
    for v in h_basis:
        report = d_of_vector(decomp, v)
        if report.d is not None and (best is None or report.d > best):
            best = report.d
    if best is None:
        raise ValueError("subalgebra basis consists of zero vectors")
    return best
