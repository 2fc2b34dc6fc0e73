"""Exact linear algebra over Gaussian rationals and over the function ring.

Scalar matrices are tuples of tuples of Scalar and support the usual
elimination toolkit: reduced row echelon form, rank, nullspace, solving,
inversion, determinants, subspace comparisons, and signatures of real
symmetric matrices.  Everything is exact; no pivot thresholds exist.

Ring matrices hold RingElement entries.  They multiply, differentiate
nothing, and invert only when the determinant is an invertible constant,
which is what chart-wide inversion of a symplectic form requires.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Callable, Sequence

from .errors import ValidationError
from .ring import Chart, EvalPoint, ONE, RingElement, Scalar, ZERO

Vec = tuple[Scalar, ...]
Mat = tuple[Vec, ...]


# --- construction and arithmetic ---------------------------------------


def mat(rows: Sequence[Sequence[Scalar]]) -> Mat:
    return tuple(tuple(row) for row in rows)


def zeros(r: int, c: int) -> Mat:
    return tuple((ZERO,) * c for _ in range(r))


def identity(n: int) -> Mat:
    return tuple(
        tuple(ONE if i == j else ZERO for j in range(n)) for i in range(n)
    )


def transpose(m: Mat) -> Mat:
    if not m:
        return ()
    return tuple(tuple(m[i][j] for i in range(len(m))) for j in range(len(m[0])))


def mat_add(a: Mat, b: Mat) -> Mat:
    return tuple(tuple(x + y for x, y in zip(ra, rb)) for ra, rb in zip(a, b))

def mat_sub(a: Mat, b: Mat) -> Mat:
    return tuple(tuple(x - y for x, y in zip(ra, rb)) for ra, rb in zip(a, b))


def mat_scale(a: Mat, s: Scalar) -> Mat:
    return tuple(tuple(x * s for x in row) for row in a)


def mat_mul(a: Mat, b: Mat) -> Mat:
    if a and b and len(a[0]) != len(b):
        raise ValidationError("matrix shapes do not compose")
    bt = transpose(b)
    return tuple(
        tuple(_dot(row, col) for col in bt) for row in a
    )


def _dot(u: Sequence[Scalar], v: Sequence[Scalar]) -> Scalar:
    total = ZERO
    for x, y in zip(u, v):
        total = total + x * y
    return total


def mat_vec(a: Mat, v: Vec) -> Vec:
    return tuple(_dot(row, v) for row in a)


def mat_conj(a: Mat) -> Mat:
    return tuple(tuple(x.conj() for x in row) for row in a)


def mat_eq(a: Mat, b: Mat) -> bool:
    return a == b


def is_zero_mat(a: Mat) -> bool:
    return all(x.is_zero for row in a for x in row)


# --- elimination --------------------------------------------------------


def rref(m: Mat) -> tuple[Mat, tuple[int, ...]]:
    """Reduced row echelon form with its pivot columns."""
    rows = [list(r) for r in m]
    nr = len(rows)
    nc = len(rows[0]) if rows else 0
    pivots: list[int] = []
    r = 0
    for c in range(nc):
        pivot = next((i for i in range(r, nr) if rows[i][c]), None)
        if pivot is None:
            continue
        rows[r], rows[pivot] = rows[pivot], rows[r]
        inv = rows[r][c].inverse()
        rows[r] = [x * inv for x in rows[r]]
        for i in range(nr):
            if i != r and rows[i][c]:
                factor = rows[i][c]
                rows[i] = [x - factor * y for x, y in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
        if r == nr:
            break
    return mat(rows), tuple(pivots)


def rank(m: Mat) -> int:
    return len(rref(m)[1])


def nullspace(m: Mat) -> tuple[Vec, ...]:
    """Basis of the right nullspace {v : m v = 0}."""
    if not m:
        return ()
    reduced, pivots = rref(m)
    nc = len(m[0])
    free = [c for c in range(nc) if c not in pivots]
    basis: list[Vec] = []
    for f in free:
        v = [ZERO] * nc
        v[f] = ONE
        for r, c in enumerate(pivots):
            v[c] = -reduced[r][f]
        basis.append(tuple(v))
    return tuple(basis)


def solve(a: Mat, b: Vec) -> Vec | None:
    """One solution of a x = b, or None when inconsistent."""
    nc = len(a[0]) if a else 0
    augmented = tuple(row + (bv,) for row, bv in zip(a, b))
    reduced, pivots = rref(augmented)
    if nc in pivots:
        return None
    x = [ZERO] * nc
    for r, c in enumerate(pivots):
        x[c] = reduced[r][nc]
    return tuple(x)


def det(m: Mat) -> Scalar:
    n = len(m)
    rows = [list(r) for r in m]
    sign = ONE
    out = ONE
    for c in range(n):
        pivot = next((i for i in range(c, n) if rows[i][c]), None)
        if pivot is None:
            return ZERO
        if pivot != c:
            rows[c], rows[pivot] = rows[pivot], rows[c]
            sign = -sign
        out = out * rows[c][c]
        inv = rows[c][c].inverse()
        for i in range(c + 1, n):
            if rows[i][c]:
                factor = rows[i][c] * inv
                rows[i] = [x - factor * y for x, y in zip(rows[i], rows[c])]
    return out * sign


def inverse(m: Mat) -> Mat:
    n = len(m)
    augmented = tuple(row + identity(n)[i] for i, row in enumerate(m))
    reduced, pivots = rref(augmented)
    if pivots != tuple(range(n)):
        raise ValidationError("matrix is singular")
    return tuple(row[n:] for row in reduced)


# --- subspaces ----------------------------------------------------------


def row_space_basis(rows: Sequence[Vec]) -> tuple[Vec, ...]:
    """Canonical basis of the span of the given vectors (rref rows).

    Two spans are equal exactly when their canonical bases are equal.
    """
    if not rows:
        return ()
    reduced, pivots = rref(mat(rows))
    return tuple(reduced[i] for i in range(len(pivots)))


def span_contains(rows: Sequence[Vec], v: Vec) -> bool:
    if not rows:
        return all(x.is_zero for x in v)
    base = mat(rows)
    return rank(base) == rank(base + (v,))


def span_eq(a: Sequence[Vec], b: Sequence[Vec]) -> bool:
    return row_space_basis(a) == row_space_basis(b)


def intersect_spans(a: Sequence[Vec], b: Sequence[Vec]) -> tuple[Vec, ...]:
    """Canonical basis of span(a) ∩ span(b)."""
    if not a or not b:
        return ()
    nc = len(a[0])
    # Columns are the coefficient unknowns (s, t); rows enforce
    # sum_i s_i a_i - sum_j t_j b_j = 0 componentwise.
    system = tuple(
        tuple(a[i][c] for i in range(len(a)))
        + tuple(-b[j][c] for j in range(len(b)))
        for c in range(nc)
    )
    out: list[Vec] = []
    for coeffs in nullspace(system):
        v = [ZERO] * nc
        for i in range(len(a)):
            for c in range(nc):
                v[c] = v[c] + coeffs[i] * a[i][c]
        out.append(tuple(v))
    return row_space_basis(out)


def extend_basis(rows: Sequence[Vec], candidates: Sequence[Vec]) -> tuple[int, ...]:
    """Indices of candidates that extend rows to a larger independent set,
    greedily in order, until no candidate adds rank."""
    current = list(rows)
    have = rank(mat(current)) if current else 0
    chosen: list[int] = []
    for i, v in enumerate(candidates):
        trial = current + [list(v)]
        if rank(mat(trial)) > have:
            current = trial
            have += 1
            chosen.append(i)
    return tuple(chosen)


# --- real symmetric forms ------------------------------------------------


def _real_entries(m: Mat) -> list[list[Fraction]]:
    out: list[list[Fraction]] = []
    for row in m:
        line: list[Fraction] = []
        for x in row:
            if x.im != 0:
                raise ValidationError("matrix entry is not real")
            line.append(x.re)
        out.append(line)
    return out


def symmetric_signature(m: Mat) -> tuple[int, int, int]:
    """(positive, negative, zero) inertia of a real symmetric matrix,
    computed by exact congruence reduction."""
    work = _real_entries(m)
    n = len(work)
    for i in range(n):
        for j in range(n):
            if work[i][j] != work[j][i]:
                raise ValidationError("matrix is not symmetric")

    def go(a: list[list[Fraction]]) -> tuple[int, int, int]:
        k = len(a)
        if k == 0:
            return (0, 0, 0)
        d = next((i for i in range(k) if a[i][i] != 0), None)
        if d is None:
            od = next(
                ((i, j) for i in range(k) for j in range(i + 1, k) if a[i][j] != 0),
                None,
            )
            if od is None:
                return (0, 0, k)
            i, j = od
            for c in range(k):
                a[i][c] += a[j][c]
            for r in range(k):
                a[r][i] += a[r][j]
            return go(a)
        pivot = a[d][d]
        rest = [i for i in range(k) if i != d]
        reduced = [
            [a[i][j] - a[i][d] * a[d][j] / pivot for j in rest] for i in rest
        ]
        p, ng, z = go(reduced)
        return (p + 1, ng, z) if pivot > 0 else (p, ng + 1, z)

    return go(work)


def leading_principal_minors(m: Mat) -> tuple[Scalar, ...]:
    n = len(m)
    return tuple(det(tuple(row[: k + 1] for row in m[: k + 1])) for k in range(n))


def is_positive_definite(m: Mat) -> tuple[bool, tuple[Scalar, ...]]:
    """Sylvester test on a real symmetric matrix; returns the verdict with
    the leading principal minors as witnesses."""
    _real_entries(m)  # validates realness
    minors = leading_principal_minors(m)
    ok = all(mi.im == 0 and mi.re > 0 for mi in minors)
    return ok, minors


# --- matrices over the function ring -------------------------------------

RMat = tuple[tuple[RingElement, ...], ...]


def rmat(rows: Sequence[Sequence[RingElement]]) -> RMat:
    return tuple(tuple(row) for row in rows)


def rmat_from_scalars(chart: Chart, m: Mat) -> RMat:
    return tuple(
        tuple(RingElement.constant(chart, x) for x in row) for row in m
    )


def rmat_identity(chart: Chart, n: int) -> RMat:
    one = RingElement.one(chart)
    zero = RingElement.zero(chart)
    return tuple(
        tuple(one if i == j else zero for j in range(n)) for i in range(n)
    )


def rmat_zeros(chart: Chart, r: int, c: int) -> RMat:
    zero = RingElement.zero(chart)
    return tuple((zero,) * c for _ in range(r))


def rmat_add(a: RMat, b: RMat) -> RMat:
    return tuple(tuple(x + y for x, y in zip(ra, rb)) for ra, rb in zip(a, b))


def rmat_sub(a: RMat, b: RMat) -> RMat:
    return tuple(tuple(x - y for x, y in zip(ra, rb)) for ra, rb in zip(a, b))


def rmat_scale(a: RMat, s: Scalar) -> RMat:
    return tuple(tuple(x.scale(s) for x in row) for row in a)


def rmat_mul(a: RMat, b: RMat) -> RMat:
    if a and b and len(a[0]) != len(b):
        raise ValidationError("matrix shapes do not compose")
    out = []
    for row in a:
        line = []
        for j in range(len(b[0]) if b else 0):
            total = None
            for k in range(len(b)):
                piece = row[k] * b[k][j]
                total = piece if total is None else total + piece
            line.append(total)
        out.append(tuple(line))
    return tuple(out)


def rmat_transpose(m: RMat) -> RMat:
    if not m:
        return ()
    return tuple(tuple(m[i][j] for i in range(len(m))) for j in range(len(m[0])))


def rmat_is_zero(m: RMat) -> bool:
    return all(x.is_zero for row in m for x in row)


def rmat_eval(m: RMat, point: EvalPoint) -> Mat:
    return tuple(tuple(x.evaluate(point) for x in row) for row in m)


def rmat_map(m: RMat, f: Callable[[RingElement], RingElement]) -> RMat:
    return tuple(tuple(f(x) for x in row) for row in m)


def ring_det(m: RMat) -> RingElement:
    n = len(m)
    if n == 0:
        raise ValidationError("determinant of an empty matrix")
    chart = m[0][0].chart
    if n == 1:
        return m[0][0]
    total = RingElement.zero(chart)
    for j in range(n):
        if m[0][j].is_zero:
            continue
        minor = tuple(row[:j] + row[j + 1 :] for row in m[1:])
        piece = m[0][j] * ring_det(minor)
        total = total + piece if j % 2 == 0 else total - piece
    return total


def ring_inverse(m: RMat) -> RMat:
    """Inverse of a ring matrix whose determinant is a nonzero constant.

    A chart-wide inverse only exists when the determinant is a unit; this
    workbench needs the constant-determinant case (symplectic forms given
    by constant-coefficient matrices) and refuses anything else.
    """
    n = len(m)
    d = ring_det(m)
    if not d.is_constant() or d.is_zero:
        raise ValidationError(
            "matrix determinant is not an invertible constant; "
            "no chart-wide inverse"
        )
    dinv = d.constant_value().inverse()
    chart = m[0][0].chart
    cof = []
    for i in range(n):
        line = []
        for j in range(n):
            minor = tuple(
                row[:j] + row[j + 1 :]
                for r, row in enumerate(m)
                if r != i
            )
            entry = ring_det(minor) if n > 1 else RingElement.one(chart)
            if (i + j) % 2 == 1:
                entry = -entry
            line.append(entry)
        cof.append(tuple(line))
    adjugate = rmat_transpose(tuple(cof))
    return rmat_scale(adjugate, dinv)
