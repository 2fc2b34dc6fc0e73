"""Generalized tangent bundle machinery on a chart.

Sections are pairs X + a of a vector field and a 1-form.  The natural
split-signature pairing, the twisted Courant bracket, B-field transforms,
and generalized (almost) complex structures as 2n x 2n ring matrices all
live here, together with the algebraic, integrability, type and
generalized Kahler pair checks.

Sign conventions, fixed once and used everywhere:

  * pairing:  <X+a, Y+b> = (b(X) + a(Y)) / 2
  * bracket:  [X+a, Y+b]_H = [X,Y] + L_X b - L_Y a - d(i_X b - i_Y a)/2
              + i_Y i_X H          (contract H with X first, then Y)
  * transform: e^B (X+a) = X + a + i_X B

With these choices a B-transform carries an H-twisted structure to an
(H - dB)-twisted one; the identity
  [e^B u, e^B v]_{H - dB} = e^B [u, v]_H
is exact and is pinned down by tests.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .calculus import DiffForm, VectorField, lie_bracket
from .errors import ChartMismatchError, ValidationError
from .linalg import (
    Mat,
    RMat,
    is_positive_definite,
    rank,
    ring_inverse,
    rmat,
    rmat_add,
    rmat_eval,
    rmat_from_scalars,
    rmat_identity,
    rmat_is_zero,
    rmat_mul,
    rmat_scale,
    rmat_sub,
    rmat_transpose,
    rmat_zeros,
)
from .ring import Chart, EvalPoint, IMAG, RingElement, Scalar, ZERO

HALF = Scalar.of(Fraction(1, 2))


@dataclass(frozen=True)
class GenSection:
    """A section X + a of the generalized tangent bundle."""

    vector: VectorField
    form: DiffForm

    def __post_init__(self) -> None:
        if self.form.degree != 1:
            raise ValidationError("the form part of a section must be a 1-form")
        if self.vector.chart != self.form.chart:
            raise ChartMismatchError("vector and form parts live on different charts")

    @property
    def chart(self) -> Chart:
        return self.vector.chart

    @staticmethod
    def of(vector: VectorField | None = None, form: DiffForm | None = None,
           chart: Chart | None = None) -> "GenSection":
        if vector is None and form is None:
            if chart is None:
                raise ValidationError("empty section needs a chart")
            vector = VectorField.zero(chart)
        if vector is None:
            vector = VectorField.zero(form.chart)
        if form is None:
            form = DiffForm.zero(vector.chart, 1)
        return GenSection(vector, form)

    def __add__(self, other: "GenSection") -> "GenSection":
        return GenSection(self.vector + other.vector, self.form + other.form)

    def __sub__(self, other: "GenSection") -> "GenSection":
        return GenSection(self.vector - other.vector, self.form - other.form)

    def __neg__(self) -> "GenSection":
        return GenSection(-self.vector, -self.form)

    def scale(self, f) -> "GenSection":
        return GenSection(self.vector.scale(f), self.form.scale(f))

    def conj(self) -> "GenSection":
        return GenSection(self.vector.conj(), self.form.conj())

    @property
    def is_zero(self) -> bool:
        return self.vector.is_zero and self.form.is_zero

    def column(self) -> tuple[RingElement, ...]:
        """Components as a length-2n column: vector entries, then covector
        entries in the coordinate coframe."""
        chart = self.chart
        covector = [RingElement.zero(chart) for _ in range(chart.dim)]
        for (i,), coeff in self.form.terms.items():
            covector[i] = coeff
        return tuple(self.vector.components) + tuple(covector)

    def evaluate(self, point: EvalPoint) -> tuple[Scalar, ...]:
        return tuple(c.evaluate(point) for c in self.column())

    def __str__(self) -> str:
        return f"{self.vector} (+) {self.form}"


def section_from_column(chart: Chart, col: Sequence[RingElement]) -> GenSection:
    n = chart.dim
    if len(col) != 2 * n:
        raise ValidationError("column length is not twice the chart dimension")
    vector = VectorField(chart, tuple(col[:n]))
    form = DiffForm(chart, 1, {(i,): col[n + i] for i in range(n)})
    return GenSection(vector, form)


def standard_frame(chart: Chart) -> tuple[GenSection, ...]:
    """The 2n coordinate sections: d_x1 ... d_xn, dx1 ... dxn."""
    out = []
    for name in chart.names:
        out.append(GenSection.of(vector=VectorField.coordinate(chart, name)))
    for name in chart.names:
        out.append(GenSection.of(form=DiffForm.d_coord(chart, name)))
    return tuple(out)


def pairing(u: GenSection, v: GenSection) -> RingElement:
    """The split-signature pairing <X+a, Y+b> = (b(X) + a(Y))/2."""
    left = v.form.apply([u.vector])
    right = u.form.apply([v.vector])
    return (left + right).scale(HALF)


def pairing_matrix(n: int) -> Mat:
    """Gram matrix of the pairing in the standard frame: off-diagonal
    identity blocks scaled by one half."""
    rows = []
    for i in range(2 * n):
        row = [ZERO] * (2 * n)
        j = i + n if i < n else i - n
        row[j] = HALF
        rows.append(tuple(row))
    return tuple(rows)


def courant_bracket(u: GenSection, v: GenSection, twist: DiffForm) -> GenSection:
    """The twisted Courant bracket of two sections."""
    if twist.degree != 3:
        raise ValidationError("twist must be a 3-form")
    x, a = u.vector, u.form
    y, b = v.vector, v.form
    vector = lie_bracket(x, y)
    ixb = b.interior(x)
    iya = a.interior(y)
    form = (
        b.lie(x)
        - a.lie(y)
        - (ixb - iya).d().scale(HALF)
        + twist.interior(x).interior(y)
    )
    return GenSection(vector, form)


def b_transform_section(b_field: DiffForm, u: GenSection) -> GenSection:
    """e^B (X + a) = X + a + i_X B."""
    if b_field.degree != 2:
        raise ValidationError("a B-field is a 2-form")
    return GenSection(u.vector, u.form + b_field.interior(u.vector))


# --- matrices of geometric operators --------------------------------------


def two_form_rmatrix(b_field: DiffForm) -> RMat:
    """R[i][j] = B(d_i, d_j) as a ring matrix."""
    if b_field.degree != 2:
        raise ValidationError("expected a 2-form")
    chart = b_field.chart
    n = chart.dim
    grid = [[RingElement.zero(chart) for _ in range(n)] for _ in range(n)]
    for (i, j), coeff in b_field.terms.items():
        grid[i][j] = coeff
        grid[j][i] = -coeff
    return rmat(grid)


def interior_operator(b_field: DiffForm) -> RMat:
    """Matrix of X -> i_X B on components: the transpose of two_form_rmatrix."""
    return rmat_transpose(two_form_rmatrix(b_field))


def _block(chart: Chart, ul: RMat, ur: RMat, ll: RMat, lr: RMat) -> RMat:
    top = tuple(ul[i] + ur[i] for i in range(len(ul)))
    bottom = tuple(ll[i] + lr[i] for i in range(len(ll)))
    return top + bottom


def b_exponential(b_field: DiffForm) -> RMat:
    """The 2n x 2n matrix of e^B in the standard frame."""
    chart = b_field.chart
    n = chart.dim
    return _block(
        chart,
        rmat_identity(chart, n),
        rmat_zeros(chart, n, n),
        interior_operator(b_field),
        rmat_identity(chart, n),
    )


# --- generalized structures ------------------------------------------------


@dataclass(frozen=True)
class GenStructure:
    """A generalized almost complex structure with its background twist.

    The matrix acts on columns (vector components, covector components).
    The twist is a real closed 3-form; closedness and realness are
    enforced here so every downstream check may rely on them.
    """

    chart: Chart
    matrix: RMat
    twist: DiffForm

    def __post_init__(self) -> None:
        n = self.chart.dim
        if len(self.matrix) != 2 * n or any(len(r) != 2 * n for r in self.matrix):
            raise ValidationError("structure matrix must be 2n x 2n")
        for row in self.matrix:
            for entry in row:
                if entry.chart != self.chart:
                    raise ChartMismatchError("matrix entry over a different chart")
        if self.twist.degree != 3:
            raise ValidationError("twist must be a 3-form")
        if self.twist.chart != self.chart:
            raise ChartMismatchError("twist over a different chart")
        if not self.twist.is_real:
            raise ValidationError("twist must be real")
        if not self.twist.d().is_zero:
            raise ValidationError("twist is not closed")

    @property
    def dim(self) -> int:
        return self.chart.dim

    def apply(self, u: GenSection) -> GenSection:
        col = u.column()
        out = []
        for row in self.matrix:
            total = RingElement.zero(self.chart)
            for entry, comp in zip(row, col):
                if entry.is_zero or comp.is_zero:
                    continue
                total = total + entry * comp
            out.append(total)
        return section_from_column(self.chart, out)

    def eigenprojector(self) -> RMat:
        """P = (Id - i J)/2, projecting onto the +i eigenbundle."""
        n2 = 2 * self.chart.dim
        ident = rmat_identity(self.chart, n2)
        return rmat_scale(rmat_sub(ident, rmat_scale(self.matrix, IMAG)), HALF)


def zero_twist(chart: Chart) -> DiffForm:
    return DiffForm.zero(chart, 3)


def symplectic_structure(omega: DiffForm, twist: DiffForm | None = None) -> GenStructure:
    """The generalized structure of a symplectic form:
    X + a  ->  omega^{-1}(a) - i_X omega.

    The form must be real, closed and have an exactly invertible
    coefficient matrix.
    """
    if omega.degree != 2:
        raise ValidationError("a symplectic form is a 2-form")
    if not omega.is_real:
        raise ValidationError("symplectic form must be real")
    if not omega.d().is_zero:
        raise ValidationError("symplectic form is not closed")
    chart = omega.chart
    op = interior_operator(omega)
    try:
        op_inv = ring_inverse(op)
    except ValidationError as exc:
        raise ValidationError(f"symplectic form is not invertible: {exc}") from exc
    n = chart.dim
    matrix = _block(
        chart,
        rmat_zeros(chart, n, n),
        op_inv,
        rmat_scale(op, Scalar.of(-1)),
        rmat_zeros(chart, n, n),
    )
    return GenStructure(chart, matrix, twist if twist is not None else zero_twist(chart))


def complex_structure(jmat: RMat, chart: Chart, twist: DiffForm | None = None) -> GenStructure:
    """The generalized structure of an almost complex structure J on the
    tangent bundle:  X + a  ->  -J X + J^T a."""
    n = chart.dim
    if len(jmat) != n or any(len(r) != n for r in jmat):
        raise ValidationError("J must be n x n")
    square = rmat_mul(jmat, jmat)
    if not rmat_is_zero(rmat_add(square, rmat_identity(chart, n))):
        raise ValidationError("J does not square to minus the identity")
    matrix = _block(
        chart,
        rmat_scale(jmat, Scalar.of(-1)),
        rmat_zeros(chart, n, n),
        rmat_zeros(chart, n, n),
        rmat_transpose(jmat),
    )
    return GenStructure(chart, matrix, twist if twist is not None else zero_twist(chart))


def b_transform_structure(b_field: DiffForm, struct: GenStructure) -> GenStructure:
    """Conjugate by e^B.  The twist drops by dB: an H-twisted structure
    becomes (H - dB)-twisted, matching the bracket identity
    [e^B u, e^B v]_{H-dB} = e^B [u,v]_H."""
    if b_field.chart != struct.chart:
        raise ChartMismatchError("B-field over a different chart")
    if not b_field.is_real:
        raise ValidationError("B-field must be real")
    e_plus = b_exponential(b_field)
    e_minus = b_exponential(-b_field)
    matrix = rmat_mul(e_plus, rmat_mul(struct.matrix, e_minus))
    return GenStructure(struct.chart, matrix, struct.twist - b_field.d())


# --- checks -----------------------------------------------------------------


def check_algebraic(struct: GenStructure) -> tuple[bool, str]:
    """Real, squares to -Id, and preserves the pairing."""
    chart = struct.chart
    n2 = 2 * chart.dim
    for row in struct.matrix:
        for entry in row:
            if not entry.is_real:
                return False, "matrix has a non-real entry"
    ident = rmat_identity(chart, n2)
    if not rmat_is_zero(rmat_add(rmat_mul(struct.matrix, struct.matrix), ident)):
        return False, "matrix does not square to minus the identity"
    gram = rmat_from_scalars(chart, pairing_matrix(chart.dim))
    lhs = rmat_mul(rmat_transpose(struct.matrix), rmat_mul(gram, struct.matrix))
    if not rmat_is_zero(rmat_sub(lhs, gram)):
        return False, "matrix does not preserve the pairing"
    return True, "real, squares to -Id, preserves the pairing"


def plus_i_frame(struct: GenStructure) -> tuple[GenSection, ...]:
    """Spanning sections of the +i eigenbundle: the projector applied to
    the standard frame."""
    proj = struct.eigenprojector()
    cols = []
    for e in standard_frame(struct.chart):
        col = e.column()
        out = []
        for row in proj:
            total = RingElement.zero(struct.chart)
            for entry, comp in zip(row, col):
                if entry.is_zero or comp.is_zero:
                    continue
                total = total + entry * comp
            out.append(total)
        cols.append(section_from_column(struct.chart, out))
    return tuple(cols)


def check_integrable(
    struct: GenStructure, points: Sequence[EvalPoint] = ()
) -> tuple[bool, str]:
    """Courant involutivity of the +i eigenbundle against the twist.

    The projector is checked to be idempotent, the eigenbundle rank is
    checked at the sample points, and every bracket of spanning sections
    is required to stay inside the eigenbundle (zero residual under the
    opposite projector).  For an isotropic subbundle this spanning-set
    computation settles involutivity for all sections.
    """
    chart = struct.chart
    n = chart.dim
    proj = struct.eigenprojector()
    if not rmat_is_zero(rmat_sub(rmat_mul(proj, proj), proj)):
        return False, "eigenprojector is not idempotent"
    for p in points:
        if rank(rmat_eval(proj, p)) != n:
            return False, f"eigenbundle rank is not {n} at {p}"
    frame = plus_i_frame(struct)
    n2 = 2 * n
    ident = rmat_identity(chart, n2)
    anti = rmat_sub(ident, proj)  # projector onto the -i eigenbundle
    for a in range(n2):
        if frame[a].is_zero:
            continue
        for b in range(a + 1, n2):
            if frame[b].is_zero:
                continue
            w = courant_bracket(frame[a], frame[b], struct.twist)
            col = w.column()
            for row in anti:
                total = RingElement.zero(chart)
                for entry, comp in zip(row, col):
                    if entry.is_zero or comp.is_zero:
                        continue
                    total = total + entry * comp
                if not total.is_zero:
                    return (
                        False,
                        f"bracket of frame sections {a} and {b} leaves the "
                        f"eigenbundle (residual component {total})",
                    )
    return True, "eigenbundle is involutive for the twisted bracket"


def type_at(struct: GenStructure, point: EvalPoint) -> int:
    """Type at a point: half the corank of the upper-right block.

    The upper-right n x n block of the structure matrix is the map taking
    a covector to the tangent projection of its image; the projection of
    the +i eigenbundle has complex dimension n minus half that block's
    rank ... concretely the type is (n - rank) / 2 and parity is enforced.
    """
    n = struct.chart.dim
    block = tuple(
        tuple(struct.matrix[i][n + j].evaluate(point) for j in range(n))
        for i in range(n)
    )
    r = rank(block)
    if (n - r) % 2 != 0:
        raise ValidationError(f"type parity violated at {point}: corank {n - r}")
    return (n - r) // 2


def check_gk_pair(
    j1: GenStructure, j2: GenStructure, points: Sequence[EvalPoint]
) -> tuple[bool, str]:
    """Commuting structures with a positive definite product metric.

    Positivity of the pairing restricted to the +1 eigenbundle of
    G = -J1 J2 is equivalent to positive definiteness of (gram . G),
    which is tested at every sample point through its leading principal
    minors; a zero minor is reported as non-positive.
    """
    if j1.chart != j2.chart:
        return False, "structures live on different charts"
    if j1.twist != j2.twist:
        return False, "structures carry different twists"
    chart = j1.chart
    prod = rmat_mul(j1.matrix, j2.matrix)
    if not rmat_is_zero(rmat_sub(prod, rmat_mul(j2.matrix, j1.matrix))):
        return False, "structures do not commute"
    g_op = rmat_scale(prod, Scalar.of(-1))
    n2 = 2 * chart.dim
    if not rmat_is_zero(rmat_sub(rmat_mul(g_op, g_op), rmat_identity(chart, n2))):
        return False, "product operator does not square to the identity"
    gram_ring = rmat_from_scalars(chart, pairing_matrix(chart.dim))
    metric = rmat_mul(gram_ring, g_op)
    if not rmat_is_zero(rmat_sub(metric, rmat_transpose(metric))):
        return False, "product metric is not symmetric"
    if not points:
        return False, "positivity needs at least one sample point"
    for p in points:
        value = rmat_eval(metric, p)
        ok, minors = is_positive_definite(value)
        if not ok:
            bad = next(i for i, m in enumerate(minors) if m.im != 0 or m.re <= 0)
            return (
                False,
                f"product metric not positive definite at {p}: leading minor "
                f"{bad + 1} is {minors[bad]} (non-positive)",
            )
    return True, "commuting pair with positive definite product metric"
