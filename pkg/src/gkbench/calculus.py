"""Vector fields, differential forms, and chart maps with exact coefficients.

Forms are sparse: a k-form stores a map from strictly increasing index
tuples (i1 < ... < ik) to ring coefficients.  The exterior derivative,
interior product (contraction in the first slot), wedge product, Lie
derivative and Lie bracket are all implemented directly from their
coordinate formulas, so identities like the Cartan magic formula stay
honest test material instead of definitions.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence, Union

from .errors import ChartMismatchError, ValidationError
from .linalg import Mat, rmat, ring_det
from .ring import Chart, EvalPoint, RingElement, Scalar, PERIODIC, ZERO, quarter_phase

Index = tuple[int, ...]


@dataclass(frozen=True)
class VectorField:
    """A vector field written in the coordinate frame of its chart."""

    chart: Chart
    components: tuple[RingElement, ...]

    def __post_init__(self) -> None:
        if len(self.components) != self.chart.dim:
            raise ValidationError("component count does not match chart")
        for c in self.components:
            if c.chart != self.chart:
                raise ChartMismatchError("component over a different chart")

    @staticmethod
    def zero(chart: Chart) -> "VectorField":
        return VectorField(chart, tuple(RingElement.zero(chart) for _ in range(chart.dim)))

    @staticmethod
    def coordinate(chart: Chart, name: str) -> "VectorField":
        i = chart.index(name)
        return VectorField(
            chart,
            tuple(
                RingElement.one(chart) if j == i else RingElement.zero(chart)
                for j in range(chart.dim)
            ),
        )

    def __add__(self, other: "VectorField") -> "VectorField":
        _same_chart(self.chart, other.chart)
        return VectorField(
            self.chart, tuple(a + b for a, b in zip(self.components, other.components))
        )

    def __sub__(self, other: "VectorField") -> "VectorField":
        return self + (-other)

    def __neg__(self) -> "VectorField":
        return VectorField(self.chart, tuple(-c for c in self.components))

    def scale(self, f: Union[RingElement, Scalar]) -> "VectorField":
        if isinstance(f, Scalar):
            return VectorField(self.chart, tuple(c.scale(f) for c in self.components))
        return VectorField(self.chart, tuple(f * c for c in self.components))

    def apply(self, f: RingElement) -> RingElement:
        """Directional derivative X(f)."""
        if f.chart != self.chart:
            raise ChartMismatchError("function over a different chart")
        total = RingElement.zero(self.chart)
        for i, comp in enumerate(self.components):
            if comp.is_zero:
                continue
            total = total + comp * f.partial(self.chart.names[i])
        return total

    def conj(self) -> "VectorField":
        return VectorField(self.chart, tuple(c.conj() for c in self.components))

    @property
    def is_zero(self) -> bool:
        return all(c.is_zero for c in self.components)

    def evaluate(self, point: EvalPoint) -> tuple[Scalar, ...]:
        return tuple(c.evaluate(point) for c in self.components)

    def __str__(self) -> str:
        parts = []
        for i, c in enumerate(self.components):
            if c.is_zero:
                continue
            parts.append(f"({c})*d_{self.chart.names[i]}")
        return " + ".join(parts) if parts else "0"


def lie_bracket(x: VectorField, y: VectorField) -> VectorField:
    """[X, Y] with components X(Y^i) - Y(X^i)."""
    _same_chart(x.chart, y.chart)
    return VectorField(
        x.chart,
        tuple(x.apply(yc) - y.apply(xc) for xc, yc in zip(x.components, y.components)),
    )


def _same_chart(a: Chart, b: Chart) -> None:
    if a != b:
        raise ChartMismatchError(f"charts differ: {a} vs {b}")


def _merge_sign(left: Index, right: Index) -> tuple[Index, int]:
    """Sort the concatenation of two strictly increasing tuples, counting
    inversions; returns (None, 0) stand-in via ValueError on repeats."""
    merged = list(left)
    sign = 1
    for r in right:
        pos = len(merged)
        for i, v in enumerate(merged):
            if v == r:
                raise ValueError("repeated index")
            if v > r:
                pos = i
                break
        sign *= (-1) ** (len(merged) - pos)
        merged.insert(pos, r)
    return tuple(merged), sign


class DiffForm:
    """A differential form of fixed degree with sparse exact coefficients."""

    __slots__ = ("chart", "degree", "terms")

    def __init__(self, chart: Chart, degree: int, terms: Mapping[Index, RingElement]) -> None:
        if degree < 0:
            raise ValidationError("negative form degree")
        clean: dict[Index, RingElement] = {}
        for idx, coeff in terms.items():
            if len(idx) != degree:
                raise ValidationError("index arity does not match degree")
            if any(idx[i] >= idx[i + 1] for i in range(len(idx) - 1)):
                raise ValidationError("indices must be strictly increasing")
            if idx and (idx[0] < 0 or idx[-1] >= chart.dim):
                raise ValidationError("index out of chart range")
            if coeff.chart != chart:
                raise ChartMismatchError("coefficient over a different chart")
            if not coeff.is_zero:
                clean[idx] = coeff
        self.chart = chart
        self.degree = degree
        self.terms = clean

    # --- constructors ----------------------------------------------------

    @staticmethod
    def zero(chart: Chart, degree: int) -> "DiffForm":
        return DiffForm(chart, degree, {})

    @staticmethod
    def function(f: RingElement) -> "DiffForm":
        return DiffForm(f.chart, 0, {(): f})

    @staticmethod
    def d_coord(chart: Chart, name: str) -> "DiffForm":
        return DiffForm(chart, 1, {(chart.index(name),): RingElement.one(chart)})

    # --- linear structure --------------------------------------------------

    def __add__(self, other: "DiffForm") -> "DiffForm":
        _same_chart(self.chart, other.chart)
        if self.degree != other.degree:
            raise ValidationError("cannot add forms of different degree")
        out = dict(self.terms)
        for idx, coeff in other.terms.items():
            cur = out.get(idx)
            out[idx] = coeff if cur is None else cur + coeff
        return DiffForm(self.chart, self.degree, out)

    def __sub__(self, other: "DiffForm") -> "DiffForm":
        return self + (-other)

    def __neg__(self) -> "DiffForm":
        return DiffForm(self.chart, self.degree, {i: -c for i, c in self.terms.items()})

    def scale(self, f: Union[RingElement, Scalar]) -> "DiffForm":
        if isinstance(f, Scalar):
            return DiffForm(
                self.chart, self.degree, {i: c.scale(f) for i, c in self.terms.items()}
            )
        return DiffForm(self.chart, self.degree, {i: f * c for i, c in self.terms.items()})

    def conj(self) -> "DiffForm":
        return DiffForm(self.chart, self.degree, {i: c.conj() for i, c in self.terms.items()})

    @property
    def is_zero(self) -> bool:
        return not self.terms

    @property
    def is_real(self) -> bool:
        return self == self.conj()

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, DiffForm):
            return NotImplemented
        return (
            self.chart == other.chart
            and self.degree == other.degree
            and self.terms == other.terms
        )

    __hash__ = None  # type: ignore[assignment]

    # --- the calculus ------------------------------------------------------

    def wedge(self, other: "DiffForm") -> "DiffForm":
        _same_chart(self.chart, other.chart)
        out: dict[Index, RingElement] = {}
        for i1, c1 in self.terms.items():
            for i2, c2 in other.terms.items():
                try:
                    merged, sign = _merge_sign(i1, i2)
                except ValueError:
                    continue
                piece = c1 * c2
                if sign < 0:
                    piece = -piece
                cur = out.get(merged)
                out[merged] = piece if cur is None else cur + piece
        return DiffForm(self.chart, self.degree + other.degree, out)

    def d(self) -> "DiffForm":
        """Exterior derivative."""
        out: dict[Index, RingElement] = {}
        names = self.chart.names
        for idx, coeff in self.terms.items():
            for i in range(self.chart.dim):
                if i in idx:
                    continue
                dcoeff = coeff.partial(names[i])
                if dcoeff.is_zero:
                    continue
                merged, sign = _merge_sign((i,), idx)
                piece = dcoeff if sign > 0 else -dcoeff
                cur = out.get(merged)
                out[merged] = piece if cur is None else cur + piece
        return DiffForm(self.chart, self.degree + 1, out)

    def interior(self, x: VectorField) -> "DiffForm":
        """Contraction in the first slot."""
        _same_chart(self.chart, x.chart)
        if self.degree == 0:
            raise ValidationError("cannot contract a 0-form")
        out: dict[Index, RingElement] = {}
        for idx, coeff in self.terms.items():
            for pos, i in enumerate(idx):
                comp = x.components[i]
                if comp.is_zero:
                    continue
                piece = comp * coeff
                if pos % 2 == 1:
                    piece = -piece
                rest = idx[:pos] + idx[pos + 1 :]
                cur = out.get(rest)
                out[rest] = piece if cur is None else cur + piece
        return DiffForm(self.chart, self.degree - 1, out)

    def lie(self, x: VectorField) -> "DiffForm":
        """Lie derivative along x, computed term by term from the
        derivation rule (not from the Cartan formula, which stays a
        theorem to test against)."""
        _same_chart(self.chart, x.chart)
        out = DiffForm.zero(self.chart, self.degree)
        names = self.chart.names
        for idx, coeff in self.terms.items():
            # X(f) dx_I
            piece = DiffForm(self.chart, self.degree, {idx: x.apply(coeff)})
            out = out + piece
            # f dx_{i1} ^ ... ^ d(X^{ij}) ^ ... ^ dx_{ik}
            for pos, i in enumerate(idx):
                dcomp = DiffForm.function(x.components[i]).d()
                if dcomp.is_zero:
                    continue
                left = DiffForm(self.chart, pos, {idx[:pos]: coeff})
                right = DiffForm(
                    self.chart,
                    self.degree - pos - 1,
                    {idx[pos + 1 :]: RingElement.one(self.chart)},
                )
                out = out + left.wedge(dcomp).wedge(right)
        return out

    def apply(self, vectors: Sequence[VectorField]) -> RingElement:
        """Full evaluation on a list of vector fields."""
        if len(vectors) != self.degree:
            raise ValidationError("wrong number of vector arguments")
        for v in vectors:
            _same_chart(self.chart, v.chart)
        total = RingElement.zero(self.chart)
        if self.degree == 0:
            return self.terms.get((), total)
        for idx, coeff in self.terms.items():
            block = rmat([[v.components[i] for i in idx] for v in vectors])
            total = total + coeff * ring_det(block)
        return total

    def matrix_at(self, point: EvalPoint) -> Mat:
        """For a 2-form: the skew matrix M[i][j] = form(d_i, d_j) at a point."""
        if self.degree != 2:
            raise ValidationError("matrix_at needs a 2-form")
        n = self.chart.dim
        grid = [[ZERO] * n for _ in range(n)]
        for (i, j), coeff in self.terms.items():
            val = coeff.evaluate(point)
            grid[i][j] = val
            grid[j][i] = -val
        return tuple(tuple(row) for row in grid)

    def covector_at(self, point: EvalPoint) -> tuple[Scalar, ...]:
        """For a 1-form: its component tuple at a point."""
        if self.degree != 1:
            raise ValidationError("covector_at needs a 1-form")
        out = [ZERO] * self.chart.dim
        for (i,), coeff in self.terms.items():
            out[i] = coeff.evaluate(point)
        return tuple(out)

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        names = self.chart.names
        parts = []
        for idx in sorted(self.terms):
            coeff = self.terms[idx]
            frame = "^".join(f"d{names[i]}" for i in idx)
            if not frame:
                parts.append(f"{coeff}")
            elif coeff == RingElement.one(self.chart):
                parts.append(frame)
            else:
                parts.append(f"({coeff})*{frame}")
        return " + ".join(parts)

    def __repr__(self) -> str:
        return f"<{self} : {self.degree}-form over {self.chart}>"


def wedge_all(forms: Sequence[DiffForm]) -> DiffForm:
    if not forms:
        raise ValidationError("empty wedge")
    out = forms[0]
    for f in forms[1:]:
        out = out.wedge(f)
    return out


# --- chart maps ----------------------------------------------------------


@dataclass(frozen=True)
class ChartMap:
    """A map between charts, given per target coordinate.

    An affine target coordinate is assigned a ring element over the source
    chart.  A periodic target coordinate is assigned a pair
    (source periodic name or None, quarter-turn offset), meaning
    target = source + offset * pi/2, with None for a constant angle.
    """

    source: Chart
    target: Chart
    affine_values: Mapping[str, RingElement]
    periodic_values: Mapping[str, tuple[Union[str, None], int]]

    def __post_init__(self) -> None:
        for name, kind in self.target.coords:
            if kind == PERIODIC:
                if name not in self.periodic_values:
                    raise ValidationError(f"no assignment for periodic target {name!r}")
                src, _ = self.periodic_values[name]
                if src is not None:
                    i = self.source.index(src)
                    if self.source.is_affine(i):
                        raise ValidationError(
                            f"periodic target {name!r} must pull back from a periodic "
                            "source coordinate"
                        )
            else:
                if name not in self.affine_values:
                    raise ValidationError(f"no assignment for affine target {name!r}")
                if self.affine_values[name].chart != self.source:
                    raise ChartMismatchError("assignment over a different chart")

    def pull_function(self, f: RingElement) -> RingElement:
        if f.chart != self.target:
            raise ChartMismatchError("function is not over the target chart")
        out = RingElement.zero(self.source)
        for expo, coeff in f.terms.items():
            piece = RingElement.constant(self.source, coeff)
            for i, e in enumerate(expo):
                if e == 0:
                    continue
                name, kind = self.target.coords[i]
                if kind == PERIODIC:
                    src, offset = self.periodic_values[name]
                    piece = piece.scale(quarter_phase(e * offset))
                    if src is not None:
                        piece = piece * RingElement.fourier(self.source, src, e)
                else:
                    piece = piece * (self.affine_values[name] ** e)
            out = out + piece
        return out

    def _pull_coordinate_one_form(self, i: int) -> DiffForm:
        name, kind = self.target.coords[i]
        if kind == PERIODIC:
            src, _ = self.periodic_values[name]
            if src is None:
                return DiffForm.zero(self.source, 1)
            return DiffForm.d_coord(self.source, src)
        return DiffForm.function(self.affine_values[name]).d()

    def pull_form(self, form: DiffForm) -> DiffForm:
        if form.chart != self.target:
            raise ChartMismatchError("form is not over the target chart")
        out = DiffForm.zero(self.source, form.degree)
        for idx, coeff in form.terms.items():
            piece = DiffForm.function(self.pull_function(coeff))
            for i in idx:
                piece = piece.wedge(self._pull_coordinate_one_form(i))
            out = out + piece
        return out
