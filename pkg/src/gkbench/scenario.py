"""Scenario files: JSON descriptions of a chart, structures, action and
moment data, plus the list of checks to run and the expected exact
quantities.

All numeric payloads are strings parsed by the exact expression parser
(coefficients, functions) or as rationals (levels, affine point values);
periodic point values are integer quarter turns.  Loading is strict: an
unknown key, a malformed expression, or data violating a constructor
invariant raises ValidationError naming the problem.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Mapping, Sequence

from .calculus import DiffForm, VectorField, wedge_all
from .equivariant import Connection, MomentData, TorusAction
from .errors import ParseError, ValidationError
from .ring import Chart, EvalPoint, RingElement, make_chart, parse_expr
from .structures import (
    GenStructure,
    complex_structure,
    symplectic_structure,
)

KNOWN_CHECKS = (
    "algebraic",
    "integrability",
    "type",
    "gk_pair",
    "moment",
    "equivariant",
    "gamma",
    "level_closure",
    "reduction",
    "gk_reduction",
    "b_flip",
    "b_commute",
)

_TOP_KEYS = {
    "name",
    "title",
    "chart",
    "twist",
    "structures",
    "pair",
    "action",
    "moment",
    "connections",
    "level",
    "points",
    "b_field",
    "basic_field",
    "checks",
    "expected",
}


def _expr(text: str, chart: Chart, where: str) -> RingElement:
    try:
        return parse_expr(text, chart)
    except ParseError as e:
        raise ValidationError(f"{where}: {e}") from e


def form_from_terms(
    chart: Chart, terms: Sequence[Mapping[str, Any]], degree: int, where: str
) -> DiffForm:
    total = DiffForm.zero(chart, degree)
    for item in terms:
        extra = set(item) - {"coeff", "frame"}
        if extra:
            raise ValidationError(f"{where}: unknown term keys {sorted(extra)}")
        frame = item.get("frame", [])
        if len(frame) != degree:
            raise ValidationError(
                f"{where}: term frame {frame} does not have degree {degree}"
            )
        coeff = _expr(item.get("coeff", "1"), chart, where)
        try:
            piece = wedge_all(
                [DiffForm.d_coord(chart, name) for name in frame]
            ).scale(coeff)
        except KeyError as e:
            raise ValidationError(f"{where}: unknown coordinate {e}") from e
        total = total + piece
    return total


def _point(chart: Chart, values: Mapping[str, Any], where: str) -> EvalPoint:
    converted: dict[str, Any] = {}
    for i, name in enumerate(chart.names):
        if name not in values:
            raise ValidationError(f"{where}: missing coordinate {name}")
        raw = values[name]
        if chart.is_affine(i):
            try:
                converted[name] = Fraction(str(raw))
            except (ValueError, ZeroDivisionError) as e:
                raise ValidationError(f"{where}: bad value for {name}: {raw}") from e
        else:
            if not isinstance(raw, int):
                raise ValidationError(
                    f"{where}: periodic coordinate {name} takes integer "
                    f"quarter turns, got {raw!r}"
                )
            converted[name] = raw
    extra = set(values) - set(chart.names)
    if extra:
        raise ValidationError(f"{where}: unknown coordinates {sorted(extra)}")
    return EvalPoint.at(chart, **converted)


def _structure(
    chart: Chart, spec: Mapping[str, Any], twist: DiffForm, where: str
) -> GenStructure:
    kind = spec.get("kind")
    wanted = {"symplectic": {"kind", "two_form"}}.get(kind, {"kind", "matrix"})
    extra = set(spec) - wanted
    if extra:
        raise ValidationError(f"{where}: unknown structure keys {sorted(extra)}")
    if kind == "symplectic":
        two_form = form_from_terms(chart, spec.get("two_form", []), 2, where)
        return symplectic_structure(two_form, twist)
    if kind == "complex":
        rows = spec.get("matrix", [])
        n = chart.dim
        if len(rows) != n or any(len(r) != n for r in rows):
            raise ValidationError(f"{where}: matrix must be {n} x {n}")
        rmat = tuple(
            tuple(_expr(entry, chart, where) for entry in row) for row in rows
        )
        return complex_structure(rmat, chart, twist)
    if kind == "matrix":
        rows = spec.get("matrix", [])
        n2 = 2 * chart.dim
        if len(rows) != n2 or any(len(r) != n2 for r in rows):
            raise ValidationError(f"{where}: matrix must be {n2} x {n2}")
        rmat = tuple(
            tuple(_expr(entry, chart, where) for entry in row) for row in rows
        )
        return GenStructure(chart, rmat, twist)
    raise ValidationError(f"{where}: unknown structure kind {kind!r}")


@dataclass(frozen=True)
class Scenario:
    name: str
    title: str
    chart: Chart
    twist: DiffForm
    structures: dict[str, GenStructure]
    pair: tuple[str, str] | None
    action: TorusAction | None
    moment: MomentData | None
    moment_structure: str | None
    connections: dict[str, Connection]
    level: tuple[Fraction, ...]
    points: dict[str, EvalPoint]
    b_field: DiffForm | None
    basic_field: DiffForm | None
    checks: tuple[str, ...]
    expected: dict[str, Any] = field(default_factory=dict)
    raw: dict[str, Any] = field(default_factory=dict)


def load_scenario(data: Mapping[str, Any]) -> Scenario:
    extra = set(data) - _TOP_KEYS
    if extra:
        raise ValidationError(f"unknown scenario keys {sorted(extra)}")
    for key in ("name", "chart", "structures", "checks"):
        if key not in data:
            raise ValidationError(f"scenario is missing the {key!r} key")
    name = data["name"]

    try:
        chart = make_chart(*[tuple(c) for c in data["chart"]])
    except (ValidationError, TypeError, ValueError) as e:
        raise ValidationError(f"chart: {e}") from e

    twist = form_from_terms(chart, data.get("twist", []), 3, "twist")

    structures: dict[str, GenStructure] = {}
    for sname in sorted(data["structures"]):
        spec = data["structures"][sname]
        try:
            structures[sname] = _structure(
                chart, spec, twist, f"structure {sname}"
            )
        except ValidationError as e:
            if str(e).startswith(f"structure {sname}"):
                raise
            raise ValidationError(f"structure {sname}: {e}") from e

    pair = None
    if "pair" in data:
        pair_names = tuple(data["pair"])
        if len(pair_names) != 2 or any(p not in structures for p in pair_names):
            raise ValidationError("pair must name two defined structures")
        pair = pair_names

    action = None
    if "action" in data:
        gens = []
        for i, comps in enumerate(data["action"]):
            if len(comps) != chart.dim:
                raise ValidationError(
                    f"action generator {i + 1} needs {chart.dim} components"
                )
            gens.append(
                VectorField(
                    chart,
                    tuple(_expr(c, chart, f"action generator {i + 1}") for c in comps),
                )
            )
        try:
            action = TorusAction(chart, tuple(gens))
        except ValidationError as e:
            raise ValidationError(f"action: {e}") from e

    moment = None
    moment_structure = None
    if "moment" in data:
        if action is None:
            raise ValidationError("moment data requires an action")
        mdata = data["moment"]
        moment_structure = mdata.get("structure")
        if moment_structure not in structures:
            raise ValidationError(
                "moment data must name one of the defined structures"
            )
        k = action.k
        raw_forms = mdata.get("one_forms")
        if raw_forms is None:
            one_forms = tuple(DiffForm.zero(chart, 1) for _ in range(k))
        else:
            one_forms = tuple(
                form_from_terms(chart, terms, 1, f"moment one-form {i + 1}")
                for i, terms in enumerate(raw_forms)
            )
        functions = tuple(
            _expr(text, chart, f"moment function {i + 1}")
            for i, text in enumerate(mdata.get("functions", []))
        )
        try:
            moment = MomentData(action, one_forms, functions)
        except ValidationError as e:
            raise ValidationError(f"moment: {e}") from e

    connections: dict[str, Connection] = {}
    for cname in data.get("connections", {}):
        if action is None:
            raise ValidationError("connections require an action")
        terms_list = data["connections"][cname]
        forms = tuple(
            form_from_terms(chart, terms, 1, f"connection {cname}")
            for terms in terms_list
        )
        try:
            connections[cname] = Connection(action, forms)
        except ValidationError as e:
            raise ValidationError(f"connection {cname}: {e}") from e

    level = tuple(Fraction(str(x)) for x in data.get("level", []))

    points: dict[str, EvalPoint] = {}
    for item in data.get("points", []):
        pname = item.get("name")
        if not pname or pname in points:
            raise ValidationError("every point needs a distinct name")
        points[pname] = _point(chart, item.get("values", {}), f"point {pname}")

    b_field = None
    if "b_field" in data:
        b_field = form_from_terms(chart, data["b_field"], 2, "b_field")
        if not b_field.is_real:
            raise ValidationError("b_field must be real")
    basic_field = None
    if "basic_field" in data:
        basic_field = form_from_terms(chart, data["basic_field"], 2, "basic_field")

    checks = tuple(data["checks"])
    for c in checks:
        if c not in KNOWN_CHECKS:
            raise ValidationError(f"unknown check {c!r}")

    return Scenario(
        name=name,
        title=data.get("title", name),
        chart=chart,
        twist=twist,
        structures=structures,
        pair=pair,
        action=action,
        moment=moment,
        moment_structure=moment_structure,
        connections=connections,
        level=level,
        points=points,
        b_field=b_field,
        basic_field=basic_field,
        checks=checks,
        expected=dict(data.get("expected", {})),
        raw=dict(data),
    )


def scenario_from_path(path: str) -> Scenario:
    try:
        with open(path, "r", encoding="utf-8") as handle:
            data = json.load(handle)
    except OSError as e:
        raise ValidationError(f"cannot read scenario file: {e}") from e
    except json.JSONDecodeError as e:
        raise ValidationError(f"scenario file is not valid JSON: {e}") from e
    if not isinstance(data, dict):
        raise ValidationError("scenario file must contain a JSON object")
    return load_scenario(data)


def scenario_digest(raw: Mapping[str, Any]) -> str:
    canonical = json.dumps(raw, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()
