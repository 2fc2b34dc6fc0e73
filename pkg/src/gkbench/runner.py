"""Run the checks a scenario asks for and collect verdicts.

Checks run in a fixed registry order regardless of how the scenario
lists them.  Every verdict is pass, fail, or skipped, with a human
readable detail; a ValidationError raised by library code becomes a
failing verdict rather than an exception.  All comparisons are exact.

When a scenario carries a B-field, the moment-map, equivariance, gamma,
closure, and reduction checks operate on the transformed structure and
transported moment data; when the transported moment one-forms are not
zero, reduction first applies the potential of the scenario's first
connection to remove them.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Callable

from .calculus import DiffForm
from .equivariant import (
    MomentData,
    gamma_from_connection,
    is_basic,
    is_equivariantly_closed,
    check_moment_map,
    moment_b_transform,
)
from .errors import ValidationError
from .linalg import inverse, mat_mul, mat_vec, rmat_eval, span_eq
from .reduction import (
    check_adapted_closure,
    check_level_closure,
    descend_endomorphism,
    dirac_reduce,
    fiber_data,
    gk_reduce,
    gk_type_prediction,
    level_substitution,
    reduced_type,
    reduced_type_of_matrix,
    two_step_reduce,
)
from .scenario import KNOWN_CHECKS, Scenario, form_from_terms
from .structures import (
    GenStructure,
    b_exponential,
    b_transform_structure,
    check_algebraic,
    check_gk_pair,
    check_integrable,
    type_at,
)


@dataclass
class Verdict:
    check: str
    status: str
    detail: str

    def as_dict(self) -> dict[str, str]:
        return {"check": self.check, "status": self.status, "detail": self.detail}


def _ok(check: str, detail: str) -> Verdict:
    return Verdict(check, "pass", detail)


def _bad(check: str, detail: str) -> Verdict:
    return Verdict(check, "fail", detail)


def _skip(check: str, detail: str) -> Verdict:
    return Verdict(check, "skipped", detail)


class _Workspace:
    """Shared derived objects for one scenario run."""

    def __init__(self, scen: Scenario):
        self.scen = scen
        self.quantities: dict[str, Any] = {}
        self._work: dict[str, GenStructure] = {}
        self._moment_w: MomentData | None = None
        self._reduction: dict[str | None, tuple] = {}

    def work(self, name: str) -> GenStructure:
        """The structure after the scenario's B-field, if any."""
        if name not in self._work:
            base = self.scen.structures[name]
            if self.scen.b_field is None:
                self._work[name] = base
            else:
                self._work[name] = b_transform_structure(self.scen.b_field, base)
        return self._work[name]

    def moment_w(self) -> MomentData:
        """Moment data transported through the scenario's B-field."""
        if self.scen.moment is None:
            raise ValidationError("this check needs moment data")
        if self._moment_w is None:
            if self.scen.b_field is None:
                self._moment_w = self.scen.moment
            else:
                base = self.scen.structures[self.scen.moment_structure]
                _, self._moment_w = moment_b_transform(
                    self.scen.moment, self.scen.b_field, base.twist
                )
        return self._moment_w

    def reduction_entry(
        self, structure_name: str, connection: str | None
    ) -> tuple[GenStructure, MomentData, DiffForm | None]:
        """Structure and moment data ready for fiber reduction: one-forms
        removed by the named connection's potential when necessary."""
        key = (structure_name, connection)
        if key in self._reduction:
            return self._reduction[key]
        struct = self.work(structure_name)
        moment = self.moment_w()
        gamma = None
        if any(not a.is_zero for a in moment.one_forms):
            if connection is None:
                raise ValidationError(
                    "moment one-forms are nonzero and the scenario lists no "
                    "connection to remove them"
                )
            conn = self.scen.connections[connection]
            gamma = gamma_from_connection(moment, conn)
            struct = b_transform_structure(-gamma, struct)
            _, moment = moment_b_transform(moment, -gamma, self.work(structure_name).twist)
            if any(not a.is_zero for a in moment.one_forms):
                raise ValidationError(
                    "potential transform failed to remove the moment one-forms"
                )
            if not is_basic(struct.twist, moment.action):
                raise ValidationError(
                    "twist is not basic after the potential transform"
                )
        self._reduction[key] = (struct, moment, gamma)
        return self._reduction[key]

    def primary_connection(self) -> str | None:
        names = list(self.scen.connections)
        return names[0] if names else None


def _check_algebraic(ws: _Workspace) -> list[Verdict]:
    out = []
    for name in sorted(ws.scen.structures):
        ok, detail = check_algebraic(ws.scen.structures[name])
        out.append(Verdict(f"algebraic:{name}", "pass" if ok else "fail", detail))
        if ws.scen.b_field is not None:
            ok, detail = check_algebraic(ws.work(name))
            out.append(
                Verdict(
                    f"algebraic:{name}+b", "pass" if ok else "fail", detail
                )
            )
    return out


def _check_integrability(ws: _Workspace) -> list[Verdict]:
    out = []
    points = list(ws.scen.points.values())
    for name in sorted(ws.scen.structures):
        ok, detail = check_integrable(ws.scen.structures[name], points)
        out.append(
            Verdict(f"integrability:{name}", "pass" if ok else "fail", detail)
        )
        if ws.scen.b_field is not None:
            ok, detail = check_integrable(ws.work(name), points)
            out.append(
                Verdict(
                    f"integrability:{name}+b", "pass" if ok else "fail", detail
                )
            )
    return out


def _check_type(ws: _Workspace) -> list[Verdict]:
    want = ws.scen.expected.get("types", {})
    if not want:
        return [_bad("type", "scenario lists the type check but expects no types")]
    out = []
    types_seen: dict[str, int] = {}
    for name in sorted(want):
        if name not in ws.scen.structures:
            out.append(_bad(f"type:{name}", "no such structure"))
            continue
        struct = ws.scen.structures[name]
        values = {
            pname: type_at(struct, p) for pname, p in ws.scen.points.items()
        }
        distinct = sorted(set(values.values()))
        if all(v == want[name] for v in values.values()):
            out.append(
                _ok(
                    f"type:{name}",
                    f"type {want[name]} at all {len(values)} points",
                )
            )
            types_seen[name] = want[name]
        else:
            out.append(
                _bad(
                    f"type:{name}",
                    f"expected type {want[name]}, computed {values}",
                )
            )
    if types_seen:
        ws.quantities["types"] = types_seen
    return out


def _check_gk_pair(ws: _Workspace) -> list[Verdict]:
    if ws.scen.pair is None:
        return [_bad("gk_pair", "scenario lists gk_pair but names no pair")]
    a, b = ws.scen.pair
    points = list(ws.scen.points.values())
    ok, detail = check_gk_pair(ws.work(a), ws.work(b), points)
    return [Verdict("gk_pair", "pass" if ok else "fail", detail)]


def _check_moment(ws: _Workspace) -> list[Verdict]:
    struct = ws.work(ws.scen.moment_structure)
    ok, detail = check_moment_map(struct, ws.moment_w())
    return [Verdict("moment", "pass" if ok else "fail", detail)]


def _check_equivariant(ws: _Workspace) -> list[Verdict]:
    struct = ws.work(ws.scen.moment_structure)
    ok, detail = is_equivariantly_closed(struct.twist, ws.moment_w())
    return [Verdict("equivariant", "pass" if ok else "fail", detail)]


def _check_gamma(ws: _Workspace) -> list[Verdict]:
    scen = ws.scen
    if not scen.connections:
        return [_bad("gamma", "scenario lists gamma but has no connections")]
    moment = ws.moment_w()
    struct = ws.work(scen.moment_structure)
    action = moment.action
    out = []
    gammas: dict[str, DiffForm] = {}
    for cname, conn in scen.connections.items():
        check = f"gamma:{cname}"
        try:
            gamma = gamma_from_connection(moment, conn)
        except ValidationError as e:
            out.append(_bad(check, str(e)))
            continue
        gammas[cname] = gamma
        problems = []
        for i, xi in enumerate(action.generators):
            if gamma.interior(xi) != moment.one_forms[i]:
                problems.append(f"contraction with generator {i + 1} is off")
            if not gamma.lie(xi).is_zero:
                problems.append(f"not invariant under generator {i + 1}")
        shifted = struct.twist + gamma.d()
        if not is_basic(shifted, action):
            problems.append("twist plus d(potential) is not basic")
        if problems:
            out.append(_bad(check, "; ".join(problems)))
        else:
            out.append(
                _ok(
                    check,
                    "potential contracts to the moment one-forms, is "
                    "invariant, and makes the twist basic",
                )
            )
    if gammas:
        first = next(iter(gammas))
        ws.quantities["gamma"] = str(gammas[first])
        if "gamma" in scen.expected:
            want = form_from_terms(
                scen.chart, scen.expected["gamma"], 2, "expected gamma"
            )
            if gammas[first] == want:
                out.append(_ok("gamma:expected", f"potential equals {want}"))
            else:
                out.append(
                    _bad(
                        "gamma:expected",
                        f"potential {gammas[first]} differs from expected {want}",
                    )
                )
    names = list(gammas)
    for other in names[1:]:
        diff = gammas[other] - gammas[names[0]]
        if is_basic(diff, action):
            out.append(
                _ok(
                    f"gamma:difference({other})",
                    "potentials differ by a basic two-form",
                )
            )
        else:
            out.append(
                _bad(
                    f"gamma:difference({other})",
                    "potentials do not differ by a basic two-form",
                )
            )
    return out


def _check_level_closure(ws: _Workspace) -> list[Verdict]:
    struct = ws.work(ws.scen.moment_structure)
    moment = ws.moment_w()
    out = []
    ok, detail = check_level_closure(struct, moment)
    out.append(Verdict("level_closure:frame", "pass" if ok else "fail", detail))
    ok, detail = check_adapted_closure(struct, moment)
    out.append(Verdict("level_closure:adapted", "pass" if ok else "fail", detail))
    sub = level_substitution(moment, ws.scen.level)
    if sub is None:
        out.append(
            _skip(
                "level_closure:slice",
                "chart does not admit substituting the level values",
            )
        )
    else:
        ok1, d1 = check_level_closure(struct, moment, sub)
        ok2, d2 = check_adapted_closure(struct, moment, sub)
        out.append(
            Verdict(
                "level_closure:slice",
                "pass" if ok1 and ok2 else "fail",
                d1 if not ok1 else d2,
            )
        )
    return out


def _check_reduction(ws: _Workspace) -> list[Verdict]:
    scen = ws.scen
    out = []
    primary = ws.primary_connection()
    struct, moment, gamma = ws.reduction_entry(scen.moment_structure, primary)
    want_dim = scen.expected.get("reduced_dim")
    want_type = scen.expected.get("reduced_types", {}).get(scen.moment_structure)
    reds = {}
    for pname, point in scen.points.items():
        check = f"reduction:{pname}"
        try:
            fiber = fiber_data(moment, point, scen.level)
            red = dirac_reduce(struct, fiber)
            two = two_step_reduce(struct, fiber)
        except ValidationError as e:
            out.append(_bad(check, str(e)))
            continue
        reds[pname] = (fiber, red)
        problems = []
        if fiber.m and (
            mat_mul(two.comparison, red.jmat)
            != mat_mul(two.jmat, two.comparison)
            or not span_eq(
                [mat_vec(two.comparison, u) for u in red.l_rows], two.l_rows
            )
        ):
            problems.append("two-step factorization disagrees")
        dim = 2 * fiber.m
        if want_dim is not None and dim != want_dim:
            problems.append(f"quotient dimension {dim}, expected {want_dim}")
        rtype = reduced_type(red)
        if want_type is not None and rtype != want_type:
            problems.append(f"reduced type {rtype}, expected {want_type}")
        if problems:
            out.append(_bad(check, "; ".join(problems)))
        else:
            out.append(
                _ok(
                    check,
                    f"quotient dimension {dim}, reduced type {rtype}, "
                    "two-step factorization agrees",
                )
            )
    if reds:
        some = next(iter(reds.values()))
        ws.quantities["reduced_dim"] = 2 * some[0].m
        ws.quantities.setdefault("reduced_types", {})[scen.moment_structure] = (
            reduced_type(some[1])
        )
    if gamma is not None:
        for cname in list(scen.connections)[1:]:
            check = f"reduction:independence({cname})"
            try:
                struct_alt, moment_alt, gamma_alt = ws.reduction_entry(
                    scen.moment_structure, cname
                )
            except ValidationError as e:
                out.append(_bad(check, str(e)))
                continue
            diff = gamma - gamma_alt
            if not is_basic(diff, moment.action):
                out.append(_bad(check, "connection change is not basic"))
                continue
            problems = []
            for pname, (fiber, red) in reds.items():
                try:
                    red_alt = dirac_reduce(struct_alt, fiber)
                    carrier = descend_endomorphism(
                        rmat_eval(b_exponential(diff), fiber.point), fiber
                    )
                    moved = (
                        mat_mul(carrier, mat_mul(red.jmat, inverse(carrier)))
                        if fiber.m
                        else ()
                    )
                except ValidationError as e:
                    problems.append(f"{pname}: {e}")
                    continue
                if red_alt.jmat != moved:
                    problems.append(
                        f"{pname}: reduced structures differ by more than "
                        "the descended transform"
                    )
            if problems:
                out.append(_bad(check, "; ".join(problems)))
            else:
                out.append(
                    _ok(
                        check,
                        "reduced structures agree up to the descended "
                        "basic transform at all points",
                    )
                )
    return out


def _check_gk_reduction(ws: _Workspace) -> list[Verdict]:
    scen = ws.scen
    if scen.pair is None:
        return [_bad("gk_reduction", "scenario names no pair")]
    if scen.moment_structure not in scen.pair:
        return [
            _bad("gk_reduction", "moment structure is not part of the pair")
        ]
    other = scen.pair[1] if scen.pair[0] == scen.moment_structure else scen.pair[0]
    primary = ws.primary_connection()
    struct1, moment, _ = ws.reduction_entry(scen.moment_structure, primary)
    struct2, _, _ = ws.reduction_entry(other, primary)
    want = scen.expected.get("reduced_types", {}).get(other)
    out = []
    seen_type = None
    for pname, point in scen.points.items():
        check = f"gk_reduction:{pname}"
        try:
            fiber = fiber_data(moment, point, scen.level)
            red1 = dirac_reduce(struct1, fiber)
            gk = gk_reduce(red1, struct1, struct2)
        except ValidationError as e:
            out.append(_bad(check, str(e)))
            continue
        rtype = reduced_type_of_matrix(gk.jmat2, fiber.m)
        predicted, formula = gk_type_prediction(struct2, moment, fiber)
        problems = []
        if rtype != predicted:
            problems.append(
                f"reduced type {rtype} does not match the prediction "
                f"{predicted} ({formula})"
            )
        if want is not None and rtype != want:
            problems.append(f"reduced type {rtype}, expected {want}")
        if problems:
            out.append(_bad(check, "; ".join(problems)))
        else:
            seen_type = rtype
            out.append(
                _ok(check, f"reduced type {rtype} matches the count: {formula}")
            )
    if seen_type is not None:
        ws.quantities.setdefault("reduced_types", {})[other] = seen_type
    return out


def _check_b_flip(ws: _Workspace) -> list[Verdict]:
    scen = ws.scen
    if scen.b_field is None:
        return [_bad("b_flip", "scenario lists b_flip but has no b_field")]
    name = scen.moment_structure or sorted(scen.structures)[0]
    base = scen.structures[name]
    b = scen.b_field
    db = b.d()
    if db.is_zero:
        return [
            _bad("b_flip", "b_field is closed, the twist shift would be zero")
        ]
    points = list(scen.points.values())
    moved = b_transform_structure(b, base)
    ok_shifted, detail = check_integrable(moved, points)
    legs = [f"with twist shifted down: {'pass' if ok_shifted else detail}"]
    ok_same, _ = check_integrable(
        GenStructure(scen.chart, moved.matrix, base.twist), points
    )
    legs.append(f"with the original twist: {'fails' if not ok_same else 'PASSES'}")
    ok_up, _ = check_integrable(
        GenStructure(scen.chart, moved.matrix, base.twist + db), points
    )
    legs.append(f"with twist shifted up: {'fails' if not ok_up else 'PASSES'}")
    back = b_transform_structure(-b, base)
    ok_back, detail_back = check_integrable(back, points)
    legs.append(
        f"inverse transform against twist shifted up: "
        f"{'pass' if ok_back else detail_back}"
    )
    good = ok_shifted and not ok_same and not ok_up and ok_back
    return [
        Verdict(
            "b_flip",
            "pass" if good else "fail",
            "; ".join(legs),
        )
    ]


def _check_b_commute(ws: _Workspace) -> list[Verdict]:
    scen = ws.scen
    if scen.basic_field is None:
        return [_bad("b_commute", "scenario lists b_commute but no basic_field")]
    primary = ws.primary_connection()
    struct, moment, _ = ws.reduction_entry(scen.moment_structure, primary)
    basic = scen.basic_field
    if not is_basic(basic, moment.action):
        return [_bad("b_commute", "basic_field is not basic for the action")]
    moved = b_transform_structure(basic, struct)
    out = []
    for pname, point in scen.points.items():
        check = f"b_commute:{pname}"
        try:
            fiber = fiber_data(moment, point, scen.level)
            red = dirac_reduce(struct, fiber)
            red_moved = dirac_reduce(moved, fiber)
            carrier = descend_endomorphism(
                rmat_eval(b_exponential(basic), point), fiber
            )
            conjugated = (
                mat_mul(carrier, mat_mul(red.jmat, inverse(carrier)))
                if fiber.m
                else ()
            )
        except ValidationError as e:
            out.append(_bad(check, str(e)))
            continue
        if red_moved.jmat == conjugated:
            out.append(
                _ok(check, "reduction commutes with the basic transform")
            )
        else:
            out.append(
                _bad(check, "reduction does not commute with the basic transform")
            )
    return out


_REGISTRY: dict[str, Callable[[_Workspace], list[Verdict]]] = {
    "algebraic": _check_algebraic,
    "integrability": _check_integrability,
    "type": _check_type,
    "gk_pair": _check_gk_pair,
    "moment": _check_moment,
    "equivariant": _check_equivariant,
    "gamma": _check_gamma,
    "level_closure": _check_level_closure,
    "reduction": _check_reduction,
    "gk_reduction": _check_gk_reduction,
    "b_flip": _check_b_flip,
    "b_commute": _check_b_commute,
}

assert tuple(_REGISTRY) == KNOWN_CHECKS


def run_scenario(scen: Scenario) -> tuple[list[Verdict], dict[str, Any]]:
    ws = _Workspace(scen)
    verdicts: list[Verdict] = []
    for check in KNOWN_CHECKS:
        if check not in scen.checks:
            continue
        try:
            verdicts.extend(_REGISTRY[check](ws))
        except ValidationError as e:
            verdicts.append(_bad(check, str(e)))
    return verdicts, ws.quantities
