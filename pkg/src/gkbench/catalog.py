"""Built-in scenario catalog, shipped as package data."""

from __future__ import annotations

import json
from importlib import resources

from .errors import ValidationError
from .scenario import Scenario, load_scenario

_ORDER = (
    "symplectic_t4",
    "complex_r2",
    "btwist_t4",
    "kahler_c2_circle",
    "gamma_torus_cylinder",
    "trivial_action",
    "mixed_r4_rotation",
    "gamma_cylinder_product",
    "bihermitian_r4_translation",
)


def catalog_names() -> tuple[str, ...]:
    return _ORDER


def builtin_raw(name: str) -> dict:
    if name not in _ORDER:
        raise ValidationError(f"no builtin scenario named {name!r}")
    path = resources.files("gkbench").joinpath(f"catalog_data/{name}.json")
    with path.open("r", encoding="utf-8") as handle:
        return json.load(handle)


def load_builtin(name: str) -> Scenario:
    return load_scenario(builtin_raw(name))
