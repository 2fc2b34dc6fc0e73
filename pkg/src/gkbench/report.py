"""Assemble scenario verdicts into a deterministic report.

Reports carry only strings and integers, so the JSON rendering is
byte-identical across runs and platforms.  The conventions block states
the sign and pairing choices the whole workbench is built on, so a
report can be interpreted without reading the source.
"""

from __future__ import annotations

import json
from typing import Any

from .runner import Verdict
from .scenario import Scenario, scenario_digest

REPORT_VERSION = 1

CONVENTIONS = {
    "pairing": "split pairing <X + a, Y + b> = (b(X) + a(Y)) / 2",
    "symplectic": "the symplectic structure maps X + a to inv(omega)(a) - omega(X)",
    "moment": "on the symplectic model the moment functions satisfy df = -i_xi omega",
    "b_transform": "exp(B) carries an H-twisted structure to an (H - dB)-twisted one",
}


def build_report(
    scen: Scenario, verdicts: list[Verdict], quantities: dict[str, Any]
) -> dict[str, Any]:
    return {
        "version": REPORT_VERSION,
        "scenario": scen.name,
        "title": scen.title,
        "digest": scenario_digest(scen.raw),
        "conventions": dict(CONVENTIONS),
        "verdicts": [v.as_dict() for v in verdicts],
        "quantities": quantities,
    }


def report_passed(report: dict[str, Any]) -> bool:
    return all(v["status"] != "fail" for v in report["verdicts"])


def render_json(report: dict[str, Any]) -> str:
    return json.dumps(report, sort_keys=True, indent=2)


def render_text(report: dict[str, Any]) -> str:
    lines = [
        f"scenario {report['scenario']}: {report['title']}",
        f"digest {report['digest']}",
        "",
    ]
    width = max(len(v["check"]) for v in report["verdicts"]) if report["verdicts"] else 0
    for v in report["verdicts"]:
        status = v["status"].upper()
        lines.append(f"  {v['check']:<{width}}  {status:<7}  {v['detail']}")
    lines.append("")
    counts = {"pass": 0, "fail": 0, "skipped": 0}
    for v in report["verdicts"]:
        counts[v["status"]] += 1
    lines.append(
        f"{counts['pass']} passed, {counts['fail']} failed, "
        f"{counts['skipped']} skipped"
    )
    if report["quantities"]:
        lines.append("quantities: " + json.dumps(report["quantities"], sort_keys=True))
    return "\n".join(lines) + "\n"
