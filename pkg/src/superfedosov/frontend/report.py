"""Machine-readable report documents and their text rendering.

Every report is a JSON object with a versioned top-level ``schema`` field.
Superfunctions are serialized as expression strings in the parser grammar,
never as floats, and index keys are 1-based ``"(i,j,k)"`` strings that the
spec loader accepts back.
"""

from __future__ import annotations

import json
from itertools import product
from pathlib import Path

from superfedosov.fedosov import Check, VerificationReport
from superfedosov.frontend.expressions import format_rational_function, format_superfunction
from superfedosov.supergeometry import BilinearForm, Chart

SCHEMA = "superfedosov.report/1"


def key(idx) -> str:
    return "(" + ",".join(str(i + 1) for i in idx) + ")"


def expr(f, chart: Chart) -> str:
    return format_superfunction(f, chart)


def chart_section(chart: Chart) -> list:
    return [[name, str(par)] for name, par in chart.coordinates]


def gram_section(g: BilinearForm) -> dict:
    chart = g.chart
    n = chart.dim
    return {
        key((i, j)): expr(g.gram[i][j], chart)
        for i, j in product(range(n), repeat=2)
        if not g.gram[i][j].is_zero()
    }


def table_section(chart: Chart, table) -> dict:
    """Nonzero entries of an n x n x n table keyed ``(i,j,k)``."""
    n = chart.dim
    return {
        key((i, j, k)): expr(table[i][j][k], chart)
        for i, j, k in product(range(n), repeat=3)
        if not table[i][j][k].is_zero()
    }


def body_determinant_string(rf, chart: Chart) -> str:
    return format_rational_function(rf, chart.slot_names()[: chart.p])


def check_entry(c: Check, chart: Chart) -> dict:
    return {
        "name": c.name,
        "passed": c.passed,
        "checked": c.checked,
        "failures": c.failures,
        "indices": None if c.indices is None else key(c.indices),
        "residual": expr(c.residual, chart),
    }


def verification_section(rep: VerificationReport, chart: Chart) -> dict:
    return {"passed": rep.passed, "checks": [check_entry(c, chart) for c in rep.checks]}


def residual_check(name: str, residuals: dict, chart: Chart, checked: int) -> dict:
    """Report entry for a residual table (only nonzero entries present)."""
    nonzero = {k: v for k, v in residuals.items() if not v.is_zero()}
    first = min(nonzero) if nonzero else None
    return {
        "name": name,
        "passed": not nonzero,
        "checked": checked,
        "failures": len(nonzero),
        "indices": None if first is None else key(first),
        "residual": "0" if first is None else expr(nonzero[first], chart),
    }


def all_passed(doc) -> bool:
    """True iff no check anywhere in the document failed."""
    if isinstance(doc, dict):
        if doc.get("passed") is False:
            return False
        return all(all_passed(v) for v in doc.values())
    if isinstance(doc, list):
        return all(all_passed(v) for v in doc)
    return True


def dumps(doc: dict) -> str:
    return json.dumps(doc, indent=2, ensure_ascii=False) + "\n"


def write_json(doc: dict, path: str | Path) -> None:
    Path(path).write_text(dumps(doc), encoding="utf-8")


# ---------------------------------------------------------------------------
# text rendering


def _render_checks(lines: list, title: str, section: dict):
    lines.append(f"{title}: {'PASS' if section['passed'] else 'FAIL'}")
    for c in section["checks"]:
        mark = "ok  " if c["passed"] else "FAIL"
        line = f"  [{mark}] {c['name']} ({c['checked']} checked)"
        if not c["passed"]:
            line += f": {c['failures']} nonzero, first at {c['indices']} = {c['residual']}"
        lines.append(line)


def _render_table(lines: list, title: str, table: dict, empty="(all zero)"):
    lines.append(f"{title}:")
    if not table:
        lines.append(f"  {empty}")
    for k, v in table.items():
        lines.append(f"  {k} = {v}")


def render_text(doc: dict) -> str:
    lines = [f"superfedosov {doc['command']}: {'OK' if doc['ok'] else 'FAILED'}"]
    if "error" in doc:
        err = doc["error"]
        lines.append(f"error: {err['message']}")
        if err.get("indices"):
            where = err.get("coordinates", err["indices"])
            lines.append(f"  at {where}: residual {err.get('residual')}")
        return "\n".join(lines) + "\n"
    if "input" in doc:
        inp = doc["input"]
        coords = ", ".join(f"{n}:{p}" for n, p in inp["coordinates"])
        lines.append(f"chart: {coords}; omega parity {inp['omega_parity']}")
    if "validation" in doc:
        v = doc["validation"]
        _render_checks(lines, "validation", v)
        lines.append(f"  body determinant (locus of validity: nonzero) = {v['body_determinant']}")
    if "n_tensor" in doc:
        _render_table(lines, "N components (i,j,k) = N^k_ij", doc["n_tensor"])
        _render_checks(lines, "N identities", doc["n_identities"])
    if "connection" in doc:
        _render_table(lines, "corrected Christoffel symbols (i,j,k) = G^k_ij", doc["connection"])
        _render_checks(lines, "symplectic verification", doc["verification"])
    if "deformation" in doc:
        d = doc["deformation"]
        lines.append(f"deformation source: {d['source']}")
        _render_table(lines, "cochain B_ijk", d["cochain"])
        _render_table(lines, "S components", d["s_tensor"])
        _render_checks(lines, "admissibility", d["admissibility"])
        _render_table(lines, "deformed Christoffel symbols", d["connection"])
        _render_checks(lines, "deformed verification", d["verification"])
    if "summary" in doc:
        s = doc["summary"]
        for inst in doc.get("instances", []):
            bad = [c["name"] for c in inst["checks"] if not c["passed"]]
            status = "ok" if not bad else "FAIL " + ",".join(bad)
            lines.append(f"  #{inst['index']:<3} {inst['shape']:<10} {inst['omega_parity']:<4} omega: {status}")
        lines.append(
            f"summary: {s['instances']} instances, {s['checks']} identity checks, {s['failed']} failed"
        )
    return "\n".join(lines) + "\n"
