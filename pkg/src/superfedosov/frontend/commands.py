"""The work behind each CLI command, returning report documents."""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction

from superfedosov.corpus import build_instance
from superfedosov.errors import SuperfedosovError
from superfedosov.fedosov import (
    check_admissible,
    deform,
    extract_n,
    fedosov_correct,
    n_identity_residuals,
    random_cochain,
    s_from_cochain,
    verify_symplectic,
)
from superfedosov.frontend import report as R
from superfedosov.frontend.specfile import (
    ChartSpec,
    build_gram,
    check_document,
    load_spec_document,
    parse_chart,
    read_spec_document,
)
from superfedosov.supergeometry import (
    BilinearForm,
    Chart,
    Connection,
    antisymmetry_residuals,
    body_determinant,
    closedness_residuals,
)


def _document(command: str, **sections) -> dict:
    doc = {"schema": R.SCHEMA, "command": command}
    doc.update(sections)
    doc["ok"] = R.all_passed(sections)
    return doc


def _input_echo(path: str, chart: Chart, gram: BilinearForm, connection: Connection | None = None) -> dict:
    out = {
        "spec": str(path),
        "coordinates": R.chart_section(chart),
        "omega_parity": str(gram.parity),
        "omega": R.gram_section(gram),
    }
    if connection is not None:
        out["connection"] = R.table_section(chart, connection.christoffel)
    return out


def form_validation(g: BilinearForm) -> dict:
    """Antisymmetry, closedness and nondegeneracy of a Gram matrix."""
    chart = g.chart
    n = chart.dim
    anti = R.residual_check("antisymmetry", antisymmetry_residuals(g), chart, n * (n + 1) // 2)
    closed = R.residual_check("closedness", closedness_residuals(g), chart, n**3)
    det = body_determinant(g)
    nondeg = {
        "name": "nondegeneracy",
        "passed": not det.is_zero(),
        "checked": 1,
        "failures": int(det.is_zero()),
        "indices": None,
        "residual": "0",
    }
    checks = [anti, closed, nondeg]
    return {
        "passed": all(c["passed"] for c in checks),
        "checks": checks,
        "body_determinant": R.body_determinant_string(det, chart),
    }


def n_identities(N, omega) -> dict:
    chart = omega.chart
    anti, cyclic = n_identity_residuals(N, omega)
    checks = [
        R.residual_check("n_antisymmetry", anti, chart, len(anti)),
        R.residual_check("n_cyclic", cyclic, chart, len(cyclic)),
    ]
    return {"passed": all(c["passed"] for c in checks), "checks": checks}


# ---------------------------------------------------------------------------
# commands


def run_validate(path: str) -> dict:
    doc = read_spec_document(path)
    check_document(doc)
    chart = parse_chart(doc)
    try:
        g = build_gram(chart, doc["omega"])
    except SuperfedosovError as err:
        raise LoadError(err, chart) from err
    return _document("validate", input=_input_echo(path, chart, g), validation=form_validation(g))


def _fedosov_sections(spec: ChartSpec, path: str) -> tuple[dict, Connection]:
    chart, omega = spec.chart, spec.omega
    N = extract_n(spec.connection, omega)
    C = fedosov_correct(spec.connection, omega, N)
    sections = {
        "input": _input_echo(path, chart, omega, spec.connection if spec.has_connection else None),
        "validation": form_validation(omega),
        "n_tensor": R.table_section(chart, N.table),
        "n_identities": n_identities(N, omega),
        "connection": R.table_section(chart, C.christoffel),
        "verification": R.verification_section(verify_symplectic(C, omega), chart),
    }
    return sections, C


class LoadError(Exception):
    """A spec that cannot be turned into a valid model, with a report entry."""

    def __init__(self, err: Exception, chart: Chart | None):
        super().__init__(str(err))
        self.entry = {"type": type(err).__name__, "message": str(err)}
        idx = getattr(err, "indices", None)
        if idx is not None:
            self.entry["indices"] = R.key(idx)
            if chart is not None:
                self.entry["coordinates"] = "(" + ",".join(chart.names[i] for i in idx) + ")"
        res = getattr(err, "residual", None)
        if res is not None and chart is not None:
            self.entry["residual"] = R.expr(res, chart)


def load(path: str) -> ChartSpec:
    """Load and validate a spec; invariant failures become ``LoadError``."""
    doc = read_spec_document(path)
    check_document(doc)
    chart = parse_chart(doc)
    try:
        return load_spec_document(doc)
    except SuperfedosovError as err:
        raise LoadError(err, chart) from err


def run_fedosov(path: str) -> dict:
    spec = load(path)
    sections, _ = _fedosov_sections(spec, path)
    return _document("fedosov", **sections)


def run_deform(path: str, seed: int | None, degree: int) -> dict:
    spec = load(path)
    chart, omega = spec.chart, spec.omega
    sections, C = _fedosov_sections(spec, path)
    if seed is None and spec.cochain is not None:
        B, source = spec.cochain, "spec"
    else:
        seed = 0 if seed is None else seed
        B, source = random_cochain(chart, omega.parity, degree, seed), f"random(seed={seed}, degree={degree})"
    S = s_from_cochain(omega, B)
    C2 = deform(C, S)
    sections["deformation"] = {
        "source": source,
        "cochain": R.table_section(chart, B.components),
        "s_tensor": R.table_section(chart, S.table),
        "admissibility": R.verification_section(check_admissible(omega, S), chart),
        "connection": R.table_section(chart, C2.christoffel),
        "verification": R.verification_section(verify_symplectic(C2, omega), chart),
    }
    return _document("deform", **sections)


# ---------------------------------------------------------------------------
# selftest


def _renamed(section: dict, prefix: str) -> list[dict]:
    return [dict(c, name=f"{prefix}{c['name']}") for c in section["checks"]]


def selftest_instance(index: int, seed: int, degree: int) -> dict:
    """All identity checks on one corpus chart."""
    inst = build_instance(index, seed, degree)
    chart, omega = inst.chart, inst.omega
    flat = Connection.flat(chart)
    N = extract_n(flat, omega)
    C = fedosov_correct(flat, omega, N)
    checks = [c for c in form_validation(omega)["checks"] if c["name"] == "closedness"]
    checks += n_identities(N, omega)["checks"]
    checks += _renamed(R.verification_section(verify_symplectic(C, omega), chart), "")
    S = s_from_cochain(omega, random_cochain(chart, omega.parity, 1, seed * 1_000_003 + index))
    C2 = deform(C, S)
    checks += _renamed(R.verification_section(verify_symplectic(C2, omega), chart), "deformed_")
    checks += _renamed(R.verification_section(check_admissible(omega, C2 - C), chart), "difference_")
    mid = C2.affine_combination(C, Fraction(-1))
    checks += _renamed(R.verification_section(verify_symplectic(mid, omega), chart), "affine_")
    return {
        "index": index,
        "shape": f"R^({chart.p}|{chart.q})",
        "omega_parity": str(omega.parity),
        "omega": R.gram_section(omega),
        "checks": checks,
    }


def run_selftest(charts: int, seed: int, degree: int = 2, jobs: int = 1) -> dict:
    args = [(i, seed, degree) for i in range(charts)]
    if jobs > 1 and args:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            instances = list(pool.map(selftest_instance, *zip(*args)))
    else:
        instances = [selftest_instance(*a) for a in args]
    instances.sort(key=lambda d: d["index"])
    total = sum(len(d["checks"]) for d in instances)
    failed = sum(1 for d in instances for c in d["checks"] if not c["passed"])
    summary = {
        "instances": charts,
        "seed": seed,
        "degree": degree,
        "checks": total,
        "failed": failed,
        "passed": failed == 0,
    }
    return _document("selftest", instances=instances, summary=summary)
