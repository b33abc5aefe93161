"""Chart-specification files.

A spec is a YAML document::

    coordinates:            # ordered (name, parity) pairs
      - [x1, even]
      - [x2, even]
      - [th1, odd]
    omega:
      parity: even
      entries:              # sparse Gram matrix, completed by antisymmetry
        "(1,2)": "1+x1"
        "(th1,th1)": "1"
    connection:             # optional Christoffel symbols, key (i,j,k) = G^k_ij
      "(1,1,1)": "x2"
    cochain:                # optional totally graded symmetric B_ijk
      "(1,1,1)": "1"

Index keys accept 1-based positions or coordinate names. Unspecified
Christoffel partners are filled by symmetry, unspecified cochain entries by
graded symmetry. Everything is validated on load.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from itertools import permutations
from pathlib import Path
from typing import Any

import yaml

from superfedosov.errors import InvariantError, ParseError, SpecError
from superfedosov.fedosov import SCochain, koszul_sign
from superfedosov.frontend.expressions import parse_expression
from superfedosov.superscalar import Parity, Superfunction, sign
from superfedosov.supergeometry import BilinearForm, Chart, Connection, TwoForm

_KEY = re.compile(r"^\(\s*([^()]*)\s*\)$")


@dataclass(frozen=True)
class ChartSpec:
    chart: Chart
    omega: TwoForm
    connection: Connection
    cochain: SCochain | None
    source: dict

    @property
    def has_connection(self) -> bool:
        return bool(self.source.get("connection"))


def _parity(value, where: str) -> Parity:
    v = str(value).strip().lower()
    if v in ("even", "0"):
        return Parity.EVEN
    if v in ("odd", "1"):
        return Parity.ODD
    raise SpecError(f"{where}: parity must be 'even' or 'odd', got {value!r}")


def _index_key(key: Any, chart: Chart, arity: int, where: str) -> tuple[int, ...]:
    m = _KEY.match(str(key).strip())
    if not m:
        raise SpecError(f"{where}: key {key!r} is not of the form (i,j{',k' if arity == 3 else ''})")
    parts = [p.strip() for p in m.group(1).split(",")]
    if len(parts) != arity:
        raise SpecError(f"{where}: key {key!r} needs {arity} indices")
    out = []
    for p in parts:
        if p.isdigit():
            i = int(p) - 1
            if not 0 <= i < chart.dim:
                raise SpecError(f"{where}: index {p} out of range 1..{chart.dim}")
        else:
            try:
                i = chart.index(p)
            except KeyError:
                raise SpecError(f"{where}: unknown coordinate {p!r}") from None
        out.append(i)
    return tuple(out)


def _expr(value, chart: Chart, where: str) -> Superfunction:
    if isinstance(value, bool) or not isinstance(value, (str, int)):
        raise SpecError(f"{where}: expression must be a string or integer, got {value!r}")
    try:
        return parse_expression(str(value), chart)
    except ParseError as e:
        raise SpecError(f"{where}: {e}\n{e.pointer()}") from e


def _label(chart: Chart, idx) -> str:
    return "(" + ",".join(chart.names[i] for i in idx) + ")"


def parse_chart(doc: dict) -> Chart:
    coords = doc.get("coordinates")
    if not isinstance(coords, list) or not coords:
        raise SpecError("'coordinates' must be a non-empty list of [name, parity] pairs")
    pairs = []
    for n, item in enumerate(coords):
        if isinstance(item, dict) and len(item) == 1:
            item = list(item.items())[0]
        if not isinstance(item, (list, tuple)) or len(item) != 2:
            raise SpecError(f"coordinates[{n}]: expected [name, parity]")
        pairs.append((str(item[0]), _parity(item[1], f"coordinates[{n}]")))
    try:
        return Chart(tuple(pairs))
    except ValueError as e:
        raise SpecError(str(e)) from e


def build_gram(chart: Chart, section: dict) -> BilinearForm:
    """Gram matrix completed by graded antisymmetry, not yet validated.

    Pairs given in both orders are kept verbatim, so inconsistent input
    surfaces as an antisymmetry residual.
    """
    if not isinstance(section, dict):
        raise SpecError("'omega' must be a mapping with 'parity' and 'entries'")
    parity = _parity(section.get("parity", "even"), "omega.parity")
    entries = section.get("entries") or {}
    if not isinstance(entries, dict):
        raise SpecError("omega.entries must be a mapping")
    n = chart.dim
    given: dict[tuple[int, int], Superfunction] = {}
    for key, value in entries.items():
        i, j = _index_key(key, chart, 2, "omega.entries")
        if (i, j) in given:
            raise SpecError(f"omega.entries: {_label(chart, (i, j))} given twice")
        given[(i, j)] = _expr(value, chart, f"omega.entries{_label(chart, (i, j))}")
    gram = [[chart.zero()] * n for _ in range(n)]
    for (i, j), v in given.items():
        gram[i][j] = v
        if (j, i) not in given:
            gram[j][i] = v.scale(-sign(chart.parity(i) * chart.parity(j)))
    return BilinearForm(chart, tuple(map(tuple, gram)), parity)


def build_omega(chart: Chart, section: dict) -> TwoForm:
    return TwoForm.from_form(build_gram(chart, section))


def build_connection(chart: Chart, section: dict | None) -> Connection:
    if not section:
        return Connection.flat(chart)
    if not isinstance(section, dict):
        raise SpecError("'connection' must be a mapping (i,j,k) -> expression")
    n = chart.dim
    given = {}
    for key, value in section.items():
        idx = _index_key(key, chart, 3, "connection")
        if idx in given:
            raise SpecError(f"connection: {_label(chart, idx)} given twice")
        given[idx] = _expr(value, chart, f"connection{_label(chart, idx)}")
    table = [[[chart.zero()] * n for _ in range(n)] for _ in range(n)]
    for (i, j, k), v in given.items():
        table[i][j][k] = v
        if (j, i, k) not in given:
            table[j][i][k] = v.scale(sign(chart.parity(i) * chart.parity(j)))
    return Connection(chart, table)


def build_cochain(chart: Chart, parity: Parity, section: dict | None) -> SCochain | None:
    if not section:
        return None
    if not isinstance(section, dict):
        raise SpecError("'cochain' must be a mapping (i,j,k) -> expression")
    n = chart.dim
    table = [[[None] * n for _ in range(n)] for _ in range(n)]
    explicit = set()
    for key, value in section.items():
        idx = _index_key(key, chart, 3, "cochain")
        v = _expr(value, chart, f"cochain{_label(chart, idx)}")
        explicit.add(idx)
        pars = tuple(int(chart.parity(t)) for t in idx)
        for perm in permutations(range(3)):
            target = tuple(idx[a] for a in perm)
            value_t = v.scale(koszul_sign(pars, perm))
            prev = table[target[0]][target[1]][target[2]]
            if prev is not None and not (prev == value_t):
                what = (
                    f"cochain entry {_label(chart, idx)} must vanish by graded symmetry"
                    if target == idx
                    else f"cochain entries {_label(chart, idx)} and {_label(chart, target)} violate graded symmetry"
                )
                raise InvariantError(
                    what,
                    indices=target,
                    residual=prev - value_t,
                )
            table[target[0]][target[1]][target[2]] = value_t
    z = chart.zero()
    comps = tuple(tuple(tuple(z if c is None else c for c in col) for col in row) for row in table)
    B = SCochain(chart, comps, parity)
    bad = B.symmetry_residuals()
    if bad:
        idx, r = next(iter(bad.items()))
        raise InvariantError(f"cochain entry {_label(chart, idx)} has the wrong parity", indices=idx, residual=r)
    return B


def check_document(doc: Any) -> None:
    if not isinstance(doc, dict):
        raise SpecError("spec must be a mapping with 'coordinates' and 'omega'")
    unknown = set(doc) - {"coordinates", "omega", "connection", "cochain", "name", "description"}
    if unknown:
        raise SpecError(f"unknown top-level keys: {sorted(unknown)}")
    if "omega" not in doc:
        raise SpecError("missing 'omega' section")


def load_spec_document(doc: Any) -> ChartSpec:
    check_document(doc)
    chart = parse_chart(doc)
    omega = build_omega(chart, doc["omega"])
    connection = build_connection(chart, doc.get("connection"))
    cochain = build_cochain(chart, omega.parity, doc.get("cochain"))
    return ChartSpec(chart, omega, connection, cochain, doc)


def read_spec_document(path: str | Path) -> Any:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise SpecError(f"cannot read {path}: {e.strerror}") from e
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as e:
        raise SpecError(f"{path}: not valid YAML: {e}") from e
    return doc


def load_chart_spec(path: str | Path) -> ChartSpec:
    return load_spec_document(read_spec_document(path))
