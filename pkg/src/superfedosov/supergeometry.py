"""Coordinate realization of graded differential geometry on a superdomain.

Everything here lives on a single global chart of R^(p|q). Tensors are
stored as component tables over the coordinate fields ``d_i`` and extended to
arbitrary homogeneous arguments by the Koszul sign rule. The one source of
truth for those signs is the bilinear-form rule

    g(f X, Y) = (-1)^{|f||g|} f g(X, Y)
    g(X, f Y) = (-1)^{|f|(|g|+|X|)} f g(X, Y)

with coefficients always written to the left.

Index conventions: ``gram[i][j] = g(d_i, d_j)`` and
``christoffel[i][j][k]`` is the ``d_k`` component of ``nabla_{d_i} d_j``.
All indices are 0-based in code.
"""

from __future__ import annotations

import keyword
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Sequence

from superfedosov.errors import (
    DegenerateFormError,
    HomogeneityError,
    InvariantError,
    SignatureError,
)
from superfedosov.superscalar import Grade, Parity, RationalFunction, Superfunction, sign

__all__ = [
    "Chart",
    "VectorField",
    "BilinearForm",
    "TwoForm",
    "Connection",
    "Tensor21",
    "apply",
    "lie_bracket",
    "form_eval",
    "covariant_derivative",
    "torsion",
    "covariant_derivative_bilinear",
    "is_closed",
    "closedness_residuals",
    "antisymmetry_residuals",
    "d_one_form",
    "solve_against_omega",
    "body_determinant",
]


def _par(f: Superfunction) -> int:
    """Parity of a homogeneous superfunction as an int (zero -> 0)."""
    return int(f.parity)


# ---------------------------------------------------------------------------
# Chart


@dataclass(frozen=True)
class Chart:
    """Ordered coordinates ``(name, parity)`` of a superdomain."""

    coordinates: tuple[tuple[str, Parity], ...]
    p: int = field(init=False, repr=False)
    q: int = field(init=False, repr=False)
    _slots: tuple[int, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        coords = tuple((str(n), Parity(par)) for n, par in self.coordinates)
        names = [n for n, _ in coords]
        for n in names:
            if not n.isidentifier() or keyword.iskeyword(n):
                raise ValueError(f"coordinate name {n!r} is not a valid identifier")
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate coordinate names in {names}")
        p = sum(1 for _, par in coords if par is Parity.EVEN)
        slots = []
        ne = no = 0
        for _, par in coords:
            if par is Parity.EVEN:
                slots.append(ne)
                ne += 1
            else:
                slots.append(p + no)
                no += 1
        object.__setattr__(self, "coordinates", coords)
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "q", len(coords) - p)
        object.__setattr__(self, "_slots", tuple(slots))

    @classmethod
    def standard(cls, p: int, q: int) -> "Chart":
        """``x1..xp`` followed by ``th1..thq``."""
        return cls(
            tuple((f"x{i + 1}", Parity.EVEN) for i in range(p))
            + tuple((f"th{i + 1}", Parity.ODD) for i in range(q))
        )

    @property
    def dim(self) -> int:
        return len(self.coordinates)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(n for n, _ in self.coordinates)

    def parity(self, i: int) -> Parity:
        return self.coordinates[i][1]

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise KeyError(f"unknown coordinate {name!r}") from None

    def slot(self, i: int) -> int:
        """Flat superscalar index (evens first) of chart coordinate ``i``."""
        return self._slots[i]

    def coordinate(self, i: int) -> Superfunction:
        return Superfunction.coordinate(self._slots[i], self.p, self.q)

    def partial(self, f: Superfunction, i: int) -> Superfunction:
        return f.partial(self._slots[i])

    def zero(self) -> Superfunction:
        return Superfunction.zero(self.p, self.q)

    def constant(self, c) -> Superfunction:
        return Superfunction.constant(c, self.p, self.q)

    def slot_names(self) -> tuple[str, ...]:
        """Coordinate names ordered by flat superscalar index."""
        out = [""] * self.dim
        for i, s in enumerate(self._slots):
            out[s] = self.coordinates[i][0]
        return tuple(out)

    def even_point_order(self) -> tuple[str, ...]:
        """Names of even coordinates in the order ``evaluate_even`` expects."""
        return tuple(n for n, par in self.coordinates if par is Parity.EVEN)

    def check(self, f: Superfunction) -> None:
        if f.signature != (self.p, self.q):
            raise SignatureError(f"superfunction signature {f.signature} does not match chart ({self.p}|{self.q})")

    def basis(self, i: int) -> "VectorField":
        comps = [self.zero()] * self.dim
        comps[i] = self.constant(1)
        return VectorField(self, tuple(comps))


# ---------------------------------------------------------------------------
# Vector fields


@dataclass(frozen=True)
class VectorField:
    """``X = sum_i X^i d_i`` with coefficients on the left."""

    chart: Chart
    components: tuple[Superfunction, ...]

    def __post_init__(self):
        if len(self.components) != self.chart.dim:
            raise SignatureError(f"{len(self.components)} components on a {self.chart.dim}-dimensional chart")
        object.__setattr__(self, "components", tuple(self.components))

    @classmethod
    def zero(cls, chart: Chart) -> "VectorField":
        return cls(chart, (chart.zero(),) * chart.dim)

    def __getitem__(self, i: int) -> Superfunction:
        return self.components[i]

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.components)

    @property
    def parity(self) -> Parity:
        """Homogeneous parity; the zero field counts as even."""
        found = None
        for i, c in enumerate(self.components):
            g = c.grade()
            if g is Grade.ZERO:
                continue
            if g is Grade.MIXED:
                raise HomogeneityError(f"component {i} has mixed parity")
            par = (Parity.ODD if g is Grade.ODD else Parity.EVEN) + self.chart.parity(i)
            if found is None:
                found = par
            elif found is not par:
                raise HomogeneityError("vector field mixes parities across components")
        return Parity.EVEN if found is None else found

    def is_homogeneous(self) -> bool:
        try:
            self.parity
        except HomogeneityError:
            return False
        return True

    def _check(self, other):
        if self.chart != other.chart:
            raise SignatureError("vector fields live on different charts")

    def __add__(self, other):
        self._check(other)
        return VectorField(self.chart, tuple(a + b for a, b in zip(self.components, other.components)))

    def __sub__(self, other):
        self._check(other)
        return VectorField(self.chart, tuple(a - b for a, b in zip(self.components, other.components)))

    def __neg__(self):
        return VectorField(self.chart, tuple(-a for a in self.components))

    def __rmul__(self, f):
        if isinstance(f, Superfunction):
            return VectorField(self.chart, tuple(f * a for a in self.components))
        return VectorField(self.chart, tuple(a.scale(f) for a in self.components))

    def __eq__(self, other):
        if not isinstance(other, VectorField):
            return NotImplemented
        return self.chart == other.chart and all(a == b for a, b in zip(self.components, other.components))

    __hash__ = None


def apply(X: VectorField, f: Superfunction) -> Superfunction:
    """X(f) = sum_i X^i d_i f."""
    chart = X.chart
    chart.check(f)
    out = chart.zero()
    for i, xi in enumerate(X.components):
        if not xi.is_zero():
            out = out + xi * chart.partial(f, i)
    return out


def lie_bracket(X: VectorField, Y: VectorField) -> VectorField:
    """Graded commutator [X, Y] = XY - (-1)^{|X||Y|} YX."""
    X._check(Y)
    s = sign(X.parity * Y.parity)
    comps = []
    for k in range(X.chart.dim):
        v = apply(X, Y[k])
        w = apply(Y, X[k])
        comps.append(v - w if s > 0 else v + w)
    return VectorField(X.chart, tuple(comps))


# ---------------------------------------------------------------------------
# Bilinear forms


@dataclass(frozen=True)
class BilinearForm:
    """Twice covariant homogeneous tensor given by its Gram matrix."""

    chart: Chart
    gram: tuple[tuple[Superfunction, ...], ...]
    parity: Parity = Parity.EVEN
    _cache: dict = field(default_factory=dict, init=False, repr=False, compare=False)

    def __post_init__(self):
        n = self.chart.dim
        gram = tuple(tuple(row) for row in self.gram)
        if len(gram) != n or any(len(row) != n for row in gram):
            raise SignatureError(f"Gram matrix must be {n}x{n}")
        object.__setattr__(self, "gram", gram)
        object.__setattr__(self, "parity", Parity(self.parity))
        for i, j in product(range(n), repeat=2):
            g = gram[i][j]
            self.chart.check(g)
            grade = g.grade()
            if grade is Grade.ZERO:
                continue
            expected = self.parity + self.chart.parity(i) + self.chart.parity(j)
            if grade is Grade.MIXED or int(expected) != (grade is Grade.ODD):
                raise InvariantError(
                    f"entry ({i + 1},{j + 1}) has parity {grade.value}, expected {expected}",
                    indices=(i, j),
                    residual=g,
                )

    def __getitem__(self, ij) -> Superfunction:
        i, j = ij
        return self.gram[i][j]

    def body_matrix(self) -> list[list[RationalFunction]]:
        return [[g.body for g in row] for row in self.gram]


def form_eval(g: BilinearForm, X: VectorField, Y: VectorField) -> Superfunction:
    """g(X, Y) by graded bilinear extension of the Gram matrix."""
    chart = g.chart
    gp = int(g.parity)
    out = chart.zero()
    ys = [(j, yj, _par(yj)) for j, yj in enumerate(Y.components) if not yj.is_zero()]
    for i, xi in enumerate(X.components):
        if xi.is_zero():
            continue
        si = _par(xi) * gp
        pi = int(chart.parity(i))
        row = g.gram[i]
        for j, yj, pyj in ys:
            gij = row[j]
            if gij.is_zero():
                continue
            term = xi * yj * gij
            if sign(si + pyj * (gp + pi)) < 0:
                out = out - term
            else:
                out = out + term
    return out


def antisymmetry_residuals(g: BilinearForm) -> dict[tuple[int, int], Superfunction]:
    """Nonzero values of g_ij + (-1)^{|i||j|} g_ji."""
    chart = g.chart
    out = {}
    for i in range(chart.dim):
        for j in range(i, chart.dim):
            s = sign(chart.parity(i) * chart.parity(j))
            r = g.gram[i][j] + g.gram[j][i].scale(s)
            if not r.is_zero():
                out[(i, j)] = r
    return out


def closedness_residuals(omega: BilinearForm) -> dict[tuple[int, int, int], Superfunction]:
    """Nonzero coordinate values of d(omega).

    On coordinate fields the brackets drop out and

        d w(i,j,k) = (-1)^{|w||i|} d_i w_jk - (-1)^{|j|(|w|+|i|)} d_j w_ik
                     + (-1)^{|k|(|w|+|i|+|j|)} d_k w_ij
    """
    chart = omega.chart
    w = int(omega.parity)
    G = omega.gram
    n = chart.dim
    out = {}
    for i, j, k in product(range(n), repeat=3):
        pi, pj, pk = (int(chart.parity(t)) for t in (i, j, k))
        r = (
            chart.partial(G[j][k], i).scale(sign(w * pi))
            - chart.partial(G[i][k], j).scale(sign(pj * (w + pi)))
            + chart.partial(G[i][j], k).scale(sign(pk * (w + pi + pj)))
        )
        if not r.is_zero():
            out[(i, j, k)] = r
    return out


def is_closed(omega: BilinearForm) -> tuple[bool, dict[tuple[int, int, int], Superfunction]]:
    residuals = closedness_residuals(omega)
    return not residuals, residuals


def d_one_form(chart: Chart, alpha: Sequence[Superfunction], parity: Parity) -> BilinearForm:
    """Exterior derivative of the covector ``alpha_j = alpha(d_j)``.

    ``(d alpha)_ij = (-1)^{|a||i|} d_i alpha_j - (-1)^{|j|(|a|+|i|)} d_j alpha_i``,
    the coordinate form of ``X(a(Y)) - Y(a(X)) - a([X, Y])`` with Koszul signs.
    The result has the same parity as ``alpha``.
    """
    n = chart.dim
    a = int(parity)
    alpha = tuple(alpha)
    if len(alpha) != n:
        raise SignatureError(f"covector has {len(alpha)} entries, chart has {n}")
    for j, aj in enumerate(alpha):
        chart.check(aj)
        g = aj.grade()
        if g is Grade.MIXED or (g is not Grade.ZERO and (g is Grade.ODD) != bool((a + chart.parity(j)) & 1)):
            raise HomogeneityError(f"covector component {j + 1} does not have parity {Parity(a) + chart.parity(j)}")
    gram = [[chart.zero()] * n for _ in range(n)]
    for i, j in product(range(n), repeat=2):
        pi, pj = int(chart.parity(i)), int(chart.parity(j))
        gram[i][j] = chart.partial(alpha[j], i).scale(sign(a * pi)) - chart.partial(alpha[i], j).scale(
            sign(pj * (a + pi))
        )
    return BilinearForm(chart, tuple(map(tuple, gram)), Parity(a))


# ---------------------------------------------------------------------------
# Linear algebra against omega


def _eliminate(matrix: list[list[Superfunction]], chart: Chart) -> list[list[Superfunction]]:
    """Gauss-Jordan inverse of a square superfunction matrix.

    Row operations multiply from the left only, so the procedure is valid over
    the supercommutative scalar ring. Pivots must have an invertible body.
    """
    n = len(matrix)
    aug = [list(row) + [chart.constant(1) if r == c else chart.zero() for c in range(n)] for r, row in enumerate(matrix)]
    for col in range(n):
        pivot = next((r for r in range(col, n) if not aug[r][col].body.is_zero()), None)
        if pivot is None:
            raise DegenerateFormError(f"no pivot with invertible body in column {col + 1}")
        aug[col], aug[pivot] = aug[pivot], aug[col]
        inv = aug[col][col].invert()
        aug[col] = [(inv * e).reduced() for e in aug[col]]
        prow = aug[col]
        for r in range(n):
            if r == col:
                continue
            factor = aug[r][col]
            if factor.is_zero():
                continue
            aug[r] = [(e - factor * pe).reduced() if not pe.is_zero() else e for e, pe in zip(aug[r], prow)]
    return [row[n:] for row in aug]


def _omega_inverse(omega: BilinearForm, parity: Parity):
    key = ("inverse", int(parity))
    cached = omega._cache.get(key)
    if cached is not None:
        return cached
    chart = omega.chart
    n = chart.dim
    w = int(omega.parity)
    v = int(parity)
    # form_eval(w, V, d_k) = sum_i (-1)^{|V^i||w|} V^i w_ik = sum_i M_ki V^i
    M = [[chart.zero()] * n for _ in range(n)]
    for i in range(n):
        pvi = (v + int(chart.parity(i))) & 1
        for k in range(n):
            wik = omega.gram[i][k]
            if wik.is_zero():
                continue
            s = pvi * w + pvi * (w + int(chart.parity(i)) + int(chart.parity(k)))
            M[k][i] = wik.scale(sign(s))
    inv = _eliminate(M, chart)
    omega._cache[key] = inv
    return inv


def solve_against_omega(omega: BilinearForm, targets: Sequence[Superfunction], parity: Parity) -> VectorField:
    """The vector field V of parity ``parity`` with ``omega(V, d_k) = targets[k]``."""
    chart = omega.chart
    if len(targets) != chart.dim:
        raise SignatureError(f"{len(targets)} targets for a {chart.dim}-dimensional chart")
    inv = _omega_inverse(omega, Parity(parity))
    comps = []
    for row in inv:
        acc = chart.zero()
        for m, t in zip(row, targets):
            if not m.is_zero() and not t.is_zero():
                acc = acc + m * t
        comps.append(acc.reduced())
    return VectorField(chart, tuple(comps))


def body_determinant(g: BilinearForm) -> RationalFunction:
    """Determinant of the body of the Gram matrix (zero iff degenerate)."""
    rows = g.body_matrix()
    n = len(rows)
    nv = g.chart.p
    det = RationalFunction.constant(1, nv)
    rows = [list(r) for r in rows]
    for col in range(n):
        pivot = next((r for r in range(col, n) if not rows[r][col].is_zero()), None)
        if pivot is None:
            return RationalFunction.constant(0, nv)
        if pivot != col:
            rows[col], rows[pivot] = rows[pivot], rows[col]
            det = -det
        pv = rows[col][col]
        det = det * pv
        inv = pv.reciprocal()
        for r in range(col + 1, n):
            if rows[r][col].is_zero():
                continue
            f = rows[r][col] * inv
            rows[r] = [a - f * b for a, b in zip(rows[r], rows[col])]
    return det


class TwoForm(BilinearForm):
    """Graded antisymmetric, closed, nondegenerate bilinear form.

    Antisymmetry uses ``w(Y, X) = -(-1)^{|X||Y|} w(X, Y)`` for either parity of w.
    Construction raises ``InvariantError`` / ``DegenerateFormError`` when an
    invariant fails.
    """

    def __post_init__(self):
        super().__post_init__()
        anti = antisymmetry_residuals(self)
        if anti:
            (i, j), r = next(iter(anti.items()))
            raise InvariantError(f"not graded antisymmetric at ({i + 1},{j + 1})", indices=(i, j), residual=r)
        closed = closedness_residuals(self)
        if closed:
            (i, j, k), r = next(iter(closed.items()))
            raise InvariantError(f"not closed at ({i + 1},{j + 1},{k + 1})", indices=(i, j, k), residual=r)
        det = body_determinant(self)
        if det.is_zero():
            raise DegenerateFormError("body of the Gram matrix is singular")
        self._cache["body_det"] = det

    @classmethod
    def from_form(cls, g: BilinearForm) -> "TwoForm":
        return cls(g.chart, g.gram, g.parity)

    @property
    def body_det(self) -> RationalFunction:
        return self._cache["body_det"]


# ---------------------------------------------------------------------------
# (2,1) tensors and connections


def _table(chart: Chart, table) -> tuple:
    n = chart.dim
    t = tuple(tuple(tuple(c) for c in row) for row in table)
    if len(t) != n or any(len(r) != n or any(len(c) != n for c in r) for r in t):
        raise SignatureError(f"component table must be {n}x{n}x{n}")
    for row in t:
        for col in row:
            for f in col:
                chart.check(f)
    return tuple(tuple(tuple(f.reduced() for f in col) for col in row) for row in t)


def _check_even_table(chart: Chart, t, what: str):
    """Entry (i,j,k) must have parity |i|+|j|+|k| or vanish."""
    n = chart.dim
    for i, j, k in product(range(n), repeat=3):
        g = t[i][j][k].grade()
        if g is Grade.ZERO:
            continue
        expected = chart.parity(i) + chart.parity(j) + chart.parity(k)
        if g is Grade.MIXED or int(expected) != (g is Grade.ODD):
            raise InvariantError(
                f"{what} component ({i + 1},{j + 1},{k + 1}) has parity {g.value}, expected {expected}",
                indices=(i, j, k),
                residual=t[i][j][k],
            )


def _empty_table(chart: Chart):
    z = chart.zero()
    n = chart.dim
    return tuple(tuple((z,) * n for _ in range(n)) for _ in range(n))


@dataclass(frozen=True)
class Tensor21:
    """Parity-even (2,1) tensor: ``table[i][j][k]`` is the d_k part of T(d_i, d_j)."""

    chart: Chart
    table: tuple

    def __post_init__(self):
        t = _table(self.chart, self.table)
        _check_even_table(self.chart, t, type(self).__name__)
        object.__setattr__(self, "table", t)

    @classmethod
    def zero(cls, chart: Chart):
        return cls(chart, _empty_table(chart))

    def at(self, i: int, j: int) -> VectorField:
        return VectorField(self.chart, self.table[i][j])

    def __call__(self, X: VectorField, Y: VectorField) -> VectorField:
        """T(X, Y) with T(fX, Y) = f T(X,Y) and T(X, fY) = (-1)^{|f||X|} f T(X,Y)."""
        chart = self.chart
        n = chart.dim
        out = [chart.zero()] * n
        for i, xi in enumerate(X.components):
            if xi.is_zero():
                continue
            pi = int(chart.parity(i))
            for j, yj in enumerate(Y.components):
                if yj.is_zero():
                    continue
                coeff = (xi * yj).scale(sign(pi * _par(yj)))
                for k in range(n):
                    c = self.table[i][j][k]
                    if not c.is_zero():
                        out[k] = out[k] + coeff * c
        return VectorField(chart, tuple(out))

    def _combine(self, other, fn):
        if self.chart != other.chart:
            raise SignatureError("tensors live on different charts")
        n = self.chart.dim
        return tuple(
            tuple(tuple(fn(self.table[i][j][k], other.table[i][j][k]) for k in range(n)) for j in range(n))
            for i in range(n)
        )

    def __add__(self, other):
        return type(self)(self.chart, self._combine(other, lambda a, b: a + b))

    def __sub__(self, other):
        return type(self)(self.chart, self._combine(other, lambda a, b: a - b))

    def scale(self, c):
        return type(self)(self.chart, tuple(tuple(tuple(f.scale(c) for f in col) for col in row) for row in self.table))

    def nonzero(self):
        n = self.chart.dim
        for i, j, k in product(range(n), repeat=3):
            c = self.table[i][j][k]
            if not c.is_zero():
                yield (i, j, k), c

    def __eq__(self, other):
        if not isinstance(other, Tensor21):
            return NotImplemented
        if self.chart != other.chart:
            return False
        n = self.chart.dim
        return all(
            self.table[i][j][k] == other.table[i][j][k] for i, j, k in product(range(n), repeat=3)
        )

    __hash__ = None


@dataclass(frozen=True)
class Connection:
    """Parity-even connection given by Christoffel symbols.

    ``christoffel[i][j][k]`` is the d_k component of nabla_{d_i} d_j.
    """

    chart: Chart
    christoffel: tuple

    def __post_init__(self):
        t = _table(self.chart, self.christoffel)
        _check_even_table(self.chart, t, "Christoffel")
        object.__setattr__(self, "christoffel", t)

    @classmethod
    def flat(cls, chart: Chart) -> "Connection":
        return cls(chart, _empty_table(chart))

    def at(self, i: int, j: int) -> VectorField:
        return VectorField(self.chart, self.christoffel[i][j])

    def symmetry_residuals(self) -> dict[tuple[int, int, int], Superfunction]:
        """Nonzero values of G^k_ij - (-1)^{|i||j|} G^k_ji."""
        chart = self.chart
        n = chart.dim
        out = {}
        for i in range(n):
            for j in range(i + 1 if chart.parity(i) is Parity.EVEN else i, n):
                s = sign(chart.parity(i) * chart.parity(j))
                for k in range(n):
                    r = self.christoffel[i][j][k] - self.christoffel[j][i][k].scale(s)
                    if not r.is_zero():
                        out[(i, j, k)] = r
        return out

    @property
    def is_symmetric(self) -> bool:
        return not self.symmetry_residuals()

    def __add__(self, tensor: Tensor21) -> "Connection":
        if tensor.chart != self.chart:
            raise SignatureError("tensor lives on a different chart")
        n = self.chart.dim
        return Connection(
            self.chart,
            tuple(
                tuple(tuple(self.christoffel[i][j][k] + tensor.table[i][j][k] for k in range(n)) for j in range(n))
                for i in range(n)
            ),
        )

    def __sub__(self, other: "Connection") -> Tensor21:
        """Difference of two connections, a (2,1) tensor."""
        if other.chart != self.chart:
            raise SignatureError("connections live on different charts")
        n = self.chart.dim
        return Tensor21(
            self.chart,
            tuple(
                tuple(tuple(self.christoffel[i][j][k] - other.christoffel[i][j][k] for k in range(n)) for j in range(n))
                for i in range(n)
            ),
        )

    def affine_combination(self, other: "Connection", t) -> "Connection":
        """t * self + (1 - t) * other."""
        t = Fraction(t)
        return other + (self - other).scale(t)

    def __eq__(self, other):
        if not isinstance(other, Connection):
            return NotImplemented
        return self.chart == other.chart and (self - other) == Tensor21.zero(self.chart)

    __hash__ = None


def covariant_derivative(C: Connection, X: VectorField, Y: VectorField) -> VectorField:
    """nabla_X Y = sum_i X^i [ (d_i Y^k) + (-1)^{|i||Y^j|} Y^j G^k_ij ] d_k."""
    chart = C.chart
    n = chart.dim
    out = [chart.zero()] * n
    ys = [(j, yj, _par(yj)) for j, yj in enumerate(Y.components) if not yj.is_zero()]
    for i, xi in enumerate(X.components):
        if xi.is_zero():
            continue
        pi = int(chart.parity(i))
        gi = C.christoffel[i]
        for k in range(n):
            inner = chart.partial(Y[k], i)
            for j, yj, pyj in ys:
                g = gi[j][k]
                if g.is_zero():
                    continue
                term = yj * g
                inner = inner - term if pi * pyj else inner + term
            if not inner.is_zero():
                out[k] = out[k] + xi * inner
    return VectorField(chart, tuple(out))


def torsion(C: Connection, X: VectorField, Y: VectorField) -> VectorField:
    """T(X,Y) = nabla_X Y - (-1)^{|X||Y|} nabla_Y X - [X, Y]."""
    s = sign(X.parity * Y.parity)
    a = covariant_derivative(C, X, Y)
    b = covariant_derivative(C, Y, X)
    return (a - b if s > 0 else a + b) - lie_bracket(X, Y)


def covariant_derivative_bilinear(
    C: Connection, g: BilinearForm, X: VectorField, Y: VectorField, Z: VectorField
) -> Superfunction:
    """(nabla_X g)(Y, Z)."""
    px, py = int(X.parity), int(Y.parity)
    Z.parity  # reject mixed input eagerly
    gp = int(g.parity)
    first = apply(X, form_eval(g, Y, Z))
    second = form_eval(g, covariant_derivative(C, X, Y), Z).scale(sign(px * gp))
    third = form_eval(g, Y, covariant_derivative(C, X, Z)).scale(sign(px * (py + gp)))
    return first - second - third
