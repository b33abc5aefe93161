"""Symplectic connections: construction from a symmetric one, and deformation.

Given a symmetric connection ``C0`` and a symplectic form ``w`` the tensor N is
defined through

    (nabla0_X w)(Y, Z) = (-1)^{|w||X|} w(N(X,Y), Z)

and the corrected connection

    nabla_X Y = nabla0_X Y + N(X,Y)/3 + (-1)^{|X||Y|} N(Y,X)/3

is symmetric and parallel for ``w``. Every other symplectic connection differs
from it by a supersymmetric (2,1) tensor S with ``w(S(X,Y),Z)`` totally graded
symmetric (an admissible S-tensor).
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import permutations, product
from typing import Iterator

from superfedosov.errors import PreconditionError, SignatureError
from superfedosov.superscalar import Grade, Parity, Superfunction, sign
from superfedosov.supergeometry import (
    BilinearForm,
    Chart,
    Connection,
    Tensor21,
    covariant_derivative_bilinear,
    form_eval,
    solve_against_omega,
    torsion,
)

__all__ = [
    "NTensor",
    "STensor",
    "SCochain",
    "Check",
    "VerificationReport",
    "extract_n",
    "fedosov_correct",
    "verify_symplectic",
    "s_from_cochain",
    "check_admissible",
    "deform",
    "random_cochain",
    "random_superfunction",
    "n_identity_residuals",
    "compatibility_residuals",
    "torsion_residuals",
    "graded_symmetrize",
]


class NTensor(Tensor21):
    """The (2,1) tensor measuring how far nabla0 is from preserving omega."""


class STensor(Tensor21):
    """A (2,1) tensor used to deform a connection."""


# ---------------------------------------------------------------------------
# verification records


@dataclass(frozen=True)
class Check:
    """Outcome of one identity family over all coordinate index tuples.

    ``residual``/``indices`` hold the first offending value in lexicographic
    index order (zero / None when the identity holds everywhere).
    """

    name: str
    passed: bool
    residual: Superfunction
    indices: tuple[int, ...] | None
    failures: int = 0
    checked: int = 0


@dataclass(frozen=True)
class VerificationReport:
    checks: tuple[Check, ...] = field(default_factory=tuple)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def __bool__(self):
        return self.passed

    def __getitem__(self, name: str) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def __add__(self, other: "VerificationReport") -> "VerificationReport":
        return VerificationReport(self.checks + other.checks)


def _collect(name: str, chart: Chart, residuals: Iterator[tuple[tuple[int, ...], Superfunction]]) -> Check:
    first = None
    failures = 0
    checked = 0
    for idx, r in residuals:
        checked += 1
        if not r.is_zero():
            failures += 1
            if first is None:
                first = (idx, r)
    if first is None:
        return Check(name, True, chart.zero(), None, 0, checked)
    return Check(name, False, first[1], first[0], failures, checked)


def _triples(n: int):
    return product(range(n), repeat=3)


# ---------------------------------------------------------------------------
# residual generators


def torsion_residuals(C: Connection):
    """Components T(d_i, d_j)^k."""
    chart = C.chart
    n = chart.dim
    basis = [chart.basis(i) for i in range(n)]
    for i, j in product(range(n), repeat=2):
        T = torsion(C, basis[i], basis[j])
        for k in range(n):
            yield (i, j, k), T[k]


def compatibility_residuals(C: Connection, omega: BilinearForm):
    """(nabla_{d_i} w)(d_j, d_k)."""
    chart = C.chart
    basis = [chart.basis(i) for i in range(chart.dim)]
    for i, j, k in _triples(chart.dim):
        yield (i, j, k), covariant_derivative_bilinear(C, omega, basis[i], basis[j], basis[k])


def _n_pairing(N: Tensor21, omega: BilinearForm):
    """Table P[i][j][k] = w(N(d_i,d_j), d_k)."""
    chart = omega.chart
    n = chart.dim
    basis = [chart.basis(i) for i in range(n)]
    return [[[form_eval(omega, N.at(i, j), basis[k]) for k in range(n)] for j in range(n)] for i in range(n)]


def n_identity_residuals(N: Tensor21, omega: BilinearForm):
    """Residual tables of the antisymmetry and cyclic identities of N.

    antisymmetry: w(N(i,j),k) + (-1)^{|j||k|} w(N(i,k),j)
    cyclic:       w(N(i,j),k) + (-1)^{|i|(|j|+|k|)} w(N(j,k),i)
                  + (-1)^{|k|(|i|+|j|)} w(N(k,i),j)
    """
    chart = omega.chart
    P = _n_pairing(N, omega)
    par = [int(chart.parity(i)) for i in range(chart.dim)]
    anti, cyclic = {}, {}
    for i, j, k in _triples(chart.dim):
        pi, pj, pk = par[i], par[j], par[k]
        anti[(i, j, k)] = P[i][j][k] + P[i][k][j].scale(sign(pj * pk))
        cyclic[(i, j, k)] = (
            P[i][j][k] + P[j][k][i].scale(sign(pi * (pj + pk))) + P[k][i][j].scale(sign(pk * (pi + pj)))
        )
    return anti, cyclic


# ---------------------------------------------------------------------------
# the construction


def extract_n(C0: Connection, omega: BilinearForm) -> NTensor:
    """Solve (nabla0_{d_i} w)(d_j, d_k) = (-1)^{|w||i|} w(N(d_i,d_j), d_k) for N."""
    chart = omega.chart
    if C0.chart != chart:
        raise SignatureError("connection and form live on different charts")
    asym = C0.symmetry_residuals()
    if asym:
        (i, j, k), _ = next(iter(asym.items()))
        raise PreconditionError(f"base connection is not symmetric at ({i + 1},{j + 1},{k + 1})")
    n = chart.dim
    w = int(omega.parity)
    basis = [chart.basis(i) for i in range(n)]
    table = []
    for i in range(n):
        s = sign(w * int(chart.parity(i)))
        row = []
        for j in range(n):
            targets = [
                covariant_derivative_bilinear(C0, omega, basis[i], basis[j], basis[k]).scale(s) for k in range(n)
            ]
            V = solve_against_omega(omega, targets, chart.parity(i) + chart.parity(j))
            row.append(V.components)
        table.append(row)
    return NTensor(chart, table)


def fedosov_correct(C0: Connection, omega: BilinearForm, N: NTensor | None = None) -> Connection:
    """Symplectic connection G^k_ij = G0^k_ij + N^k_ij/3 + (-1)^{|i||j|} N^k_ji/3."""
    if N is None:
        N = extract_n(C0, omega)
    chart = C0.chart
    n = chart.dim
    third = Fraction(1, 3)
    table = []
    for i in range(n):
        row = []
        for j in range(n):
            s = sign(chart.parity(i) * chart.parity(j))
            row.append(
                tuple(
                    C0.christoffel[i][j][k] + N.table[i][j][k].scale(third) + N.table[j][i][k].scale(s * third)
                    for k in range(n)
                )
            )
        table.append(row)
    return Connection(chart, table)


def verify_symplectic(C: Connection, omega: BilinearForm) -> VerificationReport:
    """Torsion on all coordinate pairs and nabla w on all coordinate triples."""
    chart = C.chart
    return VerificationReport(
        (
            _collect("torsion", chart, torsion_residuals(C)),
            _collect("compatibility", chart, compatibility_residuals(C, omega)),
        )
    )


# ---------------------------------------------------------------------------
# the affine space of symplectic connections


def koszul_sign(parities: tuple[int, ...], perm: tuple[int, ...]) -> int:
    """Sign picked up by reordering graded slots by ``perm``."""
    s = 0
    m = len(perm)
    for a in range(m):
        for b in range(a + 1, m):
            if perm[a] > perm[b]:
                s += parities[perm[a]] * parities[perm[b]]
    return sign(s)


@dataclass(frozen=True)
class SCochain:
    """Totally graded symmetric 3-covariant tensor B_ijk = w(S(d_i,d_j),d_k).

    Symmetry is not enforced at construction; see ``symmetry_residuals``.
    """

    chart: Chart
    components: tuple
    parity: Parity = Parity.EVEN

    def __post_init__(self):
        n = self.chart.dim
        t = tuple(tuple(tuple(c) for c in row) for row in self.components)
        if len(t) != n or any(len(r) != n or any(len(c) != n for c in r) for r in t):
            raise SignatureError(f"cochain table must be {n}x{n}x{n}")
        object.__setattr__(self, "components", t)
        object.__setattr__(self, "parity", Parity(self.parity))

    @classmethod
    def zero(cls, chart: Chart, parity: Parity = Parity.EVEN) -> "SCochain":
        z = chart.zero()
        n = chart.dim
        return cls(chart, tuple(tuple((z,) * n for _ in range(n)) for _ in range(n)), parity)

    def __getitem__(self, ijk) -> Superfunction:
        i, j, k = ijk
        return self.components[i][j][k]

    def symmetry_residuals(self) -> dict[tuple[int, int, int], Superfunction]:
        """Violations of both adjacent-transposition symmetries and of entry parity."""
        chart = self.chart
        B = self.components
        out = {}
        for i, j, k in _triples(chart.dim):
            pi, pj, pk = (int(chart.parity(t)) for t in (i, j, k))
            b = B[i][j][k]
            g = b.grade()
            expected = (int(self.parity) + pi + pj + pk) & 1
            if g is Grade.MIXED or (g is not Grade.ZERO and (g is Grade.ODD) != bool(expected)):
                out[(i, j, k)] = b
                continue
            r1 = b - B[j][i][k].scale(sign(pi * pj))
            r2 = b - B[i][k][j].scale(sign(pj * pk))
            if not r1.is_zero():
                out[(i, j, k)] = r1
            elif not r2.is_zero():
                out[(i, j, k)] = r2
        return out


def graded_symmetrize(chart: Chart, table) -> tuple:
    """Average of ``table`` over the six slot permutations with Koszul signs."""
    n = chart.dim
    par = [int(chart.parity(i)) for i in range(n)]
    sixth = Fraction(1, 6)
    out = []
    for i in range(n):
        row = []
        for j in range(n):
            col = []
            for k in range(n):
                idx = (i, j, k)
                acc = chart.zero()
                for perm in permutations(range(3)):
                    src = tuple(idx[a] for a in perm)
                    v = table[src[0]][src[1]][src[2]]
                    if not v.is_zero():
                        acc = acc + v.scale(koszul_sign(tuple(par[t] for t in idx), perm))
                col.append(acc.scale(sixth))
            row.append(tuple(col))
        out.append(tuple(row))
    return tuple(out)


def s_from_cochain(omega: BilinearForm, B: SCochain) -> STensor:
    """The S-tensor with w(S(d_i,d_j), d_k) = B_ijk."""
    chart = omega.chart
    if B.chart != chart:
        raise SignatureError("cochain and form live on different charts")
    if B.parity is not omega.parity:
        raise PreconditionError(f"cochain parity {B.parity} differs from form parity {omega.parity}")
    bad = B.symmetry_residuals()
    if bad:
        (i, j, k), _ = next(iter(bad.items()))
        raise PreconditionError(f"cochain is not totally graded symmetric at ({i + 1},{j + 1},{k + 1})")
    n = chart.dim
    table = []
    for i in range(n):
        row = []
        for j in range(n):
            V = solve_against_omega(omega, [B.components[i][j][k] for k in range(n)], chart.parity(i) + chart.parity(j))
            row.append(V.components)
        table.append(row)
    return STensor(chart, table)


def check_admissible(omega: BilinearForm, S: Tensor21) -> VerificationReport:
    """Supersymmetry of S and total graded symmetry of w(S(X,Y),Z)."""
    chart = omega.chart
    n = chart.dim
    par = [int(chart.parity(i)) for i in range(n)]

    def supersym():
        for i, j, k in _triples(n):
            yield (i, j, k), S.table[i][j][k] - S.table[j][i][k].scale(sign(par[i] * par[j]))

    P = _n_pairing(S, omega)

    def totalsym():
        for i, j, k in _triples(n):
            yield (i, j, k), P[i][j][k] - P[i][k][j].scale(sign(par[j] * par[k]))

    return VerificationReport(
        (_collect("supersymmetry", chart, supersym()), _collect("total_symmetry", chart, totalsym()))
    )


def deform(C: Connection, S: Tensor21) -> Connection:
    return C + S


# ---------------------------------------------------------------------------
# random sampling


def random_superfunction(
    chart: Chart, parity: Parity, degree: int, rng: random.Random, coeff_range: int = 2, density: float = 0.5
) -> Superfunction:
    """Random homogeneous superfunction with polynomial coefficients.

    Terms are ``c * x^e * theta^I`` with total degree ``|e| + |I| <= degree``
    and ``|I|`` of the requested parity; each candidate term is kept with
    probability ``density`` and gets a nonzero integer in ``[-coeff_range, coeff_range]``.
    """
    from superfedosov.superscalar import Polynomial, RationalFunction

    p, q = chart.p, chart.q
    by_mask: dict[int, dict] = {}
    for mask in range(1 << q):
        k = mask.bit_count()
        if (k & 1) != int(parity) or k > degree:
            continue
        for exps in _monomials(p, degree - k):
            if rng.random() < density:
                c = rng.randint(1, coeff_range) * rng.choice((-1, 1))
                by_mask.setdefault(mask, {})[exps] = c
    comps = {m: RationalFunction(Polynomial.from_terms(t, p)) for m, t in by_mask.items()}
    return Superfunction(p, q, comps)


def _monomials(nvars: int, max_degree: int):
    if max_degree < 0:
        return
    if nvars == 0:
        yield ()
        return
    for e in range(max_degree + 1):
        for rest in _monomials(nvars - 1, max_degree - e):
            yield (e,) + rest


def random_cochain(chart: Chart, parity: Parity, degree: int, seed: int) -> SCochain:
    """Deterministic random admissible cochain of the given parity."""
    if degree < 0:
        raise ValueError("degree bound must be nonnegative")
    rng = random.Random(seed)
    n = chart.dim
    raw = []
    for i in range(n):
        row = []
        for j in range(n):
            col = []
            for k in range(n):
                par = Parity(parity) + chart.parity(i) + chart.parity(j) + chart.parity(k)
                col.append(random_superfunction(chart, par, degree, rng, density=0.3))
            row.append(tuple(col))
        raw.append(tuple(row))
    return SCochain(chart, graded_symmetrize(chart, raw), Parity(parity))
