"""Exact superfunction arithmetic.

A superfunction on a chart with ``p`` even and ``q`` odd coordinates is a
finite sum ``sum_I f_I * theta^I`` where ``I`` runs over subsets of the odd
coordinates (stored as bitmasks, bit ``a`` for ``theta_a``), ``theta^I`` is the
product of the generators in ascending index order, and every ``f_I`` is a
rational function of the even coordinates. Coefficients sit to the left of
the Grassmann monomial.

Coordinates are addressed by a flat index ``0 .. p+q-1``: the ``p`` even
coordinates come first, then the ``q`` odd ones. Charts with a different
user-facing order translate into this layout (see ``supergeometry.Chart``).

Polynomials are backed by FLINT's ``fmpq_mpoly``; rational functions keep
their denominators as products of interned irreducible factors.
"""

from __future__ import annotations

import enum
import threading
from fractions import Fraction
from functools import lru_cache
from numbers import Rational
from typing import Iterable, Mapping, Sequence

import flint

from superfedosov.errors import NotInvertibleError, PoleError, SignatureError, HomogeneityError

__all__ = [
    "Parity",
    "Grade",
    "sign",
    "Polynomial",
    "RationalFunction",
    "Superfunction",
    "multiply",
    "invert",
    "partial_derivative",
    "evaluate_even",
    "parity_of",
]


class Parity(enum.IntEnum):
    EVEN = 0
    ODD = 1

    def __add__(self, other):
        return Parity((int(self) + int(other)) & 1)

    __radd__ = __add__

    def __str__(self):
        return self.name.lower()


class Grade(enum.Enum):
    """Result of ``parity_of``: a parity, or one of the two degenerate cases."""

    EVEN = "even"
    ODD = "odd"
    MIXED = "mixed"
    ZERO = "zero"


def sign(exponent: int) -> int:
    """``(-1) ** exponent`` without the float detour."""
    return -1 if exponent & 1 else 1


def _to_fmpq(c) -> flint.fmpq:
    if isinstance(c, flint.fmpq):
        return c
    if isinstance(c, int):
        return flint.fmpq(c)
    if isinstance(c, Rational):
        return flint.fmpq(int(c.numerator), int(c.denominator))
    raise TypeError(f"exact rational expected, got {type(c).__name__}")


def _to_fraction(c: flint.fmpq) -> Fraction:
    return Fraction(int(c.p), int(c.q))


@lru_cache(maxsize=None)
def _context(nvars: int):
    return flint.fmpq_mpoly_ctx.get(tuple(f"x{i}" for i in range(nvars)), "deglex")


# ---------------------------------------------------------------------------
# Polynomials


class Polynomial:
    """Sparse polynomial over Q in ``nvars`` commuting variables."""

    __slots__ = ("raw", "nvars")

    def __init__(self, raw, nvars: int):
        self.raw = raw
        self.nvars = nvars

    @classmethod
    def from_terms(cls, terms: Mapping[tuple[int, ...], object], nvars: int) -> "Polynomial":
        clean = {}
        for exps, c in terms.items():
            if len(exps) != nvars or any(e < 0 for e in exps):
                raise ValueError(f"bad exponent vector {exps!r} for {nvars} variables")
            c = _to_fmpq(c)
            if c != 0:
                clean[tuple(exps)] = c
        return cls(_context(nvars).from_dict(clean), nvars)

    @classmethod
    def constant(cls, c, nvars: int) -> "Polynomial":
        return cls(_context(nvars).constant(_to_fmpq(c)), nvars)

    @classmethod
    def variable(cls, i: int, nvars: int) -> "Polynomial":
        return cls(_context(nvars).gen(i), nvars)

    @property
    def terms(self) -> dict[tuple[int, ...], Fraction]:
        return {tuple(m): _to_fraction(c) for m, c in self.raw.to_dict().items()}

    def is_zero(self) -> bool:
        return self.raw.is_zero()

    def is_one(self) -> bool:
        return self.raw.is_one()

    def total_degree(self) -> int:
        return -1 if self.raw.is_zero() else int(self.raw.total_degree())

    def derivative(self, i: int) -> "Polynomial":
        return Polynomial(self.raw.derivative(i), self.nvars)

    def evaluate(self, point: Sequence) -> Fraction:
        if len(point) != self.nvars:
            raise SignatureError(f"point has {len(point)} entries, expected {self.nvars}")
        if self.nvars == 0:
            return _to_fraction(self.raw.leading_coefficient()) if not self.raw.is_zero() else Fraction(0)
        return _to_fraction(self.raw(*[_to_fmpq(v) for v in point]))

    def _check(self, other):
        if self.nvars != other.nvars:
            raise SignatureError(f"polynomials in {self.nvars} and {other.nvars} variables")

    def __add__(self, other):
        self._check(other)
        return Polynomial(self.raw + other.raw, self.nvars)

    def __sub__(self, other):
        self._check(other)
        return Polynomial(self.raw - other.raw, self.nvars)

    def __mul__(self, other):
        self._check(other)
        return Polynomial(self.raw * other.raw, self.nvars)

    def __neg__(self):
        return Polynomial(-self.raw, self.nvars)

    def __pow__(self, n: int):
        return Polynomial(self.raw**n, self.nvars)

    def __eq__(self, other):
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self.nvars == other.nvars and self.raw == other.raw

    __hash__ = None

    def __repr__(self):
        return f"Polynomial({self.raw})"


# ---------------------------------------------------------------------------
# Rational functions
#
# Denominators are products of monic irreducible polynomials interned in a
# per-ring factor registry, so sums only need an exponent-wise lcm. Sums and
# products are not cancelled eagerly: zero testing and cross-multiplied
# equality are exact regardless. Cancellation happens when a reciprocal
# factors its argument and in ``reduced()``.


class _FactorRegistry:
    def __init__(self, nvars: int):
        self.nvars = nvars
        self.polys: list = []
        self.ids: dict[str, int] = {}
        self.lock = threading.Lock()

    def intern(self, f) -> int:
        key = str(f)
        fid = self.ids.get(key)
        if fid is None:
            with self.lock:
                fid = self.ids.get(key)
                if fid is None:
                    fid = len(self.polys)
                    self.polys.append(f)
                    self.ids[key] = fid
        return fid

    @lru_cache(maxsize=4096)
    def power(self, fid: int, e: int):
        return self.polys[fid] ** e

    def product(self, factors) -> object:
        out = _context(self.nvars).constant(1)
        for fid, e in factors:
            out = out * self.power(fid, e)
        return out


@lru_cache(maxsize=None)
def _registry(nvars: int) -> _FactorRegistry:
    return _FactorRegistry(nvars)


_ONE: tuple = ()


def _merge(b: tuple, d: tuple, op) -> tuple:
    out = dict(b)
    for fid, e in d:
        out[fid] = op(out.get(fid, 0), e)
    return tuple(sorted((f, e) for f, e in out.items() if e))


def _cofactor(reg: _FactorRegistry, full: tuple, part: tuple):
    have = dict(part)
    out = _context(reg.nvars).constant(1)
    for fid, e in full:
        k = e - have.get(fid, 0)
        if k:
            out = out * reg.power(fid, k)
    return out


def _factor_poly(reg: _FactorRegistry, a):
    """Split ``a`` into (scalar, factors) with monic interned factors."""
    content, facs = a.factor()
    scalar = content
    out = {}
    for f, e in facs:
        lc = f.leading_coefficient()
        if lc != 1:
            scalar = scalar * lc**e
            f = f * (1 / lc)
        fid = reg.intern(f)
        out[fid] = out.get(fid, 0) + int(e)
    return scalar, tuple(sorted(out.items()))


class RationalFunction:
    """Quotient ``numerator / prod f_i^e_i`` over Q.

    Equality is decided by cross-multiplication, so it does not depend on
    whether either side has been cancelled.
    """

    __slots__ = ("_n", "_den", "nvars")

    def __init__(self, numerator: Polynomial, denominator: Polynomial | None = None):
        nvars = numerator.nvars
        if denominator is None:
            self._n, self._den, self.nvars = numerator.raw, _ONE, nvars
            return
        numerator._check(denominator)
        if denominator.is_zero():
            raise ZeroDivisionError("zero denominator polynomial")
        inv = RationalFunction._raw(denominator.raw, _ONE, nvars).reciprocal()
        self._n, self._den, self.nvars = (numerator.raw * inv._n), inv._den, nvars

    @classmethod
    def _raw(cls, n, den, nvars):
        self = object.__new__(cls)
        self._n = n
        self._den = den
        self.nvars = nvars
        return self

    @classmethod
    def constant(cls, c, nvars: int) -> "RationalFunction":
        return cls._raw(_context(nvars).constant(_to_fmpq(c)), _ONE, nvars)

    @property
    def numerator(self) -> Polynomial:
        return Polynomial(self._n, self.nvars)

    @property
    def denominator(self) -> Polynomial:
        return Polynomial(_registry(self.nvars).product(self._den), self.nvars)

    @property
    def denominator_factors(self) -> tuple[tuple[Polynomial, int], ...]:
        reg = _registry(self.nvars)
        return tuple((Polynomial(reg.polys[f], self.nvars), e) for f, e in self._den)

    def is_zero(self) -> bool:
        return self._n.is_zero()

    def reduced(self) -> "RationalFunction":
        """Cancel every denominator factor that divides the numerator."""
        if not self._den or self._n.is_zero():
            return RationalFunction._raw(self._n, _ONE if self._n.is_zero() else self._den, self.nvars)
        reg = _registry(self.nvars)
        n = self._n
        out = []
        for fid, e in self._den:
            f = reg.polys[fid]
            while e:
                try:
                    n = n / f
                except Exception:  # flint DomainError: division not exact
                    break
                e -= 1
            if e:
                out.append((fid, e))
        return RationalFunction._raw(n, tuple(out), self.nvars)

    def is_polynomial(self) -> bool:
        return not self.reduced()._den

    def is_constant(self) -> bool:
        r = self.reduced()
        return not r._den and r._n.is_constant()

    def constant_value(self) -> Fraction:
        r = self.reduced()
        if r._den or not r._n.is_constant():
            raise ValueError("not a constant")
        if r._n.is_zero():
            return Fraction(0)
        return _to_fraction(r._n.leading_coefficient())

    def __add__(self, other: "RationalFunction") -> "RationalFunction":
        b, d = self._den, other._den
        if b == d:
            return RationalFunction._raw(self._n + other._n, b, self.nvars)
        if self._n.is_zero():
            return other
        if other._n.is_zero():
            return self
        reg = _registry(self.nvars)
        lcm = _merge(b, d, max)
        num = self._n * _cofactor(reg, lcm, b) + other._n * _cofactor(reg, lcm, d)
        return RationalFunction._raw(num, lcm, self.nvars)

    def __neg__(self):
        return RationalFunction._raw(-self._n, self._den, self.nvars)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other: "RationalFunction") -> "RationalFunction":
        num = self._n * other._n
        if num.is_zero():
            return RationalFunction._raw(num, _ONE, self.nvars)
        if not other._den:
            return RationalFunction._raw(num, self._den, self.nvars)
        if not self._den:
            return RationalFunction._raw(num, other._den, self.nvars)
        return RationalFunction._raw(num, _merge(self._den, other._den, int.__add__), self.nvars)

    def scale(self, c) -> "RationalFunction":
        return RationalFunction._raw(self._n * _to_fmpq(c), self._den, self.nvars)

    def reciprocal(self) -> "RationalFunction":
        if self._n.is_zero():
            raise NotInvertibleError("reciprocal of the zero rational function")
        reg = _registry(self.nvars)
        if self._n.is_constant():
            scalar, facs = self._n.leading_coefficient(), _ONE
        else:
            scalar, facs = _factor_poly(reg, self._n)
        # (c * prod g^k) / prod f^e  ->  prod f^e / (c * prod g^k), cancelling shared factors
        mine = dict(self._den)
        new_den = []
        for fid, k in facs:
            e = mine.get(fid, 0)
            common = min(e, k)
            if common:
                mine[fid] = e - common
            if k - common:
                new_den.append((fid, k - common))
        num = _context(self.nvars).constant(1 / scalar)
        for fid, e in mine.items():
            if e:
                num = num * reg.power(fid, e)
        return RationalFunction._raw(num, tuple(new_den), self.nvars)

    def derivative(self, i: int) -> "RationalFunction":
        n = self._n
        if not self._den:
            return RationalFunction._raw(n.derivative(i), _ONE, self.nvars)
        # d(n / prod f^e) = (n' prod f - n sum e f' prod_{g != f} g) / prod f^(e+1)
        reg = _registry(self.nvars)
        polys = [reg.polys[fid] for fid, _ in self._den]
        one = _context(self.nvars).constant(1)
        total = one
        for f in polys:
            total = total * f
        acc = n.derivative(i) * total
        for idx, ((fid, e), f) in enumerate(zip(self._den, polys)):
            df = f.derivative(i)
            if df.is_zero():
                continue
            others = one
            for jdx, g in enumerate(polys):
                if jdx != idx:
                    others = others * g
            acc = acc - n * df * others * e
        return RationalFunction._raw(acc, tuple((fid, e + 1) for fid, e in self._den), self.nvars)

    def evaluate(self, point: Sequence) -> Fraction:
        den = self.denominator.evaluate(point)
        if den == 0:
            r = self.reduced()
            den = r.denominator.evaluate(point)
            if den == 0:
                raise PoleError(f"denominator {r.denominator.raw} vanishes at {tuple(point)}")
            return r.numerator.evaluate(point) / den
        return self.numerator.evaluate(point) / den

    def __eq__(self, other):
        if not isinstance(other, RationalFunction):
            return NotImplemented
        if self.nvars != other.nvars:
            return False
        if self._den == other._den:
            return self._n == other._n
        return (self - other)._n.is_zero()

    __hash__ = None

    def __repr__(self):
        r = self.reduced()
        if not r._den:
            return f"RationalFunction({r._n})"
        return f"RationalFunction(({r._n})/({r.denominator.raw}))"


# ---------------------------------------------------------------------------
# Grassmann bookkeeping


@lru_cache(maxsize=None)
def _wedge_sign(left: int, right: int) -> int:
    """Sign of reordering theta^left * theta^right into ascending order."""
    swaps = 0
    bit = 0
    r = right
    while r:
        if r & 1:
            swaps += (left >> (bit + 1)).bit_count()
        r >>= 1
        bit += 1
    return sign(swaps)


def mask_indices(mask: int) -> tuple[int, ...]:
    out = []
    bit = 0
    while mask:
        if mask & 1:
            out.append(bit)
        mask >>= 1
        bit += 1
    return tuple(out)


def indices_mask(indices: Iterable[int]) -> int:
    mask = 0
    for i in indices:
        mask |= 1 << i
    return mask


# ---------------------------------------------------------------------------
# Superfunctions


class Superfunction:
    """Element of Frac(Q[x_1..x_p]) tensor Lambda(theta_1..theta_q)."""

    __slots__ = ("p", "q", "_c")

    def __init__(self, p: int, q: int, components: Mapping[int, RationalFunction] | None = None):
        self.p = p
        self.q = q
        comps = {}
        if components:
            for mask, coeff in components.items():
                if mask >> q:
                    raise SignatureError(f"odd monomial {mask:b} exceeds q={q}")
                if coeff.nvars != p:
                    raise SignatureError(f"coefficient in {coeff.nvars} variables, chart has p={p}")
                if not coeff.is_zero():
                    comps[mask] = coeff
        self._c = comps

    @classmethod
    def _trusted(cls, p, q, comps):
        self = object.__new__(cls)
        self.p = p
        self.q = q
        self._c = comps
        return self

    # constructors

    @classmethod
    def zero(cls, p: int, q: int) -> "Superfunction":
        return cls._trusted(p, q, {})

    @classmethod
    def constant(cls, c, p: int, q: int) -> "Superfunction":
        if c == 0:
            return cls.zero(p, q)
        return cls._trusted(p, q, {0: RationalFunction.constant(c, p)})

    @classmethod
    def from_rational_function(cls, f: RationalFunction, q: int, mask: int = 0) -> "Superfunction":
        return cls(f.nvars, q, {mask: f})

    @classmethod
    def coordinate(cls, index: int, p: int, q: int) -> "Superfunction":
        """Coordinate function for flat index ``index`` (evens first)."""
        if not 0 <= index < p + q:
            raise IndexError(f"coordinate index {index} out of range for ({p}|{q})")
        if index < p:
            rf = RationalFunction._raw(_context(p).gen(index), _ONE, p)
            return cls._trusted(p, q, {0: rf})
        return cls._trusted(p, q, {1 << (index - p): RationalFunction.constant(1, p)})

    # inspection

    @property
    def signature(self) -> tuple[int, int]:
        return (self.p, self.q)

    @property
    def components(self) -> dict[tuple[int, ...], RationalFunction]:
        return {mask_indices(m): c for m, c in self._c.items()}

    def items(self):
        return self._c.items()

    def coefficient(self, mask: int) -> RationalFunction:
        return self._c.get(mask) or RationalFunction.constant(0, self.p)

    @property
    def body(self) -> RationalFunction:
        return self.coefficient(0)

    @property
    def soul(self) -> "Superfunction":
        return Superfunction._trusted(self.p, self.q, {m: c for m, c in self._c.items() if m})

    def is_zero(self) -> bool:
        return not self._c

    def is_body_only(self) -> bool:
        return all(m == 0 for m in self._c)

    def grade(self) -> Grade:
        if not self._c:
            return Grade.ZERO
        parities = {m.bit_count() & 1 for m in self._c}
        if len(parities) == 2:
            return Grade.MIXED
        return Grade.ODD if parities.pop() else Grade.EVEN

    @property
    def parity(self) -> Parity:
        """Parity of a homogeneous superfunction; zero counts as even."""
        g = self.grade()
        if g is Grade.MIXED:
            raise HomogeneityError(f"mixed-parity superfunction {self!r}")
        return Parity.ODD if g is Grade.ODD else Parity.EVEN

    def is_constant(self) -> bool:
        return all(c.is_constant() for c in self._c.values())

    # arithmetic

    def _check(self, other):
        if self.p != other.p or self.q != other.q:
            raise SignatureError(f"chart signatures ({self.p}|{self.q}) and ({other.p}|{other.q}) differ")

    def __add__(self, other: "Superfunction") -> "Superfunction":
        self._check(other)
        if not other._c:
            return self
        if not self._c:
            return other
        out = dict(self._c)
        for m, c in other._c.items():
            prev = out.get(m)
            if prev is None:
                out[m] = c
            else:
                s = prev + c
                if s.is_zero():
                    del out[m]
                else:
                    out[m] = s
        return Superfunction._trusted(self.p, self.q, out)

    def __neg__(self):
        return Superfunction._trusted(self.p, self.q, {m: -c for m, c in self._c.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, (int, Rational)):
            return self.scale(other)
        if not isinstance(other, Superfunction):
            return NotImplemented
        self._check(other)
        if not self._c or not other._c:
            return Superfunction._trusted(self.p, self.q, {})
        out: dict[int, RationalFunction] = {}
        for m1, c1 in self._c.items():
            for m2, c2 in other._c.items():
                if m1 & m2:
                    continue
                term = c1 * c2
                if _wedge_sign(m1, m2) < 0:
                    term = -term
                key = m1 | m2
                prev = out.get(key)
                out[key] = term if prev is None else prev + term
        return Superfunction._trusted(self.p, self.q, {m: c for m, c in out.items() if not c.is_zero()})

    def __rmul__(self, other):
        if isinstance(other, (int, Rational)):
            return self.scale(other)
        return NotImplemented

    def scale(self, c) -> "Superfunction":
        if c == 0:
            return Superfunction._trusted(self.p, self.q, {})
        if c == 1:
            return self
        if c == -1:
            return -self
        return Superfunction._trusted(self.p, self.q, {m: v.scale(c) for m, v in self._c.items()})

    def __pow__(self, n: int) -> "Superfunction":
        if n < 0:
            return self.invert() ** (-n)
        result = Superfunction.constant(1, self.p, self.q)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def invert(self) -> "Superfunction":
        body = self._c.get(0)
        if body is None:
            raise NotInvertibleError(f"superfunction with zero body is not invertible: {self!r}")
        inv_body = Superfunction._trusted(self.p, self.q, {0: body.reciprocal()})
        if self.is_body_only():
            return inv_body
        u = -(self.soul * inv_body)  # -soul/body, nilpotent
        total = Superfunction.constant(1, self.p, self.q)
        power = total
        for _ in range(self.q):
            power = power * u
            if power.is_zero():
                break
            total = total + power
        return inv_body * total

    def __truediv__(self, other):
        if isinstance(other, (int, Rational)):
            return self.scale(Fraction(1) / Fraction(other))
        return self * other.invert()

    def partial(self, index: int) -> "Superfunction":
        """Derivative along flat coordinate ``index``; left derivative for odd ones."""
        p, q = self.p, self.q
        if not 0 <= index < p + q:
            raise IndexError(f"coordinate index {index} out of range for ({p}|{q})")
        out = {}
        if index < p:
            for m, c in self._c.items():
                d = c.derivative(index)
                if not d.is_zero():
                    out[m] = d
        else:
            a = index - p
            bit = 1 << a
            below = bit - 1
            for m, c in self._c.items():
                if m & bit:
                    out[m ^ bit] = -c if (m & below).bit_count() & 1 else c
        return Superfunction._trusted(p, q, out)

    def reduced(self) -> "Superfunction":
        """Same value with every coefficient cancelled to lowest terms."""
        return Superfunction._trusted(self.p, self.q, {m: c.reduced() for m, c in self._c.items()})

    def evaluate_even(self, point: Sequence) -> "Superfunction":
        """Substitute exact rationals for every even coordinate."""
        out = {}
        for m, c in self._c.items():
            v = c.evaluate(point)
            if v:
                out[m] = RationalFunction.constant(v, self.p)
        return Superfunction._trusted(self.p, self.q, out)

    def __eq__(self, other):
        if isinstance(other, (int, Rational)):
            other = Superfunction.constant(other, self.p, self.q)
        if not isinstance(other, Superfunction):
            return NotImplemented
        if self.signature != other.signature or self._c.keys() != other._c.keys():
            return False
        return all(c == other._c[m] for m, c in self._c.items())

    __hash__ = None

    def __repr__(self):
        if not self._c:
            return "Superfunction(0)"
        parts = []
        for m in sorted(self._c, key=lambda m: (m.bit_count(), mask_indices(m))):
            mono = "*".join(f"th{i}" for i in mask_indices(m))
            parts.append(f"({self._c[m]})" + (f"*{mono}" if mono else ""))
        return "Superfunction(" + " + ".join(parts) + ")"


# ---------------------------------------------------------------------------
# functional surface


def multiply(a: Superfunction, b: Superfunction) -> Superfunction:
    return a * b


def invert(a: Superfunction) -> Superfunction:
    return a.invert()


def partial_derivative(a: Superfunction, index: int) -> Superfunction:
    return a.partial(index)


def evaluate_even(a: Superfunction, point: Sequence) -> Superfunction:
    return a.evaluate_even(point)


def parity_of(a: Superfunction) -> Grade:
    return a.grade()
