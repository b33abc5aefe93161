"""Parsing and printing of superfunction expressions.

Grammar (whitespace insignificant)::

    expr   := term (("+" | "-") term)*
    term   := unary (("*" | "/") unary)*
    unary  := ("+" | "-") unary | power
    power  := atom ("^" exponent)?
    exponent := ["-"] INT | "(" ["-"] INT ")"
    atom   := INT | NAME | "(" expr ")"

Names resolve against a chart; odd names anticommute. The printer emits
strings in the same grammar, so ``parse_expression(format_superfunction(f))``
gives back ``f``.
"""

from __future__ import annotations

import re
from fractions import Fraction
from math import gcd, lcm

from superfedosov.errors import NotInvertibleError, ParseError
from superfedosov.superscalar import RationalFunction, Superfunction, mask_indices
from superfedosov.supergeometry import Chart

MAX_EXPONENT = 256
MAX_DEPTH = 100

_TOKEN = re.compile(r"\s*(?:(?P<int>\d+)|(?P<name>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>[-+*/^()]))")


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while True:
        while pos < len(text) and text[pos].isspace():
            pos += 1
        if pos >= len(text):
            break
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", pos, text)
        kind = m.lastgroup
        start = m.start(kind)
        tokens.append((kind, m.group(kind), start))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str, chart: Chart):
        self.text = text
        self.chart = chart
        self.tokens = _tokenize(text)
        self.i = 0
        self.depth = 0

    @property
    def tok(self):
        return self.tokens[self.i]

    def error(self, msg, pos=None):
        raise ParseError(msg, self.tok[2] if pos is None else pos, self.text)

    def take(self, value=None, kind=None):
        k, v, _ = self.tok
        if (value is not None and v != value) or (kind is not None and k != kind):
            self.error(f"expected {value or kind}, found {v or 'end of input'!r}")
        self.i += 1
        return v

    def at(self, *values):
        k, v, _ = self.tok
        return k == "op" and v in values

    def parse(self) -> Superfunction:
        if self.tok[0] == "end":
            self.error("empty expression")
        out = self.expr()
        if self.tok[0] != "end":
            self.error(f"unexpected {self.tok[1]!r}")
        return out

    def expr(self):
        self.depth += 1
        if self.depth > MAX_DEPTH:
            self.error("expression nested too deeply")
        acc = self.term()
        while self.at("+", "-"):
            op = self.take()
            rhs = self.term()
            acc = acc + rhs if op == "+" else acc - rhs
        self.depth -= 1
        return acc

    def term(self):
        acc = self.unary()
        while self.at("*", "/"):
            op_pos = self.tok[2]
            op = self.take()
            rhs = self.unary()
            if op == "*":
                acc = acc * rhs
            else:
                try:
                    acc = acc * rhs.invert()
                except NotInvertibleError:
                    self.error("division by a superfunction with zero body", op_pos)
        return acc

    def unary(self):
        if self.at("-", "+"):
            self.depth += 1
            if self.depth > MAX_DEPTH:
                self.error("expression nested too deeply")
            op = self.take()
            v = self.unary()
            self.depth -= 1
            return -v if op == "-" else v
        return self.power()

    def power(self):
        base = self.atom()
        if not self.at("^"):
            return base
        caret = self.tok[2]
        self.take("^")
        paren = self.at("(")
        if paren:
            self.take("(")
        neg = False
        if self.at("-"):
            self.take("-")
            neg = True
        if self.tok[0] != "int":
            self.error("integer exponent expected")
        n = int(self.take(kind="int"))
        if paren:
            self.take(")")
        if n > MAX_EXPONENT:
            self.error(f"exponent larger than {MAX_EXPONENT}", caret)
        if neg:
            try:
                base = base.invert()
            except NotInvertibleError:
                self.error("negative power of a superfunction with zero body", caret)
        return base**n

    def atom(self):
        kind, value, pos = self.tok
        if kind == "int":
            self.i += 1
            return self.chart.constant(int(value))
        if kind == "name":
            self.i += 1
            try:
                return self.chart.coordinate(self.chart.index(value))
            except KeyError:
                self.error(f"unknown identifier {value!r}", pos)
        if self.at("("):
            self.take("(")
            v = self.expr()
            self.take(")")
            return v
        self.error(f"unexpected {value or 'end of input'!r}")


def parse_expression(text: str, chart: Chart) -> Superfunction:
    """Parse ``text`` into a superfunction on ``chart``."""
    return _Parser(str(text), chart).parse()


# ---------------------------------------------------------------------------
# printing


def _monomial(exps, names) -> str:
    parts = []
    for e, name in zip(exps, names):
        if e == 1:
            parts.append(name)
        elif e:
            parts.append(f"{name}^{e}")
    return "*".join(parts)


def _term_key(exps):
    return (sum(exps), tuple(-e for e in exps))


def _join(terms: list[str]) -> str:
    out = terms[0]
    for t in terms[1:]:
        out += t if t.startswith("-") else "+" + t
    return out


def format_polynomial(terms: dict, names) -> str:
    """Ascending total degree; ``terms`` maps exponent tuples to Fractions."""
    if not terms:
        return "0"
    out = []
    for exps in sorted(terms, key=_term_key):
        c = terms[exps]
        mono = _monomial(exps, names)
        if not mono:
            out.append(str(c))
        elif c == 1:
            out.append(mono)
        elif c == -1:
            out.append("-" + mono)
        else:
            out.append(f"{c}*{mono}")
    return _join(out)


def _primitive(terms: dict) -> tuple[Fraction, dict]:
    """Split into content * integer primitive part with positive leading term."""
    den = lcm(*(c.denominator for c in terms.values()))
    ints = {e: int(c * den) for e, c in terms.items()}
    g = 0
    for v in ints.values():
        g = gcd(g, v)
    lead = max(ints, key=_term_key)
    if ints[lead] < 0:
        g = -g
    return Fraction(g, den), {e: Fraction(v // g) for e, v in ints.items()}


def _is_bare_power(terms: dict) -> bool:
    if len(terms) != 1:
        return False
    (exps, c), = terms.items()
    return c == 1 and sum(1 for e in exps if e) == 1


def format_rational_function(rf: RationalFunction, names) -> str:
    r = rf.reduced()
    num = r.numerator.terms
    den = r.denominator.terms
    if not num:
        return "0"
    if len(den) == 1 and all(e == 0 for e in next(iter(den))):
        d = next(iter(den.values()))
        return format_polynomial({e: c / d for e, c in num.items()}, names)
    cn, pn = _primitive(num)
    cd, pd = _primitive(den)
    c = cn / cd
    num_terms = {e: v * c.numerator for e, v in pn.items()}
    num_str = format_polynomial(num_terms, names)
    if len(num_terms) > 1:
        num_str = f"({num_str})"
    den_str = format_polynomial(pd, names)
    if c.denominator == 1:
        if not _is_bare_power(pd):
            den_str = f"({den_str})"
    else:
        if len(pd) > 1:
            den_str = f"({den_str})"
        den_str = f"({c.denominator}*{den_str})"
    return f"{num_str}/{den_str}"


def _has_top_level_sum(s: str) -> bool:
    depth = 0
    for pos, ch in enumerate(s):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        elif ch in "+-" and depth == 0 and pos > 0:
            return True
    return False


def format_superfunction(f: Superfunction, chart: Chart) -> str:
    """Render ``f`` in the parser's grammar using the chart's names."""
    if f.is_zero():
        return "0"
    names = chart.slot_names()
    even_names = names[: chart.p]
    odd_names = names[chart.p :]
    out = []
    for mask, coeff in sorted(f.items(), key=lambda mc: (mc[0].bit_count(), mask_indices(mc[0]))):
        s = format_rational_function(coeff, even_names)
        if mask == 0:
            out.append(s)
            continue
        mono = "*".join(odd_names[a] for a in mask_indices(mask))
        if s == "1":
            out.append(mono)
        elif s == "-1":
            out.append("-" + mono)
        elif _has_top_level_sum(s):
            out.append(f"({s})*{mono}")
        else:
            out.append(f"{s}*{mono}")
    return _join(out)
