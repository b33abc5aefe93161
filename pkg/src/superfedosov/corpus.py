"""Random symplectic superdomains for property and acceptance suites.

A corpus form is a constant Darboux-type Gram matrix plus the exterior
derivative of a random bounded-degree 1-form, which keeps it closed by
construction. Draws whose body determinant vanishes identically are
resampled.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from superfedosov.errors import DegenerateFormError, PreconditionError
from superfedosov.fedosov import random_superfunction
from superfedosov.superscalar import Parity, Superfunction
from superfedosov.supergeometry import BilinearForm, Chart, TwoForm, d_one_form

# (p, q, parity of omega); odd forms need p == q
SHAPES: tuple[tuple[int, int, Parity], ...] = (
    (2, 0, Parity.EVEN),
    (2, 1, Parity.EVEN),
    (2, 2, Parity.EVEN),
    (2, 3, Parity.EVEN),
    (2, 2, Parity.ODD),
    (4, 0, Parity.EVEN),
    (4, 1, Parity.EVEN),
    (4, 2, Parity.EVEN),
    (4, 3, Parity.EVEN),
)


def darboux_form(chart: Chart, parity: Parity) -> BilinearForm:
    """Constant canonical Gram matrix.

    Even: ``w(x_{2a-1}, x_{2a}) = 1`` on the even block and ``w(th_a, th_a) = 1``.
    Odd: ``w(x_a, th_a) = 1``.
    """
    n = chart.dim
    evens = [i for i in range(n) if chart.parity(i) is Parity.EVEN]
    odds = [i for i in range(n) if chart.parity(i) is Parity.ODD]
    gram = [[chart.zero()] * n for _ in range(n)]
    one, minus = chart.constant(1), chart.constant(-1)
    if Parity(parity) is Parity.EVEN:
        if len(evens) % 2:
            raise PreconditionError("an even symplectic form needs an even number of even coordinates")
        for a in range(0, len(evens), 2):
            i, j = evens[a], evens[a + 1]
            gram[i][j], gram[j][i] = one, minus
        for t in odds:
            gram[t][t] = one
    else:
        if len(evens) != len(odds):
            raise PreconditionError("an odd symplectic form needs p == q")
        for i, t in zip(evens, odds):
            gram[i][t], gram[t][i] = one, minus
    return BilinearForm(chart, tuple(map(tuple, gram)), Parity(parity))


def random_one_form(chart: Chart, parity: Parity, degree: int, rng: random.Random) -> tuple[Superfunction, ...]:
    return tuple(
        random_superfunction(chart, Parity(parity) + chart.parity(j), degree, rng) for j in range(chart.dim)
    )


def random_symplectic_form(
    chart: Chart, parity: Parity, degree: int, rng: random.Random, max_tries: int = 100
) -> TwoForm:
    base = darboux_form(chart, parity)
    for _ in range(max_tries):
        alpha = random_one_form(chart, parity, degree, rng)
        d = d_one_form(chart, alpha, parity)
        n = chart.dim
        gram = tuple(tuple(base.gram[i][j] + d.gram[i][j] for j in range(n)) for i in range(n))
        try:
            return TwoForm(chart, gram, Parity(parity))
        except DegenerateFormError:
            continue
    raise DegenerateFormError(f"no nondegenerate draw after {max_tries} tries")


@dataclass(frozen=True)
class Instance:
    index: int
    chart: Chart
    omega: TwoForm
    alpha_degree: int

    @property
    def label(self) -> str:
        return f"#{self.index} R^({self.chart.p}|{self.chart.q}) {self.omega.parity} omega"


def build_instance(index: int, seed: int, degree: int = 2, shapes=SHAPES) -> Instance:
    p, q, parity = shapes[index % len(shapes)]
    chart = Chart.standard(p, q)
    rng = random.Random(f"{seed}:{index}")
    return Instance(index, chart, random_symplectic_form(chart, parity, degree, rng), degree)


def build_corpus(count: int, seed: int, degree: int = 2, shapes=SHAPES) -> list[Instance]:
    return [build_instance(i, seed, degree, shapes) for i in range(count)]


@dataclass(frozen=True)
class CorpusConfig:
    """Parameters of a reproducible random corpus."""

    count: int = 54
    seed: int = 2024
    degree: int = 2
    shapes: tuple = SHAPES

    def instances(self):
        for i in range(self.count):
            yield build_instance(i, self.seed, self.degree, self.shapes)
