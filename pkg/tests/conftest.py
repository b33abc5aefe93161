import random
import sys

import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from superfedosov.fedosov import random_superfunction
from superfedosov.frontend.expressions import parse_expression
from superfedosov.superscalar import Parity
from superfedosov.supergeometry import Chart, VectorField

settings.register_profile(
    "default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

R20 = Chart.standard(2, 0)
R21 = Chart.standard(2, 1)
R22 = Chart.standard(2, 2)
R11 = Chart.standard(1, 1)
R13 = Chart.standard(1, 3)


def sf(chart, text):
    """Shorthand: parse ``text`` on ``chart``."""
    return parse_expression(text, chart)


def vf(chart, *texts):
    return VectorField(chart, tuple(sf(chart, t) for t in texts))


def rand_sf(chart, parity, rng, degree=2, rational=False):
    f = random_superfunction(chart, parity, degree, rng)
    if rational:
        g = random_superfunction(chart, Parity.EVEN, 1, rng)
        f = f / (g + chart.constant(3))
    return f


def rand_vf(chart, parity, rng, degree=2):
    return VectorField(
        chart, tuple(rand_sf(chart, Parity(parity) + chart.parity(i), rng, degree) for i in range(chart.dim))
    )


parities = st.sampled_from([Parity.EVEN, Parity.ODD])
rngs = st.integers(0, 2**32 - 1).map(random.Random)
charts = st.sampled_from([R20, R21, R22, R13])


@pytest.fixture
def rng():
    return random.Random(12345)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
