import itertools

import numpy as np
import pytest

from bottleneckhc.algebra import Poly, PolySystem, parse_system
from bottleneckhc.families import named, random_hypersurface, random_rational_normal_curve


def surface(d, seed):
    return random_hypersurface(3, d, np.random.default_rng(seed))


def rnc(n, seed):
    return random_rational_normal_curve(n, np.random.default_rng(seed))


def twisted_cubic():
    return parse_system("vars: x,y,z; dim: 1; y - x^2; z - x*y; x*z - y^2;")


def random_poly(gen, n, d, density=0.5):
    terms = []
    for e in itertools.product(range(d + 1), repeat=n):
        if sum(e) <= d and gen.random() < density:
            terms.append((e, complex(gen.standard_normal(), gen.standard_normal())))
    return Poly(n, terms)


@pytest.fixture
def ellipse():
    return named("ellipse")


@pytest.fixture
def circle():
    return named("circle")


@pytest.fixture
def two_ovals():
    return named("two-ovals")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# one line per acceptance criterion, printed at the end of the run
ACCEPTANCE_LINES: dict = {}


def record_acceptance(number, status: str, detail: str) -> None:
    line = f"criterion {number:>2}: {status:8s} {detail}"
    ACCEPTANCE_LINES[number] = line
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[k])
