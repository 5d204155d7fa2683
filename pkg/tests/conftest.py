import math

import numpy as np
import pytest

from shiftpair.corpus import instance, ln_pair, paper_map, paper_pair
from shiftpair.metric import SelfMap, hybrid_space, interval_space
from shiftpair.scalar_fn import Interval, Piece, Piecewise, parse_expr

LN_5_12 = math.log(5 / 12)
LN_4_12 = math.log(4 / 12)
LN_6_12 = math.log(6 / 12)
LN_3_12 = math.log(3 / 12)


def affine_map(src, lo=0.0, hi=1.0):
    return SelfMap(Piecewise((Piece(Interval(lo, hi, True, True), parse_expr(src, ("x", "t"))),)), src)


@pytest.fixture
def hybrid():
    return hybrid_space()


@pytest.fixture
def unit():
    return interval_space(0, 1)


@pytest.fixture
def paper_triple():
    return hybrid_space(), paper_map(), paper_pair()


@pytest.fixture
def paper():
    return instance("paper-example")


@pytest.fixture
def lnpair():
    return ln_pair()


@pytest.fixture
def dense_grid():
    return np.linspace(0.0, 101.0, 10_001)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
