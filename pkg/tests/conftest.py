from functools import lru_cache
from pathlib import Path

import pytest
from hypothesis import strategies as st

from bipdrg.arrays import SUITE_ARRAYS, IntersectionArray
from bipdrg.graphs import build_doubled_odd, build_folded_cube, build_hypercube
from bipdrg.oracle import decompose, operator_set
from bipdrg.spectra import spectrum

DATA = Path(__file__).parent / "data"


@lru_cache(maxsize=None)
def suite_spectrum(name):
    return spectrum(SUITE_ARRAYS[name])


GRAPHS = {
    "Q_4": lambda: build_hypercube(4),
    "Q_5": lambda: build_hypercube(5),
    "Q_6": lambda: build_hypercube(6),
    "2.O_3": lambda: build_doubled_odd(3),
    "2.O_4": lambda: build_doubled_odd(4),
    "folded_8": lambda: build_folded_cube(8),
}


@lru_cache(maxsize=None)
def oracle(name, x=0, seed=42):
    g = GRAPHS[name]()
    ops = operator_set(g, x)
    return g, ops, decompose(g, x, seed, ops)


@pytest.fixture(params=sorted(SUITE_ARRAYS))
def suite_name(request):
    return request.param


@st.composite
def formal_arrays(draw, min_D=4, max_D=7):
    """Arrays obeying c_i + b_i = k, c_1 = 1, c nondecreasing, b_i > 0 for i < D.

    Most are not realised by any graph; they exercise the purely algebraic
    identities only.
    """
    D = draw(st.integers(min_D, max_D))
    k = draw(st.integers(3, 9))
    inner = sorted(draw(st.lists(st.integers(1, k - 1), min_size=D - 2, max_size=D - 2)))
    c = [1] + inner + [k]
    b = [k - ci for ci in [0] + c[:-1]]
    return IntersectionArray(D, tuple(b), tuple(c))


# acceptance criteria report: one line per criterion at the end of the run
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(ACCEPTANCE):
        ok, title, detail = ACCEPTANCE[num]
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] criterion {num}: {title} ({detail})")
