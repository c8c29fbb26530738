import math

import numpy as np
import pytest
from hypothesis import settings
from hypothesis import strategies as st

from memgrid import CrossbarState, MemductanceModel

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")

LN3 = math.log(3.0)


@pytest.fixture
def sig():
    return MemductanceModel.sigmoid(1.0, 3.0, 1.0)


@pytest.fixture
def state22(sig):
    return CrossbarState.uniform(2, 2, sig, [0.0, -LN3, LN3, 0.0])


@st.composite
def sigmoid_models(draw):
    w_min = draw(st.floats(0.1, 5.0))
    width = draw(st.floats(0.1, 10.0))
    c = draw(st.floats(0.1, 10.0))
    return MemductanceModel.sigmoid(w_min, w_min + width, c)


@st.composite
def states(draw, max_dim=5, closed=None):
    m = draw(st.integers(1, max_dim))
    n = draw(st.integers(1, max_dim))
    model = draw(sigmoid_models())
    phi = draw(st.lists(st.floats(-5, 5), min_size=m * n, max_size=m * n))
    if closed is None:
        sw = draw(st.lists(st.booleans(), min_size=m * n, max_size=m * n))
        sw = np.array(sw).reshape(m, n)
    else:
        sw = np.full((m, n), closed)
    return CrossbarState.uniform(m, n, model, phi, sw)


def random_state(rng, m, n, closed=True):
    w_min = rng.uniform(0.5, 2.0)
    model = MemductanceModel.sigmoid(w_min, w_min + rng.uniform(0.5, 4.0), rng.uniform(0.3, 3.0))
    return CrossbarState.uniform(m, n, model, rng.uniform(-3, 3, m * n),
                                 np.ones((m, n), bool) if closed else rng.random((m, n)) < 0.5)


# one line per acceptance criterion, printed at the end of the run
ACCEPTANCE_RESULTS: dict = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_RESULTS):
        ok, detail = ACCEPTANCE_RESULTS[key]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  criterion {key:>2}: {detail}")
