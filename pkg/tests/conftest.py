import numpy as np
import pytest
from hypothesis import strategies as st

from jacobi_averaging import JacobiSpec

# lines collected by the acceptance module, echoed in the terminal summary
ACCEPTANCE_LOG = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LOG:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LOG:
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@st.composite
def specs(draw, n_max=12):
    n = draw(st.integers(1, n_max))
    floats = lambda lo, hi: st.floats(lo, hi, allow_nan=False, allow_infinity=False)
    v = draw(st.lists(floats(-2.0, 2.0), min_size=n, max_size=n))
    t = draw(st.lists(floats(0.5, 2.0), min_size=n - 1, max_size=n - 1))
    return JacobiSpec(v, t)
