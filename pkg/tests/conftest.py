import numpy as np
import pytest
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False)


def complex_arrays(shape):
    return st.tuples(hnp.arrays(float, shape, elements=finite), hnp.arrays(float, shape, elements=finite)).map(
        lambda ab: ab[0] + 1j * ab[1]
    )


def hermitian(n):
    return complex_arrays((n, n)).map(lambda a: (a + a.conj().T) / 2)


def unit_kets(n):
    return complex_arrays((n,)).filter(lambda v: np.linalg.norm(v) > 1e-3).map(lambda v: v / np.linalg.norm(v))


ACCEPTANCE_KEY = pytest.StashKey[list]()


@pytest.fixture
def acceptance_log(request):
    return request.config.stash.setdefault(ACCEPTANCE_KEY, [])


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(ACCEPTANCE_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
