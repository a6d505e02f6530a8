import numpy as np
import pytest

from qdesign import qcore


@pytest.fixture
def rng():
    return qcore.make_rng(1234)


def random_matrix(rng, n, m=None):
    m = n if m is None else m
    return rng.standard_normal((n, m)) + 1j * rng.standard_normal((n, m))


def explicit_permutation(d, t, perm):
    """Permutation operator built entry by entry, independent of qcore."""
    import itertools

    n = d**t
    P = np.zeros((n, n))
    for idx in itertools.product(range(d), repeat=t):
        src = sum(i * d ** (t - 1 - k) for k, i in enumerate(idx))
        moved = [idx[perm[k]] for k in range(t)]
        dst = sum(i * d ** (t - 1 - k) for k, i in enumerate(moved))
        P[dst, src] = 1
    return P


ACCEPTANCE_LINES = []


@pytest.fixture
def criterion():
    """Record one acceptance line; the summary is printed at the end of the run."""

    def record(number, title, passed, detail=""):
        status = "PASS" if passed else "FAIL"
        ACCEPTANCE_LINES.append((number, f"criterion {number:2d} {status}  {title}  {detail}".rstrip()))
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
