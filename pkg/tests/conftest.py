import numpy as np
import pytest

from bipartite_rec.graph import build_graph

ACCEPTANCE_LINES = []


def random_graph(rng, max_users=50, max_items=100, density=(0.02, 0.3)):
    n = int(rng.integers(1, max_users + 1))
    m = int(rng.integers(1, max_items + 1))
    p = rng.uniform(*density)
    a = rng.random((n, m)) < p
    if not a.any():
        a[rng.integers(n), rng.integers(m)] = True
    u, i = np.nonzero(a)
    return build_graph(list(zip(u.tolist(), i.tolist())))


@pytest.fixture
def micro():
    # users u1{i1,i2}, u2{i2,i3}; dense indices 0, 1 and 0, 1, 2
    return build_graph([(1, 1), (1, 2), (2, 2), (2, 3)])


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
