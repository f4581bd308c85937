import numpy as np
import pytest
from hypothesis import strategies as st
from scipy.optimize import linear_sum_assignment

from nbclust.graph import Graph, SbmParams, sbm_sample


@st.composite
def graphs(draw, max_n=30):
    n = draw(st.integers(1, max_n))
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    chosen = draw(st.lists(st.sampled_from(pairs), unique=True, max_size=60)) if pairs else []
    return Graph.from_edges(n, chosen)


def random_tree(n, rng):
    """Uniform labelled tree via a random Prüfer sequence."""
    if n == 1:
        return Graph.from_edges(1, [])
    if n == 2:
        return Graph.from_edges(2, [(0, 1)])
    seq = rng.integers(0, n, n - 2)
    degree = np.ones(n, dtype=int)
    for x in seq:
        degree[x] += 1
    edges = []
    for x in seq:
        leaf = int(np.flatnonzero(degree == 1)[0])
        edges.append((leaf, int(x)))
        degree[leaf] -= 1
        degree[x] -= 1
    u, v = np.flatnonzero(degree == 1)
    edges.append((int(u), int(v)))
    return Graph.from_edges(n, edges)


def cycle(n):
    return Graph.from_edges(n, [(i, (i + 1) % n) for i in range(n)])


def path(n):
    return Graph.from_edges(n, [(i, i + 1) for i in range(n - 1)])


def complete(n):
    return Graph.from_edges(n, [(i, j) for i in range(n) for j in range(i + 1, n)])


def star(leaves):
    return Graph.from_edges(leaves + 1, [(0, i) for i in range(1, leaves + 1)])


def random_regular(n, d, rng, tries=1000):
    """Simple d-regular graph by rejection from the pairing model."""
    for _ in range(tries):
        stubs = rng.permutation(np.repeat(np.arange(n), d))
        pairs = stubs.reshape(-1, 2)
        if (pairs[:, 0] == pairs[:, 1]).any():
            continue
        key = np.sort(pairs, axis=1)
        if np.unique(key, axis=0).shape[0] < key.shape[0]:
            continue
        return Graph.from_edges(n, [tuple(p) for p in key])
    raise RuntimeError("could not draw a simple regular graph")


def erdos_renyi(n, c, rng):
    iu = np.triu_indices(n, 1)
    keep = rng.random(iu[0].size) < c / n
    return Graph.from_edges(n, list(zip(iu[0][keep], iu[1][keep])))


def small_corpus(size=200, seed=2024):
    """Deterministic mix of graphs with n <= 60 used by the identity checks."""
    rng = np.random.default_rng(seed)
    graphs = []
    for i in range(size):
        kind = i % 6
        n = int(rng.integers(2, 61))
        if kind == 0:
            g = erdos_renyi(n, rng.uniform(1.0, 4.0), rng)
        elif kind == 1:
            g = random_tree(n, rng)
        elif kind == 2:
            g = cycle(max(n, 3))
        elif kind == 3:
            m = n if n % 2 == 0 else n + 1
            g = random_regular(min(max(m, 8), 40), 3, rng)
        elif kind == 4:
            g = sbm_sample(SbmParams.planted(max(n, 16), 2, rng.uniform(3, 8), rng.uniform(0.2, 2)), int(rng.integers(1 << 30))).graph
        else:
            g = erdos_renyi(min(n, 25), rng.uniform(4.0, 10.0), rng)
        graphs.append(g)
    return graphs


def match_multisets(a, b):
    """Largest distance between two complex multisets under optimal matching."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    assert a.size == b.size, (a.size, b.size)
    if a.size == 0:
        return 0.0
    cost = np.abs(a[:, None] - b[None, :])
    r, c = linear_sum_assignment(cost)
    return float(cost[r, c].max())


@pytest.fixture(scope="session")
def corpus():
    return small_corpus()


# one line per acceptance criterion, printed after the test session
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
