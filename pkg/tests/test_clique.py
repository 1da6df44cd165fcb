import itertools

import networkx as nx
import numpy as np
import pytest

from kingcode import _clique_py, clique

try:
    from kingcode import _clique as _compiled
except ImportError:  # extension not built
    _compiled = None

BACKENDS = [pytest.param(_clique_py, id="python")]
BACKENDS.append(
    pytest.param(_compiled, id="compiled", marks=pytest.mark.skipif(_compiled is None, reason="extension not built"))
)


def random_graph(rng, n, p):
    a = np.triu(rng.random((n, n)) < p, 1)
    return a | a.T


def is_clique(adj, nodes):
    return all(adj[u, v] for u, v in itertools.combinations(nodes, 2))


@pytest.mark.parametrize("impl", BACKENDS)
def test_max_clique_matches_networkx(impl):
    rng = np.random.default_rng(7)
    for _ in range(150):
        n = int(rng.integers(1, 28))
        adj = random_graph(rng, n, rng.uniform(0.1, 0.95))
        got = impl.max_clique(adj)
        best = max(len(c) for c in nx.find_cliques(nx.from_numpy_array(adj.astype(int))))
        assert len(got) == best and is_clique(adj, got)
        assert got == sorted(got)


@pytest.mark.parametrize("impl", BACKENDS)
def test_edge_cases(impl):
    assert impl.max_clique(np.zeros((0, 0), dtype=bool)) == []
    assert impl.max_clique(np.zeros((3, 3), dtype=bool)) == [0]
    full = ~np.eye(5, dtype=bool)
    assert impl.max_clique(full) == [0, 1, 2, 3, 4]
    # a self-loop on the diagonal must not count as an edge
    assert impl.max_clique(np.eye(3, dtype=bool)) == [0]


@pytest.mark.parametrize("impl", BACKENDS)
def test_greedy_clique_order(impl):
    adj = np.zeros((4, 4), dtype=bool)
    for u, v in [(0, 2), (0, 3), (2, 3), (1, 3)]:
        adj[u, v] = adj[v, u] = True
    assert impl.greedy_clique(adj) == [0, 2, 3]
    assert impl.greedy_clique(adj, [1, 3, 0, 2]) == [1, 3]


def test_backends_agree():
    if _compiled is None:
        pytest.skip("extension not built")
    rng = np.random.default_rng(11)
    for _ in range(50):
        adj = random_graph(rng, int(rng.integers(1, 40)), 0.6)
        assert _compiled.max_clique(adj) == _clique_py.max_clique(adj)
        assert _compiled.greedy_clique(adj) == _clique_py.greedy_clique(adj)


def test_dispatch_reports_backend():
    assert clique.BACKEND in ("compiled", "python")
    assert clique.BACKEND == ("compiled" if clique.max_clique is getattr(_compiled, "max_clique", None) else "python")
