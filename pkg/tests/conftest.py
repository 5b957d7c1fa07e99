import numpy as np
import pytest

from subgsp.graphs import generate, graph_from_edges, is_connected


def weighted_er(n, q, seed, lo=0.5, hi=1.5):
    """Connected ER graph with generic (i.i.d. uniform) edge weights."""
    for s in range(60):
        base = generate("er", {"n": n, "q": q}, seed=seed + s)
        if not is_connected(base):
            continue
        gen = np.random.default_rng(seed + 1000 + s)
        edges = [(u, v, gen.uniform(lo, hi)) for u, v, _ in base.edges]
        return graph_from_edges(n, edges)
    raise RuntimeError("no connected draw found")


@pytest.fixture
def path3():
    return graph_from_edges(3, [(0, 1, 1.0), (1, 2, 1.0)])


@pytest.fixture
def cycle8():
    return generate("cycle", {"n": 8, "directed": False})


@pytest.fixture
def dcycle8():
    return generate("cycle", {"n": 8, "directed": True})


@pytest.fixture
def lattice55():
    return generate("lattice", {"rows": 5, "cols": 5})
