"""Empirical comparison of vertex-sampling and edge-sampling random models.

The vertex model induces a subgraph on an i.i.d. vertex sample; the edge
model keeps each edge i.i.d. on the full vertex set (dropped-to-isolated
vertices count as singleton components).  Besides Monte Carlo summaries,
tiny instances get exact largest-component distributions by exhaustive
enumeration.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from . import rng
from .errors import InvalidParams, TooLarge
from .graphs import Graph, connected_components, graph_from_edges, induced_subgraph

VERTEX_MODEL = "vertex"
EDGE_MODEL = "edge"


@dataclass(frozen=True)
class ComponentStats:
    largest_size: int
    num_components: int
    sizes: tuple

    def __post_init__(self):
        if self.sizes and max(self.sizes) != self.largest_size:
            raise InvalidParams("largest_size must equal max(sizes)")


def component_stats(g: Graph) -> ComponentStats:
    comps = connected_components(g)
    sizes = tuple(sorted(len(c) for c in comps))
    return ComponentStats(largest_size=max(sizes) if sizes else 0,
                          num_components=len(sizes), sizes=sizes)


def sample_vertex_model(g: Graph, q: float, seed: int) -> tuple:
    """Induced subgraph on an i.i.d. q-sample of vertices, with stats."""
    if not 0 <= q <= 1:
        raise InvalidParams("q must lie in [0,1]")
    gen = rng.stream(seed, 0)
    subset = [v for v in range(g.n) if gen.random() < q]
    sub, _ = induced_subgraph(g, subset)
    return tuple(subset), component_stats(sub)


def sample_edge_model(g: Graph, q: float, seed: int) -> tuple:
    """Spanning subgraph keeping each edge i.i.d. with probability q."""
    if not 0 <= q <= 1:
        raise InvalidParams("q must lie in [0,1]")
    gen = rng.stream(seed, 0)
    kept = [edge for edge in g.edges if gen.random() < q]
    sub = graph_from_edges(g.n, kept, directed=g.directed, shift_kind=g.shift_kind)
    return sub, component_stats(sub)


@dataclass(frozen=True)
class MonteCarloSummary:
    trials: int
    mean_largest: float
    mean_components: float
    mean_survivors: float
    largest_histogram: dict  # size -> frequency


def monte_carlo_stats(g: Graph, model: str, q: float, trials: int,
                      seed: int) -> MonteCarloSummary:
    """Aggregate component statistics over independent trials."""
    if trials < 1:
        raise InvalidParams("at least one trial required")
    largest, comps, survivors = [], [], []
    hist = {}
    for trial in range(trials):
        gen = rng.stream(seed, trial)
        if model == VERTEX_MODEL:
            subset = [v for v in range(g.n) if gen.random() < q]
            sub, _ = induced_subgraph(g, subset)
            stats = component_stats(sub)
            survivors.append(len(subset))
        elif model == EDGE_MODEL:
            kept = [edge for edge in g.edges if gen.random() < q]
            sub = graph_from_edges(g.n, kept, directed=g.directed,
                                   shift_kind=g.shift_kind)
            stats = component_stats(sub)
            survivors.append(g.n)
        else:
            raise InvalidParams(f"unknown model {model!r}")
        largest.append(stats.largest_size)
        comps.append(stats.num_components)
        hist[stats.largest_size] = hist.get(stats.largest_size, 0) + 1
    return MonteCarloSummary(trials=trials,
                             mean_largest=float(np.mean(largest)),
                             mean_components=float(np.mean(comps)),
                             mean_survivors=float(np.mean(survivors)),
                             largest_histogram=dict(sorted(hist.items())))


def _largest_component_of_pattern(g: Graph, vertices, edges) -> int:
    """Largest component size over the given vertices and edges."""
    parent = {v: v for v in vertices}

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for u, v in edges:
        ra, rb = find(u), find(v)
        if ra != rb:
            parent[ra] = rb
    sizes = {}
    for v in vertices:
        r = find(v)
        sizes[r] = sizes.get(r, 0) + 1
    return max(sizes.values()) if sizes else 0


def exact_component_distribution(g: Graph, model: str, q: float,
                                 k: int | None = None):
    """Exact law of the largest component size by exhaustive enumeration.

    Returns the full distribution as a dict ``size -> probability`` when
    ``k`` is None, else the single probability for size ``k``.  Vertex
    patterns are enumerated for the vertex model (|V| <= 22), edge
    patterns for the edge model (|E| <= 22).
    """
    if not 0 <= q <= 1:
        raise InvalidParams("q must lie in [0,1]")
    dist = {}
    if model == VERTEX_MODEL:
        if g.n > 22:
            raise TooLarge("vertex-model enumeration limited to 22 vertices")
        items = list(range(g.n))
        edge_list = [(u, v) for u, v, _ in g.edges]
        for r in range(len(items) + 1):
            for chosen in combinations(items, r):
                prob = q ** r * (1 - q) ** (g.n - r)
                vs = set(chosen)
                edges = [(u, v) for u, v in edge_list if u in vs and v in vs]
                c = _largest_component_of_pattern(g, chosen, edges)
                dist[c] = dist.get(c, 0.0) + prob
    elif model == EDGE_MODEL:
        m = g.num_edges
        if m > 22:
            raise TooLarge("edge-model enumeration limited to 22 edges")
        edge_list = [(u, v) for u, v, _ in g.edges]
        vertices = tuple(range(g.n))
        for r in range(m + 1):
            for chosen in combinations(range(m), r):
                prob = q ** r * (1 - q) ** (m - r)
                edges = [edge_list[i] for i in chosen]
                c = _largest_component_of_pattern(g, vertices, edges)
                dist[c] = dist.get(c, 0.0) + prob
    else:
        raise InvalidParams(f"unknown model {model!r}")
    dist = dict(sorted(dist.items()))
    if k is None:
        return dist
    return dist.get(int(k), 0.0)


def tail_distribution(dist: dict) -> dict:
    """P(largest component >= k) for each k appearing in the exact law."""
    out = {}
    for k in dist:
        out[k] = sum(p for kk, p in dist.items() if kk >= k)
    return out
