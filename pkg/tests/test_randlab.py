import numpy as np
import pytest

from subgsp.errors import TooLarge
from subgsp.graphs import generate, graph_from_edges
from subgsp.randlab import (
    ComponentStats,
    component_stats,
    exact_component_distribution,
    monte_carlo_stats,
    sample_edge_model,
    sample_vertex_model,
    tail_distribution,
)


def test_vertex_model_extremes(lattice55):
    subset, stats = sample_vertex_model(lattice55, 1.0, seed=1)
    assert len(subset) == 25
    assert stats.largest_size == 25 and stats.num_components == 1
    subset0, stats0 = sample_vertex_model(lattice55, 0.0, seed=1)
    assert subset0 == () and stats0 == ComponentStats(0, 0, ())


def test_edge_model_extremes(lattice55):
    sub, stats = sample_edge_model(lattice55, 1.0, seed=2)
    assert stats.largest_size == 25 and stats.num_components == 1
    sub0, stats0 = sample_edge_model(lattice55, 0.0, seed=2)
    assert stats0.largest_size == 1 and stats0.num_components == 25


def test_component_stats_sizes_sum(lattice55):
    for seed in range(5):
        subset, stats = sample_vertex_model(lattice55, 0.5, seed=seed)
        assert sum(stats.sizes) == len(subset)
        assert stats.largest_size == (max(stats.sizes) if stats.sizes else 0)


def test_lattice_example_instance_is_reachable(lattice55):
    # an instance with 13 vertices, largest component 6 and six components
    # occurs in the half-density vertex model
    found = False
    for seed in range(4000):
        subset, stats = sample_vertex_model(lattice55, 0.5, seed=seed)
        if len(subset) == 13 and stats.largest_size == 6 and stats.num_components == 6:
            found = True
            break
    assert found


def test_monte_carlo_degenerate(lattice55):
    mc = monte_carlo_stats(lattice55, "vertex", 1.0, trials=10, seed=3)
    assert mc.mean_largest == 25 and mc.mean_components == 1
    assert mc.largest_histogram == {25: 10}


def test_monte_carlo_binomial_mean(lattice55):
    trials = 2000
    q = 0.3
    mc = monte_carlo_stats(lattice55, "vertex", q, trials=trials, seed=4)
    se = np.sqrt(25 * q * (1 - q) / trials)
    assert abs(mc.mean_survivors - 25 * q) <= 3 * se


def test_monte_carlo_gm_component_count():
    g = generate("gm_community", {"n": 120, "communities": 3}, seed=42)
    mc = monte_carlo_stats(g, "vertex", 0.4, trials=300, seed=5)
    assert abs(mc.mean_components - 7.7) <= 1.5


def test_edge_survival_probability_squared():
    g = generate("gm_community", {"n": 60, "communities": 3}, seed=7)
    trials = 1500
    p = 0.5
    kept = []
    for t in range(trials):
        subset, _ = sample_vertex_model(g, p, seed=9000 + t)
        vs = set(subset)
        kept.append(sum(1 for u, v, _ in g.edges if u in vs and v in vs))
    frac = np.mean(kept) / g.num_edges
    se = np.sqrt(p * p * (1 - p * p) / (trials * g.num_edges))
    assert abs(frac - p * p) <= 3 * se * np.sqrt(g.num_edges)


def test_exact_single_edge():
    g = graph_from_edges(2, [(0, 1, 1.0)])
    dist = exact_component_distribution(g, "edge", 0.3)
    assert np.isclose(dist[2], 0.3)
    assert np.isclose(dist[1], 0.7)


def test_exact_distributions_sum_to_one():
    g3 = generate("lattice", {"rows": 3, "cols": 3})
    for model, q in (("vertex", 0.4), ("edge", 0.6)):
        dist = exact_component_distribution(g3, model, q)
        assert np.isclose(sum(dist.values()), 1.0)


def test_exact_size_guard():
    big = generate("lattice", {"rows": 5, "cols": 5})
    with pytest.raises(TooLarge):
        exact_component_distribution(big, "vertex", 0.5)
    with pytest.raises(TooLarge):
        exact_component_distribution(big, "edge", 0.5)


def test_theorem_style_comparison_on_grid():
    # both sides of the largest-component comparison are computable exactly
    g3 = generate("lattice", {"rows": 3, "cols": 3})
    edge = exact_component_distribution(g3, "edge", 0.6)
    vertex = exact_component_distribution(g3, "vertex", 0.6)
    tails_e, tails_v = tail_distribution(edge), tail_distribution(vertex)
    assert set(edge) <= set(range(0, 10))
    assert set(vertex) <= set(range(0, 10))
    # the edge model keeps all vertices, so its small-component mass at
    # size >= 1 is certain
    assert np.isclose(tails_e[min(tails_e)], 1.0)
    assert 0 <= tails_v[max(tails_v)] <= 1


def test_monte_carlo_matches_exact_on_grid():
    g3 = generate("lattice", {"rows": 3, "cols": 3})
    trials = 4000
    for model in ("vertex", "edge"):
        exact = exact_component_distribution(g3, model, 0.5)
        mc = monte_carlo_stats(g3, model, 0.5, trials=trials, seed=11)
        for k in set(exact) | set(mc.largest_histogram):
            p = exact.get(k, 0.0)
            emp = mc.largest_histogram.get(k, 0) / trials
            se = np.sqrt(max(p * (1 - p), 1e-12) / trials)
            assert abs(emp - p) <= 3 * se + 1e-12
