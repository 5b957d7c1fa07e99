import numpy as np
import pytest

from subgsp.embedding import Embedding
from subgsp.experiments import (
    FIT,
    INDUCED,
    KRON,
    FitSpec,
    operator_suite,
    ring_with_shortcuts,
    run_compression,
    sample_subset,
    spectrum_report,
    standard_fit,
    summarize,
)
from subgsp.graphs import induced_subgraph, is_connected, random_connected, shift_matrix
from subgsp import rng as srng


def _gm():
    return random_connected("gm_community",
                            {"n": 40, "communities": 2, "p_in": 0.3, "p_out": 0.05},
                            seed=3)


def test_sample_subset_respects_bounds():
    g = _gm()
    gen = srng.stream(1, 0)
    for _ in range(10):
        v0 = sample_subset(g, 0.3, gen)
        assert 2 <= len(v0) < g.n
        assert list(v0) == sorted(v0)


def test_standard_fit_returns_feasible_operator():
    g = _gm()
    gen = srng.stream(2, 0)
    v0 = sample_subset(g, 0.4, gen)
    emb, omega, fit = standard_fit(g, v0)
    m = fit.operator.matrix
    assert np.abs(m - m.T).max() < 1e-10
    assert np.abs(m.sum(axis=1)).max() < 1e-8
    assert fit.filter.coeffs[0] == (0.0, 1.0)
    assert len(omega) >= 1


def test_operator_suite_baselines():
    g = _gm()
    gen = srng.stream(3, 0)
    v0 = sample_subset(g, 0.4, gen)
    emb, _, fit = standard_fit(g, v0)
    suite = operator_suite(g, emb, fit.operator)
    assert set(suite) == {FIT, INDUCED, KRON}
    h0, _ = induced_subgraph(g, emb.v0)
    adj = h0.adjacency()
    assert np.abs(suite[INDUCED].matrix -
                  (np.diag(adj.sum(axis=1)) - adj)).max() < 1e-12
    assert np.abs(suite[KRON].matrix.sum(axis=1)).max() < 1e-9


def test_summarize_groups_records():
    records = [
        {"trial": 0, "operator": "fit", "param": 0.4, "value": 1.0},
        {"trial": 1, "operator": "fit", "param": 0.4, "value": 3.0},
        {"trial": 0, "operator": "kron", "param": 0.4, "value": 5.0},
    ]
    rows = summarize(records)
    fit_row = next(r for r in rows if r["operator"] == "fit")
    assert fit_row["mean"] == 2.0 and fit_row["trials"] == 2
    assert fit_row["stderr"] == pytest.approx(np.std([1, 3], ddof=1) / np.sqrt(2))


def test_spectrum_report_fields():
    g = _gm()
    gen = srng.stream(4, 0)
    v0 = sample_subset(g, 0.4, gen)
    rep = spectrum_report(g, v0)
    assert len(rep["operator_eigenvalues"]) == len(v0)
    assert len(rep["main_spectral_set"]) == g.n
    assert 0 < rep["main_component_share"] <= 1.0
    assert rep["subset_components"] >= 1


def test_spectrum_report_layered_fit_grouping():
    g = random_connected("gm_community",
                         {"n": 120, "communities": 3}, seed=42)
    gen = srng.stream(5, 0)
    v0 = sample_subset(g, 0.4, gen)
    spec = FitSpec(single_set=False, r=2, refine=True,
                   fixed_coeffs=((0, 1, 1.0),))
    rep = spectrum_report(g, v0, spec)
    # the dominant spectral-action group is a sizable chunk of the subset
    # (plumbing check; the share itself depends on the layer overlaps)
    assert 0.25 <= rep["main_component_share"] <= 1.0
    assert len(rep["main_component"]) >= 2


def test_ring_with_shortcuts_connected_small_world():
    g = ring_with_shortcuts(100, 3, 15, seed=2)
    assert is_connected(g)
    assert g.num_edges == 100 * 3 + 15


def test_compression_records_shape():
    g = _gm()
    recs = run_compression(g, subset_p=0.4, thetas=[0.4, 0.8], bandwidth=5,
                           n_signals=3, trials=2, seed=9)
    assert len(recs) == 2 * 3 * 2  # trials x operators x thetas
    assert {r["operator"] for r in recs} == {FIT, INDUCED, KRON}
    recs_offset = run_compression(g, subset_p=0.4, thetas=[0.4, 0.8], bandwidth=5,
                                  n_signals=3, trials=1, seed=9, first_trial=1)
    match = [r for r in recs if r["trial"] == 1]
    for a, b in zip(sorted(match, key=str), sorted(recs_offset, key=str)):
        assert a == b
