import numpy as np
import pytest

from subgsp.embedding import (
    Embedding,
    SubsetTuple,
    build_cvd,
    check_generic,
    extend_by_zero,
    family_dimension,
    is_essential,
    is_refinement,
    isolated_in_subset,
    project,
    refine_default,
)
from subgsp.errors import DimensionMismatch, DisconnectedGraph, InvalidParams
from subgsp.graphs import generate, graph_from_edges, shift_matrix

from conftest import weighted_er


def test_project_basic():
    g = graph_from_edges(4, [(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0)])
    e = Embedding(g, (0, 2))
    assert list(project(e, np.array([1.0, 2.0, 3.0, 4.0]))) == [1.0, 3.0]


def test_project_identity_when_full():
    g = graph_from_edges(3, [(0, 1, 1.0), (1, 2, 1.0)])
    e = Embedding(g, (0, 1, 2))
    x = np.array([5.0, -1.0, 2.0])
    assert np.array_equal(project(e, x), x)


def test_project_extend_retraction():
    g = weighted_er(15, 0.3, seed=3)
    e = Embedding(g, tuple(range(0, 15, 2)))
    gen = np.random.default_rng(1)
    for _ in range(50):
        x = gen.standard_normal(e.size)
        assert np.array_equal(project(e, extend_by_zero(e, x)), x)


def test_extend_by_zero_values_and_isometry():
    g = graph_from_edges(4, [(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0)])
    e = Embedding(g, (0, 2))
    y = extend_by_zero(e, np.array([1.0, 3.0]))
    assert list(y) == [1.0, 0.0, 3.0, 0.0]
    gen = np.random.default_rng(2)
    x = gen.standard_normal(2)
    assert np.isclose(np.linalg.norm(extend_by_zero(e, x)), np.linalg.norm(x))
    assert np.array_equal(extend_by_zero(e, np.zeros(2)), np.zeros(4))


def test_dimension_mismatch_errors():
    g = graph_from_edges(3, [(0, 1, 1.0), (1, 2, 1.0)])
    e = Embedding(g, (0, 2))
    with pytest.raises(DimensionMismatch):
        project(e, np.zeros(5))
    with pytest.raises(DimensionMismatch):
        extend_by_zero(e, np.zeros(3))


def test_hop_class_definition():
    g = generate("cycle", {"n": 8, "directed": False})
    e = Embedding(g, (0, 1, 4))
    # 0 and 1 adjacent; 4 is 3 hops from 1 and 4 hops from 0
    assert e.hop_class == (1, 1, 3)


def test_build_cvd_far_pair_on_cycle():
    g = generate("cycle", {"n": 8, "directed": False})
    e = Embedding(g, (0, 4))
    for r in (0, 1):
        t = build_cvd(e, r=r)
        assert t.sets == (frozenset({0, 4}),)
        assert t.degrees == (4 + r,)


def test_build_cvd_adjacent_cluster():
    g = generate("lattice", {"rows": 3, "cols": 3})
    e = Embedding(g, (0, 1, 3, 4))  # a connected square block
    t = build_cvd(e, r=0)
    assert t.sets == (frozenset({0, 1, 3, 4}),)
    assert t.degrees == (1,)


def _fig10_style_subset():
    rows, cols = 5, 9

    def vid(r, c):
        return r * cols + c

    left = [vid(r, c) for r in range(5) for c in (0, 1)]
    centers = [vid(0, 2), vid(2, 2), vid(4, 2)]
    seeds = [vid(0, 4), vid(2, 4), vid(4, 4), vid(1, 5), vid(3, 5),
             vid(0, 6), vid(2, 6), vid(4, 6), vid(1, 7)]
    return sorted(left + centers + seeds)


def test_build_cvd_two_layer_lattice_sizes():
    # 22-vertex subset of the 5x9 lattice with a 13/12 layer split
    g = generate("lattice", {"rows": 5, "cols": 9})
    e = Embedding(g, tuple(_fig10_style_subset()))
    t = build_cvd(e, r=1)
    assert [len(s) for s in t.sets] == [13, 12]
    assert t.degrees == (2, 3)
    assert len(t.sets[0] & t.sets[1]) == 3


def test_build_cvd_requires_connected():
    g = graph_from_edges(4, [(0, 1, 1.0), (2, 3, 1.0)])
    e = Embedding(g, (0, 1, 2))
    with pytest.raises(DisconnectedGraph):
        build_cvd(e, r=0)


def test_isolated_subset_vertices_flagged():
    g = graph_from_edges(5, [(0, 1, 1.0), (2, 3, 1.0), (3, 4, 1.0)])
    e = Embedding(g, (0, 2, 3))
    assert isolated_in_subset(e) == (0,)


def test_refine_default_disjoint_dedup():
    t = SubsetTuple((frozenset({0, 1}), frozenset({2, 3})), (1, 2))
    r = refine_default(t)
    # U_1 = V_1 \ V_2 = V_1 and U_2 = V_2 duplicate existing entries
    assert r.sets == t.sets and r.degrees == t.degrees


def test_refine_default_nested():
    t = SubsetTuple((frozenset({0, 1, 2, 3}), frozenset({2, 3})), (1, 2))
    r = refine_default(t)
    assert frozenset({0, 1}) in r.sets
    assert r.sets[:2] == t.sets
    idx = r.sets.index(frozenset({0, 1}))
    assert r.degrees[idx] == 1


def test_refine_default_span_grows():
    g = weighted_er(14, 0.35, seed=6)
    e = Embedding(g, (0, 2, 3, 5, 8, 11, 13))
    t = build_cvd(e, r=1)
    r = refine_default(t)
    assert family_dimension(g, r) >= family_dimension(g, t)


def test_is_essential():
    assert is_essential(SubsetTuple((frozenset({0, 1}), frozenset({2})), (1, 1)))
    dup = SubsetTuple((frozenset({0, 1}), frozenset({0, 1})), (1, 1))
    assert not is_essential(dup)
    # middle set with no private vertex
    cfg = SubsetTuple((frozenset({0, 1, 2}), frozenset({2, 3}), frozenset({3, 4})), (1, 1, 1))
    assert not is_essential(cfg)
    cfg2 = SubsetTuple((frozenset({0, 1, 2}), frozenset({2, 3, 5}), frozenset({3, 4})), (1, 1, 1))
    assert is_essential(cfg2)


def test_is_refinement_partition():
    c = SubsetTuple((frozenset({0, 1, 2, 3}), frozenset({4, 5})), (1, 1))
    cp = SubsetTuple((frozenset({0, 1}), frozenset({2, 3}), frozenset({4, 5})), (1, 1, 1))
    assert is_refinement(cp, c)


def test_is_refinement_straddling_set_fails():
    # one refined set contained in neither coarse set
    c = SubsetTuple((frozenset({0, 1, 2, 3}), frozenset({6, 7, 8, 9})), (1, 1))
    cp = SubsetTuple((frozenset({0, 1, 2}), frozenset({3, 6}), frozenset({7, 8, 9})), (1, 1, 1))
    assert not is_refinement(cp, c)


def test_is_refinement_overlap_same_parent_fails():
    c = SubsetTuple((frozenset({0, 1, 2, 3, 4, 5}), frozenset({4, 5, 6, 7, 8, 9})), (1, 1))
    cp = SubsetTuple((frozenset({0, 1, 2}), frozenset({2, 3}), frozenset({4, 5}),
                      frozenset({6, 7, 8, 9})), (1, 1, 1, 1))
    assert not is_refinement(cp, c)


def test_family_dimension_singleton():
    g = weighted_er(12, 0.4, seed=7)
    ok, _, _ = check_generic(g)
    assert ok
    for d in (0, 2, 4):
        t = SubsetTuple((frozenset({3}),), (d,))
        assert family_dimension(g, t) == d + 1


def test_family_dimension_essential_formula():
    g = weighted_er(14, 0.35, seed=11)
    t = SubsetTuple((frozenset({0, 1, 2}), frozenset({2, 3, 4}), frozenset({6, 7})),
                    (2, 3, 1))
    assert is_essential(t)
    assert family_dimension(g, t) == 2 + 3 + 1 + 3


def test_family_dimension_full_shift_space():
    g = weighted_er(10, 0.5, seed=13)
    t = SubsetTuple((frozenset(range(10)),), (9,))
    assert family_dimension(g, t) == 10


def test_family_dimension_monotone():
    g = weighted_er(12, 0.4, seed=19)
    gen = np.random.default_rng(5)
    for _ in range(20):
        k = int(gen.integers(1, 4))
        sets = []
        for _ in range(k):
            size = int(gen.integers(1, 5))
            sets.append(frozenset(int(v) for v in gen.choice(12, size=size, replace=False)))
        degs = tuple(int(d) for d in gen.integers(0, 3, size=k))
        t = SubsetTuple(tuple(sets), degs)
        base = family_dimension(g, t)
        extra = SubsetTuple(tuple(sets) + (frozenset({int(gen.integers(12))}),),
                            degs + (1,))
        assert family_dimension(g, extra) >= base
        bumped = SubsetTuple(tuple(sets), (degs[0] + 1,) + degs[1:])
        assert family_dimension(g, bumped) >= base


def test_refinement_span_containment():
    # every masked power of the coarse tuple lies in the refined column span
    g = weighted_er(12, 0.4, seed=23)
    c = SubsetTuple((frozenset({0, 1, 2, 3}), frozenset({5, 6, 7})), (1, 2))
    cp = SubsetTuple((frozenset({0, 1}), frozenset({2, 3}), frozenset({5, 6, 7})),
                     (2, 2, 2))
    assert is_refinement(cp, c)
    m = shift_matrix(g)
    scale = np.linalg.norm(m, 2)
    b = 2 * m / scale - np.eye(g.n)

    def columns(t):
        cols = []
        for s, d in zip(t.sets, t.degrees):
            mask = np.array([1.0 if v in s else 0.0 for v in range(g.n)])
            power = np.eye(g.n)
            for j in range(d + 1):
                cols.append((mask[:, None] * power).ravel())
                power = b @ power
        return np.column_stack(cols)

    coarse = columns(c)
    refined = columns(cp)
    sol, *_ = np.linalg.lstsq(refined, coarse, rcond=None)
    assert np.abs(refined @ sol - coarse).max() < 1e-8


def test_degree_cap_applied():
    g = generate("cycle", {"n": 4, "directed": False})
    e = Embedding(g, (0, 2))
    t = build_cvd(e, r=10)  # 2 + 10 exceeds |V| - 1 = 3
    assert t.degrees == (3,)


def test_subset_tuple_validation():
    with pytest.raises(InvalidParams):
        SubsetTuple((frozenset(),), (1,))
    with pytest.raises(InvalidParams):
        SubsetTuple((frozenset({1}),), (1, 2))
