"""Cluster decomposition: sparse cuts, refinement, classification."""

from fractions import Fraction

import pytest

from cyclecut.decomposer import (
    FAR_BIPARTITE,
    NEAR_BIPARTITE,
    classify_cluster,
    decompose,
    default_ladder,
    find_sparse_cut,
    refine_split,
)
from cyclecut.errors import (
    ClassificationAmbiguous,
    DecompositionFailed,
    InputError,
    RefinementFailed,
)
from cyclecut.graph import (
    Graph,
    gen_bipartite_union,
    gen_clique_union,
    gen_petersen,
    gen_random_regular,
    validate_regular,
)


def two_blocks_one_edge(block: int) -> Graph:
    """Two K_block cliques joined by the single edge (0, block)."""
    g0 = gen_clique_union([block, block])
    edges = list(g0.edges()) + [(0, block)]
    return Graph(2 * block, edges)


class TestFindSparseCut:
    def test_disconnected_components(self):
        g = gen_clique_union([4, 4])
        cut = find_sparse_cut(g, range(8), Fraction(1, 10))
        assert cut is not None and cut.sparsity == 0
        assert {frozenset(cut.x), frozenset(cut.y)} == \
            {frozenset(range(4)), frozenset(range(4, 8))}

    def test_k6_has_none(self):
        g = gen_clique_union([6])
        assert find_sparse_cut(g, range(6), Fraction(1, 2)) is None

    def test_two_k10_one_edge(self):
        g = two_blocks_one_edge(10)
        cut = find_sparse_cut(g, range(20), Fraction(1, 20))
        assert cut is not None
        assert cut.sparsity == Fraction(1, 100)
        assert {frozenset(cut.x), frozenset(cut.y)} == \
            {frozenset(range(10)), frozenset(range(10, 20))}

    def test_petersen_outer_inner(self):
        g = gen_petersen()
        cut = find_sparse_cut(g, range(10), Fraction(1, 5))
        assert cut is not None and cut.sparsity == Fraction(1, 5)

    def test_threshold_is_exact(self):
        g = gen_petersen()
        # the best cut has sparsity exactly 1/5; anything lower finds nothing
        assert find_sparse_cut(g, range(10), Fraction(1, 5) - Fraction(1, 1000)) is None

    def test_spectral_path_on_large_instance(self):
        g = two_blocks_one_edge(12)  # 24 vertices: beyond the exhaustive cap
        cut = find_sparse_cut(g, range(24), Fraction(1, 20))
        assert cut is not None and cut.sparsity == Fraction(1, 144)


class TestRefineSplit:
    def test_disjoint_cliques_unchanged(self):
        g = gen_clique_union([5, 5])
        a1, a2 = refine_split(g, range(5), range(5, 10),
                              eta_i=Fraction(1, 100), mindeg_target=Fraction(1, 10))
        assert a1 == frozenset(range(5)) and a2 == frozenset(range(5, 10))

    def test_misplaced_vertex_moves(self):
        # two K_10 blocks plus vertex 20 adjacent to 8 of block 1, 1 of block 2
        g0 = gen_clique_union([10, 10])
        edges = list(g0.edges()) + [(20, i) for i in range(8)] + [(20, 10)]
        g = Graph(21, edges)
        a1, a2 = refine_split(g, range(10), list(range(10, 20)) + [20],
                              eta_i=Fraction(1, 100), mindeg_target=Fraction(1, 10))
        assert 20 in a1

    def test_k6_forced_failure(self):
        g = gen_clique_union([6])
        with pytest.raises(RefinementFailed):
            # target of 3 same-side neighbours is impossible under any split
            refine_split(g, range(3), range(3, 6),
                         eta_i=Fraction(1, 1000), mindeg_target=Fraction(1, 2))

    def test_rejects_overlapping_sides(self):
        g = gen_clique_union([4])
        with pytest.raises(InputError):
            refine_split(g, [0, 1], [1, 2, 3], Fraction(1, 100), Fraction(1, 10))


class TestClassify:
    def test_k44_near(self):
        g = gen_bipartite_union(1, 4)
        c = classify_cluster(g, range(8), beta=Fraction(1, 50), gamma=Fraction(1, 10))
        assert c.kind == NEAR_BIPARTITE and c.uncut == 0

    def test_k8_far(self):
        g = gen_clique_union([8])
        c = classify_cluster(g, range(8), beta=Fraction(1, 50), gamma=Fraction(1, 10))
        assert c.kind == FAR_BIPARTITE and c.uncut == 12

    def test_gap_raises(self):
        # C_5 plus a chord: uncut 1 of 6 edges on 5 vertices; n^2 = 25
        g = Graph(5, [(i, (i + 1) % 5) for i in range(5)] + [(0, 2)])
        with pytest.raises(ClassificationAmbiguous):
            classify_cluster(g, range(5), beta=Fraction(1, 50), gamma=Fraction(1, 10))
        # under a wider pair it lands near-bipartite (uncut 2 <= 25*0.1)
        c = classify_cluster(g, range(5), beta=Fraction(1, 10), gamma=Fraction(1, 5))
        assert c.kind == NEAR_BIPARTITE


class TestDecompose:
    def test_three_k8(self):
        g = gen_clique_union([8, 8, 8])
        info = validate_regular(g)
        dec = decompose(g, info, default_ladder(info))
        assert len(dec.clusters) == 3
        assert all(c.kind == FAR_BIPARTITE for c in dec.clusters)
        assert sorted(len(c.vertices) for c in dec.clusters) == [8, 8, 8]

    def test_k55_single_near(self):
        g = gen_bipartite_union(1, 5)
        info = validate_regular(g)
        dec = decompose(g, info, default_ladder(info))
        assert len(dec.clusters) == 1
        c = dec.clusters[0]
        assert c.kind == NEAR_BIPARTITE and c.uncut == 0

    def test_two_k44_matching_snapshot(self):
        # two K_{4,4}s joined by a perfect matching: 5-regular on 16 vertices;
        # the 8|8 block cut has sparsity 8/64 = 1/8 < zeta, so it splits
        edges = []
        for i in range(4):
            for j in range(4):
                edges.append((i, 4 + j))
                edges.append((8 + i, 12 + j))
        edges += [(v, v + 8) for v in range(8)]
        g = Graph(16, edges)
        info = validate_regular(g)
        assert info.d == 5
        dec = decompose(g, info, default_ladder(info))
        assert len(dec.clusters) == 2
        assert {frozenset(c.vertices) for c in dec.clusters} == \
            {frozenset(range(8)), frozenset(range(8, 16))}
        assert all(c.kind == NEAR_BIPARTITE for c in dec.clusters)

    def test_petersen_splits_into_two_near(self):
        g = gen_petersen()
        info = validate_regular(g)
        dec = decompose(g, info, default_ladder(info))
        assert len(dec.clusters) == 2
        assert all(c.kind == NEAR_BIPARTITE for c in dec.clusters)

    def test_invariants_on_families(self):
        for g in (gen_clique_union([6, 6]), gen_petersen(), gen_bipartite_union(2, 4),
                  gen_random_regular(24, 12, seed=5)):
            info = validate_regular(g)
            ladder = default_ladder(info)
            dec = decompose(g, info, ladder)
            # exact partition of V(G)
            allv = [v for c in dec.clusters for v in c.vertices]
            assert sorted(allv) == list(range(g.n))
            # re-certification: no zeta-sparse cut in any cluster
            for c in dec.clusters:
                if len(c.vertices) >= 2:
                    assert find_sparse_cut(g, c.vertices, ladder.zeta) is None
            # cross-cluster edges within the effective eta bound
            assert dec.cross_edge_count(g) <= dec.eta_effective * g.n * g.n
            # internal min degree >= delta * n
            for c in dec.clusters:
                for v in c.vertices:
                    inside = sum(1 for w in g.neighbors(v) if w in c.vertices)
                    assert Fraction(inside) >= ladder.delta * g.n
            # near-bipartite sides are move-stable
            for c in dec.clusters:
                if c.kind != NEAR_BIPARTITE:
                    continue
                for v in c.vertices:
                    own = c.x_side if v in c.x_side else c.y_side
                    other = c.y_side if v in c.x_side else c.x_side
                    same = sum(1 for w in g.neighbors(v) if w in own)
                    cross = sum(1 for w in g.neighbors(v) if w in other)
                    assert cross >= same

    def test_deterministic(self):
        g = gen_random_regular(24, 12, seed=9)
        info = validate_regular(g)
        d1 = decompose(g, info, default_ladder(info))
        d2 = decompose(g, info, default_ladder(info))
        assert d1 == d2

    def test_r_max_exhaustion(self):
        # a long cycle keeps splitting; a tiny r_max must fail loudly
        g = Graph(12, [(i, (i + 1) % 12) for i in range(12)])
        info = validate_regular(g)
        ladder = default_ladder(info, r_max=2)
        with pytest.raises(DecompositionFailed):
            decompose(g, info, ladder)

    def test_forced_bipartition_sides(self):
        g = gen_bipartite_union(2, 3)
        info = validate_regular(g)
        from cyclecut.graph import bipartition_of

        dec = decompose(g, info, default_ladder(info), bipartition=bipartition_of(g))
        assert all(c.kind == NEAR_BIPARTITE for c in dec.clusters)
        for c in dec.clusters:
            assert len(c.x_side) == len(c.y_side) == 3

    def test_json_round_trip(self):
        g = gen_petersen()
        info = validate_regular(g)
        dec = decompose(g, info, default_ladder(info))
        from cyclecut.decomposer import Decomposition

        again = Decomposition.from_json_dict(dec.to_json_dict())
        assert again == dec
