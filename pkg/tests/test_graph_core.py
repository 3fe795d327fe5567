"""Graph representation, generators, and cut utilities."""

import itertools
import json
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cyclecut.errors import EmptySide, InputError, NotRegular, SizeTooSmall
from cyclecut.graph import (
    Graph,
    bipartition_of,
    cut_sparsity,
    gen_bipartite_union,
    gen_clique_union,
    gen_petersen,
    gen_random_regular,
    max_cut_bipartition,
    validate_regular,
)


def brute_max_cut_uncut(g: Graph, vertices) -> int:
    """Independent exhaustive oracle: minimum number of uncut edges."""
    vs = sorted(vertices)
    total = g.edges_within(vs)
    best = total
    for r in range(1, len(vs)):
        for xs in itertools.combinations(vs, r):
            cut = g.edges_between(set(xs), set(vs) - set(xs))
            best = min(best, total - cut)
    return best


class TestGraph:
    def test_rejects_self_loop(self):
        with pytest.raises(InputError):
            Graph(3, [(0, 0)])

    def test_rejects_out_of_range(self):
        with pytest.raises(InputError):
            Graph(2, [(0, 5)])

    def test_dedupes_edges(self):
        g = Graph(3, [(0, 1), (1, 0), (0, 1)])
        assert g.edge_count() == 1

    def test_json_round_trip(self, petersen):
        data = petersen.to_json_dict()
        assert data["edges"] == sorted(data["edges"])
        assert all(u < v for u, v in data["edges"])
        again = Graph.from_json_dict(json.loads(json.dumps(data)))
        assert again == petersen

    def test_dot_export(self, k4):
        dot = k4.to_dot()
        assert dot.startswith("graph G {")
        assert "0 -- 1;" in dot and dot.count("--") == 6


class TestValidateRegular:
    def test_k4(self, k4):
        info = validate_regular(k4)
        assert info.d == 3 and info.c == Fraction(3, 4)

    def test_petersen(self, petersen):
        info = validate_regular(petersen)
        assert info.d == 3 and info.c == Fraction(3, 10)

    def test_path_not_regular(self):
        g = Graph(3, [(0, 1), (1, 2)])
        with pytest.raises(NotRegular) as exc:
            validate_regular(g)
        u, du, v, dv = exc.value.witness
        assert {du, dv} == {1, 2}


class TestGenerators:
    def test_clique_union_two_k4(self):
        g = gen_clique_union([4, 4])
        assert g.n == 8 and validate_regular(g).d == 3
        assert len(g.components()) == 2

    def test_single_k6(self):
        g = gen_clique_union([6])
        assert g.n == 6 and g.edge_count() == 15

    def test_clique_union_edge_count(self):
        # 3 * C(4,2) = 18
        g = gen_clique_union([4, 4, 4])
        assert g.n == 12 and g.edge_count() == 18

    def test_clique_too_small(self):
        with pytest.raises(SizeTooSmall):
            gen_clique_union([4, 1])

    def test_biclique_k33(self):
        g = gen_bipartite_union(1, 3)
        assert g.n == 6 and validate_regular(g).d == 3
        assert g.edge_count() == 9

    def test_biclique_2x2(self):
        g = gen_bipartite_union(2, 2)
        assert g.n == 8 and g.edge_count() == 8
        assert validate_regular(g).d == 2

    def test_biclique_edge_count(self):
        # 3 * 4^2 = 48
        g = gen_bipartite_union(3, 4)
        assert g.n == 24 and g.edge_count() == 48

    def test_petersen_shape(self, petersen):
        assert petersen.n == 10 and petersen.edge_count() == 15
        assert bipartition_of(petersen) is None  # odd cycles

    def test_random_regular_basic(self):
        g = gen_random_regular(10, 3, seed=1)
        assert validate_regular(g).d == 3

    def test_random_regular_odd_product(self):
        with pytest.raises(InputError):
            gen_random_regular(9, 3, seed=0)

    def test_random_regular_edge_count(self):
        g = gen_random_regular(20, 10, seed=7)
        assert g.edge_count() == 100  # nd/2

    def test_random_regular_deterministic(self):
        a = gen_random_regular(16, 5, seed=42)
        b = gen_random_regular(16, 5, seed=42)
        assert a == b

    @given(st.integers(8, 24), st.integers(2, 7), st.integers(0, 10**6))
    @settings(max_examples=30, deadline=None)
    def test_random_regular_always_regular(self, n, d, seed):
        if n * d % 2 == 1:
            n += 1
        g = gen_random_regular(n, d, seed)
        assert validate_regular(g).d == d


class TestCutSparsity:
    def test_disconnected_blocks(self):
        g = gen_clique_union([4, 4])
        assert cut_sparsity(g, range(4), range(4, 8)) == 0

    def test_complete_bipartite_sides(self):
        g = gen_bipartite_union(1, 3)
        assert cut_sparsity(g, range(3), range(3, 6)) == 1

    def test_k4_split(self, k4):
        assert cut_sparsity(k4, [0], [1, 2, 3]) == 1

    def test_empty_side(self, k4):
        with pytest.raises(EmptySide):
            cut_sparsity(k4, [], [0, 1])

    def test_symmetric(self, petersen):
        xs, ys = set(range(5)), set(range(5, 10))
        assert cut_sparsity(petersen, xs, ys) == cut_sparsity(petersen, ys, xs)

    @given(st.integers(0, 2**20 - 1))
    @settings(max_examples=40, deadline=None)
    def test_symmetry_random_cuts(self, mask):
        g = gen_petersen()
        xs = {v for v in range(10) if mask >> v & 1}
        ys = set(range(10)) - xs
        if xs and ys:
            assert cut_sparsity(g, xs, ys) == cut_sparsity(g, ys, xs)


class TestMaxCut:
    def test_bipartite_uncut_zero(self):
        g = gen_bipartite_union(1, 3)
        xs, ys, uncut = max_cut_bipartition(g, range(6))
        assert uncut == 0
        assert {frozenset(xs), frozenset(ys)} == {frozenset(range(3)), frozenset(range(3, 6))}

    def test_k4_exhaustive(self, k4):
        _, _, uncut = max_cut_bipartition(k4, range(4))
        assert uncut == brute_max_cut_uncut(k4, range(4)) == 2

    def test_c5_exhaustive(self):
        g = Graph(5, [(i, (i + 1) % 5) for i in range(5)])
        _, _, uncut = max_cut_bipartition(g, range(5))
        assert uncut == brute_max_cut_uncut(g, range(5)) == 1

    def test_k8_exhaustive(self):
        g = gen_clique_union([8])
        _, _, uncut = max_cut_bipartition(g, range(8))
        assert uncut == brute_max_cut_uncut(g, range(8)) == 12

    def test_petersen_exact(self, petersen):
        # max cut of the Petersen graph is 12, so 3 uncut edges remain
        _, _, uncut = max_cut_bipartition(petersen, range(10))
        assert uncut == 3

    def test_local_search_move_stability(self):
        g = gen_random_regular(30, 9, seed=3)
        xs, ys, _ = max_cut_bipartition(g, range(30), exact_threshold=10)
        for v in range(30):
            own, other = (xs, ys) if v in xs else (ys, xs)
            same = sum(1 for w in g.neighbors(v) if w in own)
            cross = sum(1 for w in g.neighbors(v) if w in other)
            assert cross >= same or len(own) == 1

    def test_exact_matches_oracle_random(self):
        g = gen_random_regular(10, 5, seed=11)
        _, _, uncut = max_cut_bipartition(g, range(10))
        assert uncut == brute_max_cut_uncut(g, range(10))

    def test_subset_of_vertices(self):
        g = gen_clique_union([4, 4])
        xs, ys, uncut = max_cut_bipartition(g, range(4))
        assert uncut == 2 and xs | ys == set(range(4))


class TestBipartition:
    def test_biclique_sides(self):
        g = gen_bipartite_union(2, 2)
        sides = bipartition_of(g)
        assert sides is not None
        xs, ys = sides
        assert len(xs) == len(ys) == 4

    def test_odd_cycle_none(self):
        g = Graph(5, [(i, (i + 1) % 5) for i in range(5)])
        assert bipartition_of(g) is None
