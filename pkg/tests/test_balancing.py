"""Lift graph, ordered filter, flow network, rounding and pruning."""

import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cyclecut.balancing import (
    BalancingMatching,
    FractionalMatching,
    balance_clumps,
    build_filtered,
    build_lift,
    build_network,
    clump_imbalance,
    construct_side_matching,
    cross_clump_edge_count,
    matching_balances,
    max_flow,
    prune_matching,
    round_matching,
    total_clump_imbalance,
)
from cyclecut.decomposer import decompose, default_ladder
from cyclecut.errors import NotAlmostBalancing
from cyclecut.forest import pull_back
from cyclecut.graph import (
    Graph,
    gen_bipartite_union,
    gen_clique_union,
    gen_petersen,
    gen_random_regular,
    validate_regular,
)

from instances import one_far_cluster, two_block_imbalanced


def decomposition_of(g):
    info = validate_regular(g)
    return info, decompose(g, info, default_ladder(info))


class TestBuildLift:
    def test_k4_crown(self, k4):
        dec = one_far_cluster(k4)
        lift = build_lift(k4, dec)
        assert lift.s == 1
        # lift of K_4 is K_{4,4} minus a perfect matching: 3-regular on 8 vertices
        assert all(lift.degree(v) == 3 for v in range(4))
        for v in range(4):
            assert v not in k4.neighbors(v)

    def test_k33_two_clumps(self):
        g = gen_bipartite_union(1, 3)
        _, dec = decomposition_of(g)
        lift = build_lift(g, dec)
        assert lift.s == 2
        assert cross_clump_edge_count(lift) == 0

    def test_two_far_clusters_no_cross(self):
        g = gen_clique_union([4, 4])
        _, dec = decomposition_of(g)
        lift = build_lift(g, dec)
        assert lift.s == len(dec.clusters)
        assert cross_clump_edge_count(lift) == 0


class TestClumpImbalance:
    def test_far_always_zero(self, k4):
        lift = build_lift(k4, one_far_cluster(k4))
        assert clump_imbalance(lift, 0) == 0

    def test_near_three_five(self):
        g, dec = two_block_imbalanced(3, 2)
        lift = build_lift(g, dec)
        assert clump_imbalance(lift, 0) == 2 and clump_imbalance(lift, 1) == 2

    def test_balanced_biclique_total_zero(self):
        g = gen_bipartite_union(2, 3)
        _, dec = decomposition_of(g)
        lift = build_lift(g, dec)
        assert total_clump_imbalance(lift) == 0


class TestOrderedFilter:
    def test_identity_orientation(self):
        g, dec = two_block_imbalanced(3, 1)
        lift = build_lift(g, dec)
        filt = build_filtered(lift, list(range(g.n)))
        for u, v in filt.edges:
            assert u < v
            assert lift.bottom_clump[u] != lift.top_clump[v]

    def test_single_clump_empty(self, k4):
        lift = build_lift(k4, one_far_cluster(k4))
        filt = build_filtered(lift, list(range(4)))
        assert filt.edges == ()

    def test_two_blocks_one_bridge(self):
        # two K_4 clusters joined by edge (3,4): exactly one filtered edge
        g0 = gen_clique_union([4, 4])
        g = Graph(8, list(g0.edges()) + [(3, 4)])
        from cyclecut.decomposer import Cluster, Decomposition, FAR_BIPARTITE, ParameterLadder

        ladder = ParameterLadder()
        dec = Decomposition(
            clusters=(Cluster(vertices=frozenset(range(4)), kind=FAR_BIPARTITE),
                      Cluster(vertices=frozenset(range(4, 8)), kind=FAR_BIPARTITE)),
            ladder=ladder, eta_effective=ladder.eta,
            beta_effective=ladder.beta, gamma_effective=ladder.gamma)
        lift = build_lift(g, dec)
        filt = build_filtered(lift, list(range(8)))
        assert filt.edges == ((3, 4),)

    def test_each_base_edge_at_most_once(self):
        g = gen_petersen()
        _, dec = decomposition_of(g)
        lift = build_lift(g, dec)
        rng = random.Random(3)
        order = list(range(10))
        rng.shuffle(order)
        sigma = [0] * 10
        for r, v in enumerate(order):
            sigma[v] = r
        filt = build_filtered(lift, sigma)
        base = {tuple(sorted(e)) for e in filt.edges}
        assert len(base) == len(filt.edges)


class TestFlowNetwork:
    def test_no_cross_edges_zero_flow(self):
        g = gen_clique_union([4, 4])
        info, dec = decomposition_of(g)
        lift = build_lift(g, dec)
        filt = build_filtered(lift, list(range(8)))
        net = build_network(filt, lift, info)
        fm, value = max_flow(net)
        assert value == 0 and not fm.weights
        assert all(net.a[i][j] == 0 for i in range(lift.s) for j in range(lift.s))

    def test_capacity_normalization(self):
        # a_{ij} = e(B_i, T_j) / d with zero diagonal
        g, dec = two_block_imbalanced(3, 2)
        info = validate_regular(g)
        lift = build_lift(g, dec)
        net = build_network(build_filtered(lift, list(range(g.n))), lift, info)
        s = lift.s
        assert all(net.a[i][i] == 0 for i in range(s))
        cn = info.d
        total_cross = sum(
            sum(1 for u in lift.clumps[i].bottom for w in g.neighbors(u)
                if lift.top_clump[w] == j)
            for i in range(s) for j in range(s) if i != j)
        assert net.total_capacity == Fraction(total_cross, cn)

    def test_flow_bounded_by_capacity(self):
        g, dec = two_block_imbalanced(4, 1)
        info = validate_regular(g)
        lift = build_lift(g, dec)
        rng = random.Random(0)
        for _ in range(5):
            order = list(range(g.n))
            rng.shuffle(order)
            sigma = [0] * g.n
            for r, v in enumerate(order):
                sigma[v] = r
            net = build_network(build_filtered(lift, sigma), lift, info)
            fm, value = max_flow(net)
            assert 0 <= value <= net.total_capacity
            # the restriction to filter edges is a valid fractional matching
            b_w, t_w = fm.vertex_weights()
            assert all(0 <= w <= 1 for w in b_w.values())
            assert all(0 <= w <= 1 for w in t_w.values())

    def test_unit_path(self):
        # single cross edge with capacities >= 1 pushes exactly its weight
        g, dec = two_block_imbalanced(2, 1)
        info = validate_regular(g)
        lift = build_lift(g, dec)
        net = build_network(build_filtered(lift, list(range(g.n))), lift, info)
        fm, value = max_flow(net)
        assert value > 0


class TestRounding:
    def test_integral_input_unchanged(self):
        # a fully balancing integral matching on a t=1 instance: one edge per
        # join direction; nothing is open so rounding is the identity
        g, dec = two_block_imbalanced(3, 1)
        lift = build_lift(g, dec)
        assert construct_side_matching(g, dec) is None  # blocks have no same-side edges
        x1 = sorted(dec.clusters[0].x_side)
        y2 = sorted(dec.clusters[1].y_side)
        y2_of = {u: next(v for v in g.neighbors(u) if v in y2) for u in x1[:2]}
        e1 = (x1[0], y2_of[x1[0]])          # bottom in X1, top in Y2
        e2 = (y2_of[x1[1]], x1[1])          # bottom in Y2, top in X1
        fm = FractionalMatching(weights={e1: Fraction(1), e2: Fraction(1)})
        assert fm.total_disb(lift) == 0
        out = round_matching(fm, lift)
        assert out.weights == fm.weights

    def test_half_weight_pair_rounds(self):
        # hand-traceable instance: two parallel half-weight edges between the
        # same clump pair; the fake paths close a 4-cycle, the shift sends one
        # edge to 1 and the other to 0, and every clump imbalance is preserved
        from cyclecut.balancing import Clump, LiftGraph

        g = Graph(6, [(0, 3), (1, 2)])
        lift = LiftGraph(
            base=g,
            clumps=(Clump(bottom=frozenset({0, 1, 4}), top=frozenset({0, 1})),
                    Clump(bottom=frozenset({2, 3}), top=frozenset({2, 3, 5})),
                    Clump(bottom=frozenset({5}), top=frozenset({4}))),
            bottom_clump=(0, 0, 1, 1, 0, 2),
            top_clump=(0, 0, 1, 1, 2, 1),
        )
        fm = FractionalMatching(weights={(0, 3): Fraction(1, 2), (1, 2): Fraction(1, 2)})
        before = [fm.disb(lift, i) for i in range(lift.s)]
        assert fm.total_disb(lift) == 0
        out = round_matching(fm, lift)
        assert out.is_integral()
        assert sorted(out.weights.values()) == [1]
        assert [out.disb(lift, i) for i in range(lift.s)] == before

    def test_precondition_enforced(self):
        g, dec = two_block_imbalanced(3, 2)
        lift = build_lift(g, dec)
        fm = FractionalMatching(weights={})
        # total imbalance is 8 with nothing matched: not almost-balancing
        with pytest.raises(NotAlmostBalancing):
            round_matching(fm, lift)

    def test_zero_total_disb_on_flow_outputs(self):
        g, dec = two_block_imbalanced(3, 1)
        info = validate_regular(g)
        lift = build_lift(g, dec)
        rng = random.Random(7)
        rounded = 0
        for _ in range(30):
            order = list(range(g.n))
            rng.shuffle(order)
            sigma = [0] * g.n
            for r, v in enumerate(order):
                sigma[v] = r
            net = build_network(build_filtered(lift, sigma), lift, info)
            fm, value = max_flow(net)
            if fm.total_disb(lift) >= 1:
                continue
            out = round_matching(fm, lift)
            assert out.is_integral()
            assert out.total_disb(lift) == 0
            rounded += 1
        assert rounded >= 5


class TestPrune:
    def test_balanced_clumps_empty(self):
        g = gen_bipartite_union(2, 3)
        _, dec = decomposition_of(g)
        lift = build_lift(g, dec)
        xs = sorted(dec.clusters[0].x_side)
        ys = sorted(dec.clusters[0].y_side)
        m = BalancingMatching(edges=frozenset())
        assert len(prune_matching(m, lift)) == 0

    def test_empty_matching(self):
        g, dec = two_block_imbalanced(3, 0)
        lift = build_lift(g, dec)
        out = prune_matching(BalancingMatching(edges=frozenset()), lift)
        assert len(out) == 0

    def test_shrinks_padded_matching(self):
        # total imbalance 4 over 4 clumps: bound is 4*4/2 = 8; a padded
        # balancing matching with extra cancelling edges must shrink within it
        g, dec = two_block_imbalanced(3, 1)
        lift = build_lift(g, dec)
        info = validate_regular(g)
        m, sigma = balance_clumps(g, dec, seed=5)
        assert matching_balances(lift, m.edges)
        bound = total_clump_imbalance(lift) * lift.s // 2
        assert len(m) <= bound
        out = prune_matching(m, lift)
        assert matching_balances(lift, out.edges)
        assert len(out) <= bound

    def test_direct_matching_balances(self):
        g = gen_petersen()
        _, dec = decomposition_of(g)
        lift = build_lift(g, dec)
        built = construct_side_matching(g, dec)
        assert built is not None
        m, sigma = built
        assert matching_balances(lift, m.edges)
        assert len(m) == 2


class TestBalanceClumps:
    def test_prebalanced_empty(self):
        g = gen_bipartite_union(2, 3)
        _, dec = decomposition_of(g)
        m, sigma = balance_clumps(g, dec, seed=0)
        assert len(m) == 0 and sigma == tuple(range(g.n))

    def test_two_imbalanced_clusters(self):
        g, dec = two_block_imbalanced(3, 1)
        lift = build_lift(g, dec)
        m, sigma = balance_clumps(g, dec, seed=1)
        assert matching_balances(lift, m.edges)
        assert len(m) <= total_clump_imbalance(lift) * lift.s // 2

    def test_deterministic(self):
        g, dec = two_block_imbalanced(3, 2)
        a = balance_clumps(g, dec, seed=3)
        b = balance_clumps(g, dec, seed=3)
        assert a == b


class TestStructuralInvariants:
    def test_lift_regularity_and_degrees(self):
        g = gen_random_regular(20, 10, seed=2)
        info, dec = decomposition_of(g)
        lift = build_lift(g, dec)
        assert all(lift.degree(v) == info.d for v in range(g.n))

    def test_cross_clump_bound_and_disb_bound(self):
        # on a hierarchy-conforming instance the structural bounds hold:
        # cross-clump edges <= 3 r beta n^2 and total imbalance <= (6 beta r / c) n
        g, dec = two_block_imbalanced(8, 2)
        info = validate_regular(g)
        lift = build_lift(g, dec)
        n = g.n
        r = len(dec.clusters)
        beta = dec.beta_effective
        assert cross_clump_edge_count(lift) <= 3 * r * beta * n * n
        assert total_clump_imbalance(lift) <= (6 * beta * r / info.c) * n

    def test_clump_min_degree(self):
        g, dec = two_block_imbalanced(6, 1)
        lift = build_lift(g, dec)
        delta_n = dec.ladder.delta * g.n
        for i, clump in enumerate(lift.clumps):
            for u in clump.bottom:
                inside = sum(1 for w in g.neighbors(u) if lift.top_clump[w] == i)
                assert inside >= delta_n / 2

    @given(st.integers(0, 10**6))
    @settings(max_examples=25, deadline=None)
    def test_pullback_acyclic_random(self, seed):
        rng = random.Random(seed)
        g = gen_petersen()
        info, dec = decomposition_of(g)
        lift = build_lift(g, dec)
        order = list(range(10))
        rng.shuffle(order)
        sigma = [0] * 10
        for r, v in enumerate(order):
            sigma[v] = r
        filt = build_filtered(lift, sigma)
        # random greedy matching in the filter
        edges = list(filt.edges)
        rng.shuffle(edges)
        used_b, used_t = set(), set()
        matching = []
        for u, v in edges:
            if u not in used_b and v not in used_t:
                matching.append((u, v))
                used_b.add(u)
                used_t.add(v)
        forest = pull_back(BalancingMatching(edges=frozenset(matching)), lift)
        assert forest.size() <= 2 * len(matching)
