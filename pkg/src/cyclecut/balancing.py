"""Balance the bipartite-ish clusters via a matching in a filtered lift graph.

The lift doubles every vertex into a bottom copy (layer 1) and a top copy
(layer 2); base edges become bottom-top edges.  Clusters become clumps:
a far-from-bipartite cluster contributes one clump (its two copies), a
near-bipartite cluster two crossed clumps.  A random vertex order keeps only
cross-clump edges pointing "up" the order; a max flow on a vertex-capacitated
network, rounded to an integral matching and pruned to a small submatching,
yields a matching whose removal balances every clump.
"""

from __future__ import annotations

import logging
import random
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Sequence

from .decomposer import Decomposition, NEAR_BIPARTITE
from .errors import BalancingFailed, InputError, NotAlmostBalancing
from .graph import Graph, RegularityInfo, validate_regular

log = logging.getLogger("cyclecut.balancing")

# A lift edge is a pair (u, v) meaning: bottom copy of u joined to top copy
# of v.  A matching is a set of such pairs with all bottoms distinct and all
# tops distinct.
LiftEdge = tuple[int, int]


@dataclass(frozen=True)
class Clump:
    """One part of the lift's vertex partition.

    `bottom` holds base ids whose layer-1 copy is in the clump, `top` base
    ids whose layer-2 copy is.
    """

    bottom: frozenset[int]
    top: frozenset[int]


@dataclass(frozen=True)
class LiftGraph:
    base: Graph
    clumps: tuple[Clump, ...]
    # clump index of each vertex's bottom / top copy
    bottom_clump: tuple[int, ...]
    top_clump: tuple[int, ...]

    @property
    def s(self) -> int:
        return len(self.clumps)

    def degree(self, v: int) -> int:
        # both copies inherit the base degree
        return self.base.degree(v)


def build_lift(g: Graph, dec: Decomposition) -> LiftGraph:
    """Bipartite double cover of g with clumps derived from the clusters."""
    clumps: list[Clump] = []
    for cluster in dec.clusters:
        if cluster.kind == NEAR_BIPARTITE:
            clumps.append(Clump(bottom=cluster.x_side, top=cluster.y_side))
            clumps.append(Clump(bottom=cluster.y_side, top=cluster.x_side))
        else:
            clumps.append(Clump(bottom=cluster.vertices, top=cluster.vertices))
    bottom_clump = [-1] * g.n
    top_clump = [-1] * g.n
    for i, clump in enumerate(clumps):
        for v in clump.bottom:
            bottom_clump[v] = i
        for v in clump.top:
            top_clump[v] = i
    if -1 in bottom_clump or -1 in top_clump:
        raise InputError("decomposition does not cover every vertex")
    return LiftGraph(base=g, clumps=tuple(clumps),
                     bottom_clump=tuple(bottom_clump), top_clump=tuple(top_clump))


def clump_imbalance(lift: LiftGraph, i: int) -> int:
    clump = lift.clumps[i]
    return abs(len(clump.top) - len(clump.bottom))


def total_clump_imbalance(lift: LiftGraph) -> int:
    return sum(clump_imbalance(lift, i) for i in range(lift.s))


def cross_clump_edge_count(lift: LiftGraph) -> int:
    """Lift edges whose endpoints lie in different clumps."""
    count = 0
    for u, v in lift.base.edges():
        if lift.bottom_clump[u] != lift.top_clump[v]:
            count += 1
        if lift.bottom_clump[v] != lift.top_clump[u]:
            count += 1
    return count


@dataclass(frozen=True)
class OrderedFilter:
    """Cross-clump lift edges pointing up a vertex order.

    Keeps bottom(u)-top(v) exactly when uv is a base edge, sigma ranks u
    before v, and the two copies sit in distinct clumps.  Matchings in this
    graph pull back to acyclic subgraphs of the base graph.
    """

    sigma: tuple[int, ...]  # sigma[v] = rank of v
    edges: tuple[LiftEdge, ...]


def build_filtered(lift: LiftGraph, sigma: Sequence[int]) -> OrderedFilter:
    if sorted(sigma) != list(range(lift.base.n)):
        raise InputError("sigma must be a permutation of the vertices")
    edges = []
    for u, v in lift.base.edges():
        a, b = (u, v) if sigma[u] < sigma[v] else (v, u)
        if lift.bottom_clump[a] != lift.top_clump[b]:
            edges.append((a, b))
    edges.sort()
    return OrderedFilter(sigma=tuple(sigma), edges=tuple(edges))


# ---------------------------------------------------------------------------
# Flow network (vertex capacities realized by node splitting)
# ---------------------------------------------------------------------------

class FlowNetwork:
    """Source/sink network over the filtered lift with rational capacities."""

    def __init__(self, filter_: OrderedFilter, lift: LiftGraph, info: RegularityInfo):
        self.lift = lift
        self.filter = filter_
        s = lift.s
        cn = Fraction(info.d)
        self.a = [[Fraction(0)] * s for _ in range(s)]
        for i in range(s):
            for j in range(s):
                if i != j:
                    cross = sum(1 for u in lift.clumps[i].bottom
                                for w in lift.base.neighbors(u) if lift.top_clump[w] == j)
                    self.a[i][j] = Fraction(cross) / cn
        self.total_capacity = sum(sum(row) for row in self.a)

        # node ids: for each capacitated vertex an in/out pair
        n = lift.base.n
        self._ids: dict = {}

        def nid(key) -> int:
            if key not in self._ids:
                self._ids[key] = len(self._ids)
            return self._ids[key]

        self.source = nid("p")
        self.sink = nid("q")
        inf = self.total_capacity + 1

        self._to: list[list[int]] = []
        self._cap: list[Fraction] = []
        self._head: list[int] = []

        graph_arcs: list[list[int]] = []

        def add_arc(a: int, b: int, cap: Fraction) -> int:
            while len(graph_arcs) <= max(a, b):
                graph_arcs.append([])
            idx = len(self._cap)
            self._head.append(b)
            self._cap.append(cap)
            graph_arcs[a].append(idx)
            self._head.append(a)
            self._cap.append(Fraction(0))
            graph_arcs[b].append(idx + 1)
            return idx

        self._edge_arc: dict[LiftEdge, int] = {}
        for i in range(s):
            bi_in, bi_out = nid(("b", i, "in")), nid(("b", i, "out"))
            ti_in, ti_out = nid(("t", i, "in")), nid(("t", i, "out"))
            add_arc(bi_in, bi_out, sum(self.a[i][j] for j in range(s)))
            add_arc(ti_in, ti_out, sum(self.a[j][i] for j in range(s)))
            add_arc(self.source, bi_in, inf)
            add_arc(ti_out, self.sink, inf)
        for v in range(n):
            add_arc(nid(("B", v, "in")), nid(("B", v, "out")), Fraction(1))
            add_arc(nid(("T", v, "in")), nid(("T", v, "out")), Fraction(1))
            add_arc(nid(("b", lift.bottom_clump[v], "out")), nid(("B", v, "in")), inf)
            add_arc(nid(("T", v, "out")), nid(("t", lift.top_clump[v], "in")), inf)
        for (u, v) in filter_.edges:
            self._edge_arc[(u, v)] = add_arc(nid(("B", u, "out")), nid(("T", v, "in")), inf)
        self._graph_arcs = graph_arcs


def build_network(filter_: OrderedFilter, lift: LiftGraph, info: RegularityInfo) -> FlowNetwork:
    """Source/sink network of the filtered lift (gateway capacities from the
    normalized cross-clump edge counts, unit capacity on lift vertices)."""
    return FlowNetwork(filter_, lift, info)


@dataclass
class FractionalMatching:
    """Edge weights in [0,1] with every vertex weight at most 1."""

    weights: dict[LiftEdge, Fraction]

    def vertex_weights(self) -> tuple[dict[int, Fraction], dict[int, Fraction]]:
        bottom: dict[int, Fraction] = {}
        top: dict[int, Fraction] = {}
        for (u, v), w in self.weights.items():
            bottom[u] = bottom.get(u, Fraction(0)) + w
            top[v] = top.get(v, Fraction(0)) + w
        return bottom, top

    def disb(self, lift: LiftGraph, i: int) -> Fraction:
        bottom, top = self.vertex_weights()
        clump = lift.clumps[i]
        w_b = sum((bottom.get(v, Fraction(0)) for v in clump.bottom), Fraction(0))
        w_t = sum((top.get(v, Fraction(0)) for v in clump.top), Fraction(0))
        return abs((len(clump.top) - w_t) - (len(clump.bottom) - w_b))

    def total_disb(self, lift: LiftGraph) -> Fraction:
        return sum((self.disb(lift, i) for i in range(lift.s)), Fraction(0))

    def is_integral(self) -> bool:
        return all(w in (0, 1) for w in self.weights.values())


def max_flow(net: FlowNetwork) -> tuple[FractionalMatching, Fraction]:
    """Edmonds-Karp with exact rational arithmetic."""
    cap = net._cap[:]
    head = net._head
    arcs = net._graph_arcs
    src, snk = net.source, net.sink
    value = Fraction(0)
    while True:
        parent_arc = [-1] * len(arcs)
        parent_arc[src] = -2
        queue = deque([src])
        while queue and parent_arc[snk] == -1:
            u = queue.popleft()
            for aidx in arcs[u]:
                w = head[aidx]
                if parent_arc[w] == -1 and cap[aidx] > 0:
                    parent_arc[w] = aidx
                    queue.append(w)
        if parent_arc[snk] == -1:
            break
        bottleneck = None
        u = snk
        while u != src:
            aidx = parent_arc[u]
            bottleneck = cap[aidx] if bottleneck is None else min(bottleneck, cap[aidx])
            u = head[aidx ^ 1]
        u = snk
        while u != src:
            aidx = parent_arc[u]
            cap[aidx] -= bottleneck
            cap[aidx ^ 1] += bottleneck
            u = head[aidx ^ 1]
        value += bottleneck
    weights = {}
    for edge, aidx in net._edge_arc.items():
        flow = cap[aidx ^ 1]  # residual on the reverse arc equals the flow
        if flow > 0:
            weights[edge] = flow
    return FractionalMatching(weights=weights), value


# ---------------------------------------------------------------------------
# Rounding
# ---------------------------------------------------------------------------

def _open_edges(weights: dict[LiftEdge, Fraction]) -> list[LiftEdge]:
    return [e for e, w in weights.items() if 0 < w < 1]


def round_matching(fm: FractionalMatching, lift: LiftGraph) -> FractionalMatching:
    """Convert an almost-balancing fractional matching into an integral one
    with total clump imbalance zero.

    Repeatedly shifts weight along cycles (imbalance preserved per clump) or
    leaf-to-leaf paths (sign chosen so the total imbalance does not grow) in
    the auxiliary graph of open edges plus per-clump fake paths, until no
    open edge remains.
    """
    weights = {e: Fraction(w) for e, w in fm.weights.items() if w > 0}
    work = FractionalMatching(weights=weights)
    start_disb = work.total_disb(lift)
    if start_disb >= 1:
        raise NotAlmostBalancing(
            f"total fractional imbalance {float(start_disb):.3f} >= 1; resample sigma")

    # nodes of the auxiliary graph: ("B", v) bottom copies, ("T", v) top copies
    guard = 4 * len(weights) + 10
    for _ in range(guard):
        open_edges = _open_edges(weights)
        if not open_edges:
            break
        bottom_w, top_w = work.vertex_weights()
        open_nodes = set()
        for (u, v) in open_edges:
            open_nodes.add(("B", u))
            open_nodes.add(("T", v))
        open_vertices = {node for node in open_nodes
                         if 0 < (bottom_w if node[0] == "B" else top_w).get(node[1], Fraction(0)) < 1}

        adj: dict[tuple, list[tuple[tuple, Optional[LiftEdge]]]] = {}

        def add(a, b, edge):
            adj.setdefault(a, []).append((b, edge))
            adj.setdefault(b, []).append((a, edge))

        for e in open_edges:
            add(("B", e[0]), ("T", e[1]), e)
        # fake paths chain the open vertices of each clump in ascending order
        for i in range(lift.s):
            clump = lift.clumps[i]
            members = sorted(
                [("B", v) for v in clump.bottom if ("B", v) in open_vertices]
                + [("T", v) for v in clump.top if ("T", v) in open_vertices],
                key=lambda nd: (nd[1], nd[0]))
            for a, b in zip(members, members[1:]):
                add(a, b, None)

        cycle = _find_cycle(adj)
        if cycle is not None:
            _shift_along(weights, bottom_w, top_w, cycle, lift, work, prefer_balance=False)
            continue
        path = _find_leaf_path(adj)
        if path is None:
            raise NotAlmostBalancing("auxiliary graph empty while open edges remain")
        _shift_along(weights, bottom_w, top_w, path, lift, work, prefer_balance=True)
    else:
        raise NotAlmostBalancing("rounding did not terminate")

    final = FractionalMatching(weights={e: w for e, w in weights.items() if w == 1})
    if not final.is_integral():
        raise NotAlmostBalancing("rounding left non-integral weights")
    if final.total_disb(lift) != 0:
        raise NotAlmostBalancing("rounded matching does not balance the clumps")
    return final


def _find_cycle(adj) -> Optional[list[tuple[tuple, tuple, Optional[LiftEdge]]]]:
    """DFS cycle as a list of (node_from, node_to, edge-or-None) steps.

    Back-edges are only taken to ancestors of the active DFS path, so the
    parent walk below always terminates at the revisited node."""
    seen: set = set()
    for root in sorted(adj, key=str):
        if root in seen:
            continue
        parent: dict = {root: (None, None)}
        on_path = {root}
        seen.add(root)
        stack = [(root, iter(adj[root]))]
        while stack:
            node, it = stack[-1]
            advanced = False
            for nxt, edge in it:
                pnode, pedge = parent[node]
                if nxt == pnode and edge is pedge:
                    continue
                if nxt in on_path:
                    steps = [(node, nxt, edge)]
                    cur = node
                    while cur != nxt:
                        p, pe = parent[cur]
                        steps.append((p, cur, pe))
                        cur = p
                    return steps
                if nxt not in seen:
                    parent[nxt] = (node, edge)
                    seen.add(nxt)
                    on_path.add(nxt)
                    stack.append((nxt, iter(adj[nxt])))
                    advanced = True
                    break
            if not advanced:
                stack.pop()
                on_path.discard(node)
    return None


def _find_leaf_path(adj) -> Optional[list[tuple[tuple, tuple, Optional[LiftEdge]]]]:
    leaves = sorted((nd for nd, nbrs in adj.items() if len(nbrs) == 1), key=str)
    if not leaves:
        return None
    start = leaves[0]
    # walk the tree to another leaf
    prev_edge = None
    prev = None
    cur = start
    steps = []
    while True:
        nbrs = [(nxt, e) for (nxt, e) in adj[cur] if not (nxt == prev and e is prev_edge)]
        if not nbrs:
            break
        nxt, e = nbrs[0]
        steps.append((cur, nxt, e))
        prev, prev_edge, cur = cur, e, nxt
        if len(adj[cur]) == 1:
            break
    return steps if steps else None


def _shift_along(weights, bottom_w, top_w, steps, lift, work, prefer_balance: bool):
    """Shift +/-lambda along the walk, stopping exactly when an open edge or
    open vertex hits a boundary.  For cycles any direction works (imbalance
    preserved); for paths both directions are evaluated and the one not
    increasing the total imbalance is applied."""
    # coefficient of lambda for each real edge: +1 if traversed bottom->top
    coef: dict[LiftEdge, int] = {}
    for (a, b, edge) in steps:
        if edge is None:
            continue
        direction = 1 if (a[0] == "B") else -1
        coef[edge] = coef.get(edge, 0) + direction
    coef = {e: c for e, c in coef.items() if c != 0}
    if not coef:
        return

    def limit(sign: int) -> Fraction:
        lam = None

        def tighten(v: Fraction):
            nonlocal lam
            lam = v if lam is None else min(lam, v)

        for e, c in coef.items():
            eff = c * sign
            if eff > 0:
                tighten((1 - weights[e]) / eff)
            else:
                tighten(weights[e] / (-eff))
        # vertex weights must stay in [0,1]
        vert_coef: dict[tuple, int] = {}
        for e, c in coef.items():
            vert_coef[("B", e[0])] = vert_coef.get(("B", e[0]), 0) + c
            vert_coef[("T", e[1])] = vert_coef.get(("T", e[1]), 0) + c
        for node, c in vert_coef.items():
            eff = c * sign
            if eff == 0:
                continue
            w = (bottom_w if node[0] == "B" else top_w).get(node[1], Fraction(0))
            if eff > 0:
                tighten((1 - w) / eff)
            else:
                tighten(w / (-eff))
        return lam if lam is not None else Fraction(0)

    def apply(sign: int, lam: Fraction, trial: dict) -> dict:
        for e, c in coef.items():
            trial[e] = trial.get(e, Fraction(0)) + c * sign * lam
        return trial

    options = []
    for sign in (1, -1):
        lam = limit(sign)
        if lam <= 0:
            continue
        trial = apply(sign, lam, dict(weights))
        fm = FractionalMatching(weights={e: w for e, w in trial.items() if w > 0})
        options.append((fm.total_disb(lift), sign, lam, trial))
        if not prefer_balance:
            break
    if not options:
        raise NotAlmostBalancing("no feasible shift along the auxiliary walk")
    options.sort(key=lambda t: (t[0], -t[1]))
    _, sign, lam, trial = options[0]
    weights.clear()
    weights.update({e: w for e, w in trial.items() if w > 0})


# ---------------------------------------------------------------------------
# Pruning (small balancing submatching)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BalancingMatching:
    edges: frozenset[LiftEdge]

    def __len__(self) -> int:
        return len(self.edges)


def matching_balances(lift: LiftGraph, m: Iterable[LiftEdge]) -> bool:
    edges = list(m)
    bottoms = [u for u, _ in edges]
    tops = [v for _, v in edges]
    if len(set(bottoms)) != len(bottoms) or len(set(tops)) != len(tops):
        return False
    for i in range(lift.s):
        clump = lift.clumps[i]
        res_t = len(clump.top) - sum(1 for v in tops if v in clump.top)
        res_b = len(clump.bottom) - sum(1 for u in bottoms if u in clump.bottom)
        if res_t != res_b:
            return False
    return True


def prune_matching(m: BalancingMatching, lift: LiftGraph, k: Optional[int] = None) -> BalancingMatching:
    """Shrink a balancing matching to at most (sum of clump imbalances)*k/2
    edges while still balancing every clump.

    Follows the proof procedure: pair up matched bottom/top vertices inside
    each clump, direct matching edges bottom->top and pairing arcs top->
    bottom, then repeatedly drop matching edges lying on cycles or on
    same-clump-side return walks, and keep the edges of exposed-to-exposed
    paths (at most k matching edges each).
    """
    if k is None:
        k = lift.s
    if not matching_balances(lift, m.edges):
        raise InputError("prune_matching needs a balancing matching")
    bound = total_clump_imbalance(lift) * k // 2

    current = set(m.edges)
    kept: set[LiftEdge] = set()

    guard = 4 * len(current) + 10
    for _ in range(guard):
        if not current:
            break
        # rebuild pairing on the current matching's vertices
        match_from_b = {u: (u, v) for (u, v) in current}
        match_to_t = {v: (u, v) for (u, v) in current}
        succ: dict[tuple, tuple] = {}   # functional arcs over nodes ("B",u)/("T",v)
        for (u, v) in current:
            succ[("B", u)] = ("T", v)
        for i in range(lift.s):
            clump = lift.clumps[i]
            matched_b = sorted(u for u in clump.bottom if u in match_from_b)
            matched_t = sorted(v for v in clump.top if v in match_to_t)
            for u, v in zip(matched_b, matched_t):
                succ[("T", v)] = ("B", u)

        node_side: dict[tuple, tuple] = {}
        for i in range(lift.s):
            clump = lift.clumps[i]
            for u in clump.bottom:
                if u in match_from_b:
                    node_side[("B", u)] = (i, "B")
            for v in clump.top:
                if v in match_to_t:
                    node_side[("T", v)] = (i, "T")

        indeg = {nd: 0 for nd in succ}
        for nd, nx in succ.items():
            if nx in indeg or nx in succ:
                indeg[nx] = indeg.get(nx, 0) + 1
        starts = sorted((nd for nd in succ if indeg.get(nd, 0) == 0), key=str)

        progressed = False
        visited: set[tuple] = set()

        def walk(start):
            """Trace the functional walk; return ('strip', edges) on a
            same-side revisit or cycle, or ('path', edges) for a full
            exposed-to-exposed path."""
            seen_sides: dict[tuple, int] = {}
            seen_nodes: dict[tuple, int] = {}
            trail: list[tuple] = []
            medges: list[LiftEdge] = []
            cur = start
            while True:
                if cur in seen_nodes:  # cycle
                    cut = seen_nodes[cur]
                    return "strip", [e for e in medges[_count_medges(trail[:cut]):]]
                side = node_side[cur]
                if side in seen_sides:
                    cut = seen_sides[side]
                    return "strip", medges[_count_medges(trail[:cut]):]
                seen_sides[side] = len(trail)
                seen_nodes[cur] = len(trail)
                trail.append(cur)
                visited.add(cur)
                if cur not in succ:
                    return "path", medges
                nxt = succ[cur]
                if cur[0] == "B":
                    medges.append((cur[1], nxt[1]))
                cur = nxt

        def _count_medges(prefix_nodes) -> int:
            return sum(1 for nd in prefix_nodes if nd[0] == "B" and nd in succ)

        for start in starts:
            kind, medges = walk(start)
            if kind == "strip" and medges:
                current -= set(medges)
                progressed = True
                break
            if kind == "path" and medges:
                kept |= set(medges)
                current -= set(medges)
                progressed = True
                break
        else:
            # only cycles remain (no exposed starts): strip one
            remaining = sorted(set(succ) - visited, key=str)
            if not remaining:
                break
            kind, medges = walk(remaining[0])
            if medges:
                current -= set(medges)
                progressed = True
        if not progressed:
            break

    result = BalancingMatching(edges=frozenset(kept))
    if not matching_balances(lift, result.edges) or len(result) > bound:
        # identity fallback; still correct if the input already met the bound
        if len(m) <= bound or matching_balances(lift, m.edges):
            log.warning("prune fell back to the unpruned matching (%d edges)", len(m))
            return m
        raise InputError("pruning failed to produce a balancing submatching")
    return result


def construct_side_matching(g: Graph, dec: Decomposition
                            ) -> Optional[tuple[BalancingMatching, tuple[int, ...]]]:
    """Deterministic balancing matching from same-side edges only.

    Each imbalanced near-bipartite cluster gets |t| vertex-disjoint edges
    inside its larger side; such an edge covers the heavy bottom of one of
    the cluster's clumps and the heavy top of the other, so both balance at
    once.  Returns None when some imbalanced cluster lacks enough same-side
    edges.  The identity order validates every edge, so the pull-back is
    acyclic by construction.
    """
    lift = build_lift(g, dec)
    edges: list[LiftEdge] = []
    used: set[int] = set()
    for cluster in dec.clusters:
        if cluster.kind != NEAR_BIPARTITE:
            continue
        t = len(cluster.x_side) - len(cluster.y_side)
        if t == 0:
            continue
        big = cluster.x_side if t > 0 else cluster.y_side
        need = abs(t)
        for u in sorted(big):
            if need == 0:
                break
            if u in used:
                continue
            for v in sorted(g.neighbors(u)):
                if v in big and v not in used and v != u:
                    edges.append((min(u, v), max(u, v)))
                    used.update((u, v))
                    need -= 1
                    break
        if need > 0:
            return None
    matching = BalancingMatching(edges=frozenset(edges))
    if not matching_balances(lift, matching.edges):
        return None
    return matching, tuple(range(g.n))


# ---------------------------------------------------------------------------
# Top-level balancing loop
# ---------------------------------------------------------------------------

def balance_clumps(
    g: Graph,
    dec: Decomposition,
    seed: int,
    max_retries: int = 50,
    flow_deficit: Fraction = Fraction(9, 10),
) -> tuple[BalancingMatching, tuple[int, ...]]:
    """Sample vertex orders until the flow pipeline yields a balancing matching.

    Returns the matching and the successful order.  Raises BalancingFailed
    with the best deficit seen if no order within `max_retries` works.
    """
    info = validate_regular(g)
    lift = build_lift(g, dec)
    n = g.n
    identity = tuple(range(n))
    if total_clump_imbalance(lift) == 0:
        return BalancingMatching(edges=frozenset()), identity

    rng = random.Random(seed)
    best_deficit: Optional[Fraction] = None
    for attempt in range(max_retries):
        order = list(range(n))
        rng.shuffle(order)
        sigma = [0] * n
        for rank, v in enumerate(order):
            sigma[v] = rank
        filt = build_filtered(lift, sigma)
        net = FlowNetwork(filt, lift, info)
        fm, value = max_flow(net)
        deficit = net.total_capacity - value
        if best_deficit is None or deficit < best_deficit:
            best_deficit = deficit
        if deficit > flow_deficit:
            log.debug("attempt %d: flow deficit %.3f too large", attempt, float(deficit))
            continue
        try:
            integral = round_matching(fm, lift)
        except NotAlmostBalancing as exc:
            log.debug("attempt %d: %s", attempt, exc)
            continue
        matching = BalancingMatching(edges=frozenset(integral.weights))
        pruned = prune_matching(matching, lift, lift.s)
        if matching_balances(lift, pruned.edges):
            log.info("balanced all %d clumps with %d edges after %d attempt(s)",
                     lift.s, len(pruned), attempt + 1)
            return pruned, tuple(sigma)
    raise BalancingFailed(
        f"no balancing matching after {max_retries} orders "
        f"(best flow deficit {float(best_deficit) if best_deficit is not None else 'n/a'})",
        best_deficit=best_deficit)
