"""Grow the balancing matching into a linear forest that balances clusters.

The matching pulls back to an acyclic degree-<=2 subgraph of the base graph.
Clusters holding four or more of its path-ends get pairs of ends joined by
short internal detours until every cluster holds two or zero; near-bipartite
clusters whose two ends sit on the same side get one extra cross edge.  In
near-bipartite clusters all added paths use side-crossing edges only: that
keeps the degree difference between the two sides fixed, which is exactly
what makes the residual sides end up equal.
"""

from __future__ import annotations

import logging
import math
from collections import deque
from dataclasses import dataclass
from typing import Callable, Iterable, Optional, Sequence

from .balancing import BalancingMatching, LiftGraph, balance_clumps
from .decomposer import Cluster, Decomposition, NEAR_BIPARTITE
from .errors import (
    CycleDetected,
    Disconnected,
    InputError,
    MergeFailed,
    NoExtensionVertex,
)
from .graph import Graph

log = logging.getLogger("cyclecut.forest")


@dataclass(frozen=True)
class LinearForest:
    """Vertex-disjoint paths in the base graph, each with >= 2 vertices."""

    paths: tuple[tuple[int, ...], ...]

    def vertices(self) -> frozenset[int]:
        return frozenset(v for p in self.paths for v in p)

    def leaves(self) -> frozenset[int]:
        return frozenset(v for p in self.paths for v in (p[0], p[-1]))

    def interior(self) -> frozenset[int]:
        return frozenset(v for p in self.paths for v in p[1:-1])

    def size(self) -> int:
        return sum(len(p) for p in self.paths)

    def validate(self, g: Graph) -> None:
        seen: set[int] = set()
        for p in self.paths:
            if len(p) < 2:
                raise InputError(f"forest path too short: {p}")
            if len(set(p)) != len(p):
                raise InputError(f"forest path revisits a vertex: {p}")
            for u, v in zip(p, p[1:]):
                if not g.has_edge(u, v):
                    raise InputError(f"forest uses non-edge ({u},{v})")
            if seen & set(p):
                raise InputError("forest paths are not vertex-disjoint")
            seen |= set(p)

    def to_json_dict(self) -> dict:
        return {"paths": [list(p) for p in self.paths]}


@dataclass(frozen=True)
class ForestReport:
    """Mirrors the balancing-forest guarantees as per-property booleans."""

    size_ok: bool
    no_isolated: bool
    two_or_zero_leaves: bool
    one_leaf_per_side: bool
    residual_balance: bool
    total_size: int
    size_limit: int
    leaf_counts: tuple[int, ...]
    residual_deltas: tuple[int, ...]  # |X_i n V(H)| - |Y_i n V(H)| - (|X_i| - |Y_i|), near clusters
    matching_size: int
    retries: int

    @property
    def all_ok(self) -> bool:
        return (self.size_ok and self.no_isolated and self.two_or_zero_leaves
                and self.one_leaf_per_side and self.residual_balance)

    def to_json_dict(self) -> dict:
        return {
            "size_ok": self.size_ok,
            "no_isolated": self.no_isolated,
            "two_or_zero_leaves": self.two_or_zero_leaves,
            "one_leaf_per_side": self.one_leaf_per_side,
            "residual_balance": self.residual_balance,
            "total_size": self.total_size,
            "size_limit": self.size_limit,
            "leaf_counts": list(self.leaf_counts),
            "residual_deltas": list(self.residual_deltas),
            "matching_size": self.matching_size,
            "retries": self.retries,
        }


# ---------------------------------------------------------------------------
# Pull-back
# ---------------------------------------------------------------------------

def pull_back(m: BalancingMatching, lift: LiftGraph) -> LinearForest:
    """Base-graph subgraph spanned by the matching, split into maximal paths.

    A matching in the order-filtered lift cannot close a base cycle (the
    order would have to increase around it), so a cycle here means the
    caller fed a matching from outside a valid filter.
    """
    edges = sorted(m.edges)
    adj: dict[int, list[int]] = {}
    for u, v in edges:
        adj.setdefault(u, []).append(v)
        adj.setdefault(v, []).append(u)
    for v, nbrs in adj.items():
        if len(nbrs) > 2:
            raise CycleDetected(f"pulled-back degree {len(nbrs)} at vertex {v}")

    paths: list[tuple[int, ...]] = []
    visited: set[int] = set()
    for start in sorted(adj):
        if start in visited or len(adj[start]) != 1:
            continue
        path = [start]
        visited.add(start)
        cur, prev = start, None
        while True:
            nxts = [w for w in adj[cur] if w != prev]
            if not nxts:
                break
            nxt = nxts[0]
            if nxt in visited:
                raise CycleDetected(f"cycle through vertex {nxt} in pulled-back matching")
            path.append(nxt)
            visited.add(nxt)
            prev, cur = cur, nxt
        paths.append(tuple(path))
    if len(visited) != len(adj):
        raise CycleDetected("pulled-back matching contains a cycle component")
    return LinearForest(paths=tuple(sorted(paths)))


# ---------------------------------------------------------------------------
# Short connections
# ---------------------------------------------------------------------------

def short_connect(
    g: Graph,
    cluster_vertices: Iterable[int],
    x: int,
    y: int,
    forbidden: Iterable[int],
    edge_ok: Optional[Callable[[int, int], bool]] = None,
    zeta: Optional[float] = None,
) -> tuple[int, ...]:
    """Shortest x-y path inside the cluster avoiding forbidden vertices.

    `edge_ok` restricts usable edges (near-bipartite clusters pass a
    side-crossing filter).  With cluster guarantees the length stays within
    ceil(3/zeta); at desk scale that is logged, not enforced.
    """
    allowed = set(cluster_vertices)
    blocked = set(forbidden) - {x, y}
    if x not in allowed or y not in allowed or x == y:
        raise InputError(f"bad connection request x={x}, y={y}")
    if zeta is not None and len(blocked & allowed) > (zeta / 6) * len(allowed):
        # below one vertex of budget every tiny instance trips this; not a signal
        emit = log.warning if (zeta / 6) * len(allowed) >= 1 else log.debug
        emit("short_connect: %d forbidden vertices exceed zeta/6 * |A| = %.1f",
             len(blocked & allowed), (zeta / 6) * len(allowed))
    prev: dict[int, int] = {x: x}
    queue = deque([x])
    while queue:
        u = queue.popleft()
        if u == y:
            break
        for w in sorted(g.neighbors(u)):
            if w not in allowed or w in blocked or w in prev:
                continue
            if edge_ok is not None and not edge_ok(u, w):
                continue
            prev[w] = u
            queue.append(w)
    if y not in prev:
        raise Disconnected(f"no path from {x} to {y} inside the cluster")
    path = [y]
    while path[-1] != x:
        path.append(prev[path[-1]])
    path.reverse()
    if zeta is not None and len(path) - 1 > math.ceil(3 / zeta):
        log.warning("short_connect: length %d exceeds ceil(3/zeta)=%d",
                    len(path) - 1, math.ceil(3 / zeta))
    return tuple(path)


def _near_edge_filter(cluster: Cluster) -> Optional[Callable[[int, int], bool]]:
    if cluster.kind != NEAR_BIPARTITE:
        return None
    xs = cluster.x_side

    def ok(u: int, v: int) -> bool:
        return (u in xs) != (v in xs)

    return ok


# ---------------------------------------------------------------------------
# Leaf merging and parity fixing
# ---------------------------------------------------------------------------

def _leaves_by_cluster(dec: Decomposition, f: LinearForest) -> list[list[int]]:
    out: list[list[int]] = [[] for _ in dec.clusters]
    for p in f.paths:
        for leaf in (p[0], p[-1]):
            out[dec.cluster_of(leaf)].append(leaf)
    return [sorted(ls) for ls in out]


def _component_of(f: LinearForest, v: int) -> int:
    for i, p in enumerate(f.paths):
        if v in p:
            return i
    raise InputError(f"vertex {v} not in the forest")


def _join(f: LinearForest, path: Sequence[int]) -> LinearForest:
    """Union the forest with a connecting path whose ends are forest leaves
    in different components."""
    x, y = path[0], path[-1]
    ci, cj = _component_of(f, x), _component_of(f, y)
    if ci == cj:
        raise InputError("connecting path must join different components")
    pi, pj = list(f.paths[ci]), list(f.paths[cj])
    if pi[0] == x:
        pi.reverse()
    if pj[-1] == y:
        pj.reverse()
    if pi[-1] != x or pj[0] != y:
        raise InputError("connecting path ends must be leaves")
    merged = tuple(pi + list(path[1:-1]) + pj)
    rest = [p for k, p in enumerate(f.paths) if k not in (ci, cj)]
    return LinearForest(paths=tuple(sorted(rest + [merged])))


def merge_leaves(g: Graph, dec: Decomposition, f: LinearForest) -> LinearForest:
    """Join pairs of same-cluster leaves until every cluster holds 2 or 0.

    Pairs are chosen lexicographically (smallest leaf first, then the
    smallest leaf in another component); the connecting path avoids the rest
    of the forest and, in near-bipartite clusters, uses cross edges only.
    """
    zeta = float(dec.ladder.zeta)
    current = f
    while True:
        leaves = _leaves_by_cluster(dec, current)
        target = next((i for i, ls in enumerate(leaves) if len(ls) not in (0, 2)), None)
        if target is None:
            return current
        ls = leaves[target]
        if len(ls) % 2 == 1:
            raise MergeFailed(f"cluster {target} holds an odd number of leaves: {ls}")
        cluster = dec.clusters[target]
        edge_ok = _near_edge_filter(cluster)
        blocked = current.vertices()
        joined = None
        for x in ls:
            for y in ls:
                if y == x or _component_of(current, x) == _component_of(current, y):
                    continue
                try:
                    path = short_connect(g, cluster.vertices, x, y,
                                         forbidden=blocked - {x, y},
                                         edge_ok=edge_ok, zeta=zeta)
                except Disconnected:
                    continue
                joined = _join(current, path)
                break
            if joined is not None:
                break
        if joined is None:
            raise MergeFailed(
                f"no connectable cross-component leaf pair in cluster {target} (leaves {ls})")
        current = joined


FEASIBILITY_CHECK_LIMIT = 14


def _cluster_request_feasible(g: Graph, cluster: Cluster, f: LinearForest,
                              ends: tuple[int, int]) -> bool:
    """Exact feasibility of the eventual Hamilton-path request for a small
    cluster, given this forest; True (optimistic) above the size limit."""
    if len(cluster.vertices) > FEASIBILITY_CHECK_LIMIT:
        return True
    from .hamilton import exact_ham_path

    working = cluster.vertices - (cluster.vertices & f.interior())
    if ends[0] not in working or ends[1] not in working:
        return False
    return exact_ham_path(g, working, ends[0], ends[1]) is not None


def fix_parity(g: Graph, dec: Decomposition, f: LinearForest) -> LinearForest:
    """Move one leaf across in near-bipartite clusters whose two leaves share
    a side, by appending a cross edge to a vertex outside the forest.

    Among the admissible (leaf, new-vertex) choices, one that keeps the
    cluster's eventual Hamilton-path request solvable is preferred when the
    cluster is small enough to check exactly.
    """
    current = f
    leaves = _leaves_by_cluster(dec, current)
    for i, cluster in enumerate(dec.clusters):
        if cluster.kind != NEAR_BIPARTITE or len(leaves[i]) != 2:
            continue
        a, b = leaves[i]
        in_x = [v in cluster.x_side for v in (a, b)]
        if in_x[0] != in_x[1]:
            continue
        opposite = cluster.y_side if in_x[0] else cluster.x_side
        used = current.vertices()
        options: list[LinearForest] = []
        for leaf in (a, b):
            for w in sorted(g.neighbors(leaf)):
                if w in opposite and w not in used:
                    ci = _component_of(current, leaf)
                    p = list(current.paths[ci])
                    if p[0] == leaf:
                        p = [w] + p
                    else:
                        p = p + [w]
                    rest = [q for k, q in enumerate(current.paths) if k != ci]
                    options.append(LinearForest(paths=tuple(sorted(rest + [tuple(p)]))))
        if not options:
            raise NoExtensionVertex(
                f"cluster {i}: both same-side leaves have all opposite-side "
                f"neighbours inside the forest")
        chosen = options[0]
        for cand in options:
            new_leaves = _leaves_by_cluster(dec, cand)[i]
            if _cluster_request_feasible(g, cluster, cand,
                                         (new_leaves[0], new_leaves[1])):
                chosen = cand
                break
        current = chosen
    return current


# ---------------------------------------------------------------------------
# Top-level forest construction
# ---------------------------------------------------------------------------

def make_report(
    dec: Decomposition,
    f: LinearForest,
    n: int,
    xi: float,
    matching_size: int,
    retries: int,
) -> ForestReport:
    r = len(dec.clusters)
    zeta = float(dec.ladder.zeta)
    # the asymptotic budget xi*n plus the construction's additive slack: one
    # detour of length <= 3/zeta and one parity edge per cluster
    size_limit = math.ceil(xi * n) + r * (math.ceil(3 / zeta) + 2)
    leaves = _leaves_by_cluster(dec, f)
    covered = f.vertices()
    one_leaf = True
    deltas = []
    residual = True
    for i, cluster in enumerate(dec.clusters):
        if cluster.kind != NEAR_BIPARTITE:
            continue
        cx = sum(1 for v in cluster.x_side if v in covered)
        cy = sum(1 for v in cluster.y_side if v in covered)
        deltas.append((cx - cy) - (len(cluster.x_side) - len(cluster.y_side)))
        if deltas[-1] != 0:
            residual = False
        if leaves[i]:
            lx = sum(1 for v in leaves[i] if v in cluster.x_side)
            if not (lx == 1 and len(leaves[i]) == 2):
                one_leaf = False
    return ForestReport(
        size_ok=f.size() <= size_limit,
        no_isolated=all(len(p) >= 2 for p in f.paths),
        two_or_zero_leaves=all(len(ls) in (0, 2) for ls in leaves),
        one_leaf_per_side=one_leaf,
        residual_balance=residual,
        total_size=f.size(),
        size_limit=size_limit,
        leaf_counts=tuple(len(ls) for ls in leaves),
        residual_deltas=tuple(deltas),
        matching_size=matching_size,
        retries=retries,
    )


def build_balancing_forest(
    g: Graph,
    dec: Decomposition,
    seed: int,
    xi: float = 0.1,
    max_retries: int = 50,
    flow_deficit=None,
    strategy: str = "flow",
) -> tuple[LinearForest, ForestReport]:
    """balance_clumps -> pull_back -> merge_leaves -> fix_parity, with retries.

    Retries resample the vertex order when the merge or parity stage cannot
    complete (both can fail when a previous stage consumed too much of a
    cluster).  strategy="direct" builds the matching combinatorially from
    same-side edges when possible (a desk-scale fallback for tiny clusters
    where the flow pipeline's matchings strand the Hamilton-path stage) and
    falls back to the flow pipeline otherwise."""
    from fractions import Fraction

    from .balancing import build_lift, construct_side_matching

    deficit = Fraction(9, 10) if flow_deficit is None else Fraction(flow_deficit).limit_denominator(10**9)
    last_error: Optional[Exception] = None
    for attempt in range(max_retries):
        matching = None
        if strategy == "direct" and attempt == 0:
            built = construct_side_matching(g, dec)
            if built is not None:
                matching = built[0]
        if matching is None:
            matching, _sigma = balance_clumps(g, dec, seed + attempt,
                                              max_retries=max_retries, flow_deficit=deficit)
        lift = build_lift(g, dec)
        base = pull_back(matching, lift)
        try:
            merged = merge_leaves(g, dec, base)
            fixed = fix_parity(g, dec, merged)
        except (MergeFailed, NoExtensionVertex, Disconnected) as exc:
            last_error = exc
            log.debug("forest attempt %d failed: %s", attempt, exc)
            continue
        fixed.validate(g)
        report = make_report(dec, fixed, g.n, xi, matching_size=len(matching), retries=attempt)
        return fixed, report
    raise MergeFailed(f"forest construction failed after {max_retries} attempts: {last_error}")
