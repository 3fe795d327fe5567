"""Top-level constructions: cycle partitions and bipartite path partitions.

The r <= l route stitches per-cluster Hamilton paths with the balancing
forest's components into cycles; the r = l+1 route merges two clusters
through a 2-matching (cycles) or a single crossing edge / spliced component
(paths).  Every emitted partition is re-verified before being returned.
"""

from __future__ import annotations

import logging
import time
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from .config import RunConfig
from .decomposer import (
    Cluster,
    Decomposition,
    NEAR_BIPARTITE,
    decompose,
    default_ladder,
)
from .errors import (
    AssemblyFailed,
    BalancingFailed,
    CycleCutError,
    DecompositionFailed,
    HamFailed,
    InputError,
    MergeFailed,
    TwoMatchingMissing,
)
from .forest import LinearForest, build_balancing_forest
from .graph import Graph, bipartition_of, validate_regular
from .hamilton import HamRequest, ham_path
from .verification import verify_cycle_partition, verify_path_partition

log = logging.getLogger("cyclecut.assembler")


@dataclass(frozen=True)
class CyclePartition:
    cycles: tuple[tuple[int, ...], ...]

    def to_json_dict(self) -> dict:
        return {"kind": "cycles", "parts": [list(c) for c in self.cycles]}


@dataclass(frozen=True)
class PathPartition:
    paths: tuple[tuple[int, ...], ...]

    def to_json_dict(self) -> dict:
        return {"kind": "paths", "parts": [list(p) for p in self.paths]}


def partition_from_json(data: dict):
    kind = data.get("kind")
    parts = tuple(tuple(int(v) for v in p) for p in data.get("parts", []))
    if kind == "cycles":
        return CyclePartition(cycles=parts)
    if kind == "paths":
        return PathPartition(paths=parts)
    raise InputError(f"unknown partition kind {kind!r}")


@dataclass
class PartitionSummary:
    n: int
    d: int
    l_bound: int
    r_clusters: int
    s_near: int
    parts: int
    verified: bool
    retries: int
    stage_ms: dict = field(default_factory=dict)

    def to_json_dict(self) -> dict:
        return {
            "n": self.n, "d": self.d, "l": self.l_bound, "r": self.r_clusters,
            "s": self.s_near, "parts": self.parts, "verified": self.verified,
            "retries": self.retries, "stage_ms": {k: round(v, 2) for k, v in self.stage_ms.items()},
        }


# ---------------------------------------------------------------------------
# Helpers
# ---------------------------------------------------------------------------

def find_two_matching(g: Graph, a_side: Iterable[int], b_side: Iterable[int]
                      ) -> Optional[tuple[tuple[int, int], tuple[int, int]]]:
    """Two vertex-disjoint edges between the two sets, or None."""
    a_set, b_set = set(a_side), set(b_side)
    if a_set & b_set:
        raise InputError("sides must be disjoint")
    cross = sorted((u, v) for u in a_set for v in g.neighbors(u) if v in b_set)
    for i, e1 in enumerate(cross):
        for e2 in cross[i + 1:]:
            if e1[0] != e2[0] and e1[1] != e2[1]:
                return e1, e2
    return None


def closing_cycle_check(partition: CyclePartition, g: Graph):
    """Convenience re-verification; delegates to the standalone verifier."""
    return verify_cycle_partition(g, partition.cycles)


def _adjacent_free_pair(g: Graph, cluster: Cluster, free: set[int]
                        ) -> Optional[tuple[int, int]]:
    """Smallest adjacent pair inside `free`, side-crossing when near-bipartite."""
    for u in sorted(free):
        for v in sorted(g.neighbors(u)):
            if v not in free or v <= u:
                continue
            if cluster.kind == NEAR_BIPARTITE and ((u in cluster.x_side) == (v in cluster.x_side)):
                continue
            return u, v
    return None


def _orient(seq: Sequence[int], first: int) -> list[int]:
    s = list(seq)
    if s[0] == first:
        return s
    if s[-1] == first:
        return list(reversed(s))
    raise InputError(f"{first} is not an end of the segment")


@dataclass
class _ClusterPlan:
    index: int
    cluster: Cluster
    ends: tuple[int, int]
    removed: frozenset[int]
    leafy: bool


def _plan_clusters(g: Graph, dec: Decomposition, forest: LinearForest,
                   extra_removed: dict[int, frozenset[int]]) -> list[_ClusterPlan]:
    interior = forest.interior()
    leaves_of: dict[int, list[int]] = {i: [] for i in range(len(dec.clusters))}
    for p in forest.paths:
        for leaf in (p[0], p[-1]):
            leaves_of[dec.cluster_of(leaf)].append(leaf)
    plans = []
    for i, cluster in enumerate(dec.clusters):
        extra = extra_removed.get(i, frozenset())
        ls = sorted(leaves_of[i])
        if len(ls) == 2:
            removed = frozenset((cluster.vertices & interior) | extra)
            plans.append(_ClusterPlan(i, cluster, (ls[0], ls[1]), removed, True))
        elif len(ls) == 0:
            removed = frozenset((cluster.vertices & forest.vertices()) | extra)
            free = set(cluster.vertices) - removed
            pair = _adjacent_free_pair(g, cluster, free)
            if pair is None:
                raise AssemblyFailed(
                    "endpoint-selection",
                    f"cluster {i} has no adjacent endpoint pair outside the forest")
            plans.append(_ClusterPlan(i, cluster, pair, removed, False))
        else:
            raise AssemblyFailed("forest", f"cluster {i} holds {len(ls)} leaves")
    return plans


def _solve_cluster_paths(g: Graph, plans: list[_ClusterPlan], config: RunConfig,
                         seed: int) -> dict[int, tuple[int, ...]]:
    """Hamilton path per cluster; results gathered deterministically by index.

    Leafy clusters have forced ends; leafless ones may fall back to a few
    alternative adjacent endpoint pairs before giving up."""

    def solve(plan: _ClusterPlan) -> tuple[int, ...]:
        req = HamRequest(cluster=plan.cluster, removed=plan.removed, ends=plan.ends)
        try:
            return ham_path(g, req, mode=config.mode, seed=seed + 7919 * plan.index)
        except HamFailed:
            if plan.leafy:
                raise
        free = set(plan.cluster.vertices) - plan.removed
        tried = {plan.ends}
        last: Optional[Exception] = None
        for u in sorted(free):
            for v in sorted(g.neighbors(u)):
                if v <= u or v not in free or (u, v) in tried or len(tried) > 6:
                    continue
                if plan.cluster.kind == NEAR_BIPARTITE and \
                        ((u in plan.cluster.x_side) == (v in plan.cluster.x_side)):
                    continue
                tried.add((u, v))
                req = HamRequest(cluster=plan.cluster, removed=plan.removed, ends=(u, v))
                try:
                    return ham_path(g, req, mode=config.mode, seed=seed + 7919 * plan.index)
                except HamFailed as exc:
                    last = exc
        raise HamFailed(f"all endpoint pairs failed for cluster {plan.index}: {last}")

    if config.threads > 1 and len(plans) > 1:
        with ThreadPoolExecutor(max_workers=config.threads) as pool:
            results = list(pool.map(solve, plans))
    else:
        results = [solve(p) for p in plans]
    return {plan.index: path for plan, path in zip(plans, results)}


def _compose(dec: Decomposition, forest: LinearForest,
             plans: list[_ClusterPlan], ham_paths: dict[int, tuple[int, ...]],
             close: bool) -> list[list[int]]:
    """Stitch cluster Hamilton paths with forest components.

    Leaves carry exactly one forest-path end and one cluster-path end, so the
    junction structure is a disjoint union of closed walks; `close` keeps
    them as cycles (wrap edge implicit), otherwise they are emitted as open
    paths.  Leafless clusters contribute their Hamilton path alone.
    """
    plan_of = {p.index: p for p in plans}
    forest_at: dict[int, tuple[int, int]] = {}  # leaf -> (path index, other end)
    for pi, p in enumerate(forest.paths):
        forest_at[p[0]] = (pi, p[-1])
        forest_at[p[-1]] = (pi, p[0])
    cluster_at: dict[int, tuple[int, int]] = {}  # leaf -> (cluster index, other end)
    for plan in plans:
        if plan.leafy:
            a, b = plan.ends
            cluster_at[a] = (plan.index, b)
            cluster_at[b] = (plan.index, a)

    out: list[list[int]] = []
    done_leaves: set[int] = set()
    for start in sorted(cluster_at):
        if start in done_leaves:
            continue
        seq: list[int] = []
        cur = start
        while True:
            ci, other = cluster_at[cur]
            seg = _orient(ham_paths[ci], cur)
            seq.extend(seg if not seq else seg[1:])
            done_leaves.update((cur, other))
            pi, far_end = forest_at[other]
            fseg = _orient(forest.paths[pi], other)
            if far_end == start:
                seq.extend(fseg[1:-1])
                break
            seq.extend(fseg[1:])
            cur = far_end
        out.append(seq)
    for plan in plans:
        if not plan.leafy:
            out.append(list(ham_paths[plan.index]))
    return out


# ---------------------------------------------------------------------------
# Short-cycle extraction (opt-in exact count)
# ---------------------------------------------------------------------------

def _extract_short_cycles(g: Graph, dec: Decomposition, forest: LinearForest,
                          want: int) -> tuple[list[list[int]], dict[int, frozenset[int]]]:
    """Take `want` short vertex-disjoint cycles out of one cluster.

    In near-bipartite clusters only side-crossing edges are used, so the
    removal keeps the sides balanced."""
    blocked = set(forest.vertices())
    order = sorted(range(len(dec.clusters)),
                   key=lambda i: -(len(dec.clusters[i].vertices - blocked)))
    for ci in order:
        cluster = dec.clusters[ci]
        cross_only = cluster.kind == NEAR_BIPARTITE
        free = set(cluster.vertices) - blocked
        cycles: list[list[int]] = []
        for _ in range(want):
            cyc = _shortest_cycle(g, cluster, free, cross_only)
            if cyc is None:
                break
            cycles.append(cyc)
            free -= set(cyc)
        if len(cycles) == want and len(free) >= 4:
            removed = frozenset(v for c in cycles for v in c)
            return cycles, {ci: removed}
    raise AssemblyFailed("exact-count", f"could not extract {want} short cycles")


def _shortest_cycle(g: Graph, cluster: Cluster, free: set[int],
                    cross_only: bool) -> Optional[list[int]]:
    def edge_ok(u: int, v: int) -> bool:
        if cross_only:
            return (u in cluster.x_side) != (v in cluster.x_side)
        return True

    best: Optional[list[int]] = None
    for u in sorted(free):
        for v in sorted(g.neighbors(u)):
            if v not in free or v <= u or not edge_ok(u, v):
                continue
            # shortest u-v path avoiding the edge itself
            prev = {u: u}
            queue = deque([u])
            while queue:
                a = queue.popleft()
                if a == v:
                    break
                for w in sorted(g.neighbors(a)):
                    if w in prev or w not in free or not edge_ok(a, w):
                        continue
                    if a == u and w == v:
                        continue
                    prev[w] = a
                    queue.append(w)
            if v not in prev:
                continue
            path = [v]
            while path[-1] != u:
                path.append(prev[path[-1]])
            if len(path) >= 3 and (best is None or len(path) < len(best)):
                best = list(reversed(path))
    return best


# ---------------------------------------------------------------------------
# Cycle partition
# ---------------------------------------------------------------------------

def partition_cycles(g: Graph, config: Optional[RunConfig] = None,
                     seed: Optional[int] = None
                     ) -> tuple[CyclePartition, PartitionSummary]:
    config = config or RunConfig()
    seed = config.seed if seed is None else seed
    info = validate_regular(g)
    if float(info.c) < config.c_min:
        log.warning("density %.3f below configured c_min %.3f; best-effort mode",
                    float(info.c), config.c_min)
    l_bound = g.n // (info.d + 1)
    if l_bound < 1:
        raise AssemblyFailed("bound", "floor(n/(d+1)) < 1: nothing to partition into")
    timings: dict[str, float] = {}

    t0 = time.perf_counter()
    ladder = default_ladder(info, **config.ladder_overrides())
    try:
        dec = decompose(g, info, ladder, exact_threshold=config.exact_threshold)
    except (DecompositionFailed, CycleCutError) as exc:
        raise AssemblyFailed("decompose", str(exc)) from exc
    timings["decompose"] = (time.perf_counter() - t0) * 1000

    r = len(dec.clusters)
    s = dec.near_count
    last_exc: Optional[Exception] = None
    for attempt in range(config.assembly_retries):
        strategy = "direct" if attempt == 1 else "flow"
        try:
            cycles = _assemble_cycles(g, dec, info, config, seed + 1000003 * attempt,
                                      l_bound, timings, strategy)
            report = verify_cycle_partition(g, cycles, d=info.d)
            if not report.passed:
                raise AssemblyFailed("verify", "; ".join(report.failures()))
            summary = PartitionSummary(
                n=g.n, d=info.d, l_bound=l_bound, r_clusters=r, s_near=s,
                parts=len(cycles), verified=True, retries=attempt, stage_ms=timings)
            return CyclePartition(cycles=tuple(tuple(c) for c in cycles)), summary
        except (AssemblyFailed, HamFailed, BalancingFailed, MergeFailed, CycleCutError) as exc:
            last_exc = exc
            log.debug("assembly attempt %d failed: %s", attempt, exc)
            if isinstance(exc, TwoMatchingMissing):
                raise
    if isinstance(last_exc, AssemblyFailed):
        raise last_exc
    raise AssemblyFailed("assembly", str(last_exc)) from last_exc


def _assemble_cycles(g: Graph, dec: Decomposition, info, config: RunConfig,
                     seed: int, l_bound: int, timings: dict,
                     strategy: str = "flow") -> list[list[int]]:
    r = len(dec.clusters)
    if r > l_bound + 1:
        raise AssemblyFailed("bound", f"{r} clusters exceed l+1 = {l_bound + 1}")

    if r == l_bound + 1:
        return _assemble_merged_pair(g, dec, config, seed)

    t0 = time.perf_counter()
    forest, report = build_balancing_forest(
        g, dec, seed, xi=config.xi, max_retries=config.max_retries,
        flow_deficit=config.flow_deficit_fraction(), strategy=strategy)
    timings["forest"] = timings.get("forest", 0) + (time.perf_counter() - t0) * 1000
    if not report.all_ok:
        raise AssemblyFailed("forest", f"forest report not clean: {report.to_json_dict()}")

    extra: dict[int, frozenset[int]] = {}
    pre_cycles: list[list[int]] = []
    if config.exact_count:
        plans_probe = _plan_clusters(g, dec, forest, {})
        composite_count = len(_compose(dec, forest, plans_probe,
                                       {p.index: list(p.ends) for p in plans_probe}, True))
        if composite_count < l_bound:
            pre_cycles, extra = _extract_short_cycles(g, dec, forest,
                                                      l_bound - composite_count)

    plans = _plan_clusters(g, dec, forest, extra)
    t0 = time.perf_counter()
    ham_paths = _solve_cluster_paths(g, plans, config, seed)
    timings["hamilton"] = timings.get("hamilton", 0) + (time.perf_counter() - t0) * 1000
    return pre_cycles + _compose(dec, forest, plans, ham_paths, close=True)


def _assemble_merged_pair(g: Graph, dec: Decomposition, config: RunConfig,
                          seed: int) -> list[list[int]]:
    """r = l+1: merge two clusters joined by a 2-matching into one cycle."""
    for cluster in dec.clusters:
        if cluster.kind == NEAR_BIPARTITE and len(cluster.x_side) != len(cluster.y_side):
            raise AssemblyFailed(
                "r-eq-l-plus-1",
                "an imbalanced near-bipartite cluster cannot be spanned without a forest")
    r = len(dec.clusters)
    pair_found = None
    for i in range(r):
        for j in range(i + 1, r):
            mm = find_two_matching(g, dec.clusters[i].vertices, dec.clusters[j].vertices)
            if mm is None:
                continue
            (xi_, xj_), (yi_, yj_) = mm
            ok = True
            for ci, a, b in ((i, xi_, yi_), (j, xj_, yj_)):
                cl = dec.clusters[ci]
                if cl.kind == NEAR_BIPARTITE and ((a in cl.x_side) == (b in cl.x_side)):
                    ok = False
            if ok:
                pair_found = (i, j, mm)
                break
        if pair_found:
            break
    if pair_found is None:
        raise TwoMatchingMissing(
            "no cluster pair admits a usable 2-matching; the construction "
            "guarantees one under the theorem's preconditions")
    i, j, ((xi_, xj_), (yi_, yj_)) = pair_found

    cycles: list[list[int]] = []
    merged_i = ham_path(g, HamRequest(dec.clusters[i], frozenset(), (xi_, yi_)),
                        mode=config.mode, seed=seed + 11 * i)
    merged_j = ham_path(g, HamRequest(dec.clusters[j], frozenset(), (yj_, xj_)),
                        mode=config.mode, seed=seed + 11 * j)
    cycles.append(list(merged_i) + list(merged_j))
    for k, cluster in enumerate(dec.clusters):
        if k in (i, j):
            continue
        pair = _adjacent_free_pair(g, cluster, set(cluster.vertices))
        if pair is None:
            raise AssemblyFailed("endpoint-selection", f"cluster {k} has no usable edge")
        path = ham_path(g, HamRequest(cluster, frozenset(), pair),
                        mode=config.mode, seed=seed + 11 * k)
        cycles.append(list(path))
    return cycles


# ---------------------------------------------------------------------------
# Bipartite path partition
# ---------------------------------------------------------------------------

def partition_paths_bipartite(g: Graph, config: Optional[RunConfig] = None,
                              seed: Optional[int] = None
                              ) -> tuple[PathPartition, PartitionSummary]:
    config = config or RunConfig()
    seed = config.seed if seed is None else seed
    info = validate_regular(g)
    sides = bipartition_of(g)
    if sides is None:
        raise AssemblyFailed("bipartite", "graph is not bipartite")
    if info.d < 1:
        raise AssemblyFailed("bound", "degree must be positive")
    l_bound = g.n // (2 * info.d)
    if l_bound < 1:
        raise AssemblyFailed("bound", "floor(n/(2d)) < 1")
    timings: dict[str, float] = {}

    t0 = time.perf_counter()
    ladder = default_ladder(info, **config.ladder_overrides())
    try:
        dec = decompose(g, info, ladder, bipartition=sides,
                        exact_threshold=config.exact_threshold)
    except (DecompositionFailed, CycleCutError) as exc:
        raise AssemblyFailed("decompose", str(exc)) from exc
    timings["decompose"] = (time.perf_counter() - t0) * 1000

    r = len(dec.clusters)
    s = dec.near_count
    last_exc: Optional[Exception] = None
    for attempt in range(config.assembly_retries):
        strategy = "direct" if attempt == 1 else "flow"
        try:
            paths = _assemble_paths(g, dec, config, seed + 1000003 * attempt,
                                    l_bound, timings, strategy)
            report = verify_path_partition(g, paths, bipartite=True, d=info.d)
            if not report.passed:
                raise AssemblyFailed("verify", "; ".join(report.failures()))
            summary = PartitionSummary(
                n=g.n, d=info.d, l_bound=l_bound, r_clusters=r, s_near=s,
                parts=len(paths), verified=True, retries=attempt, stage_ms=timings)
            return PathPartition(paths=tuple(tuple(p) for p in paths)), summary
        except (AssemblyFailed, HamFailed, BalancingFailed, MergeFailed, CycleCutError) as exc:
            last_exc = exc
            log.debug("path assembly attempt %d failed: %s", attempt, exc)
    if isinstance(last_exc, AssemblyFailed):
        raise last_exc
    raise AssemblyFailed("assembly", str(last_exc)) from last_exc


def _cross_pair(g: Graph, cluster: Cluster, free: set[int]) -> Optional[tuple[int, int]]:
    """Opposite-side endpoint pair inside `free`, preferring an edge."""
    pair = _adjacent_free_pair(g, cluster, free)
    if pair is not None:
        return pair
    xs = sorted(free & cluster.x_side)
    ys = sorted(free & cluster.y_side)
    if xs and ys:
        return xs[0], ys[0]
    return None


def _assemble_paths(g: Graph, dec: Decomposition, config: RunConfig,
                    seed: int, l_bound: int, timings: dict,
                    strategy: str = "flow") -> list[list[int]]:
    r = len(dec.clusters)
    if r > l_bound + 1:
        raise AssemblyFailed("bound", f"{r} clusters exceed l+1 = {l_bound + 1}")
    balanced = all(len(c.x_side) == len(c.y_side) for c in dec.clusters)

    if balanced:
        if r <= l_bound:
            plans = []
            for k, cluster in enumerate(dec.clusters):
                pair = _cross_pair(g, cluster, set(cluster.vertices))
                if pair is None:
                    raise AssemblyFailed("endpoint-selection", f"cluster {k} unusable")
                plans.append(_ClusterPlan(k, cluster, pair, frozenset(), False))
            solved = _solve_cluster_paths(g, plans, config, seed)
            return [list(solved[p.index]) for p in plans]
        return _assemble_paths_joined(g, dec, config, seed)

    t0 = time.perf_counter()
    forest, report = build_balancing_forest(
        g, dec, seed, xi=config.xi, max_retries=config.max_retries,
        flow_deficit=config.flow_deficit_fraction(), strategy=strategy)
    timings["forest"] = timings.get("forest", 0) + (time.perf_counter() - t0) * 1000
    if not report.all_ok:
        raise AssemblyFailed("forest", f"forest report not clean: {report.to_json_dict()}")

    plans = _plan_clusters_paths(g, dec, forest)
    composites = len(_compose(dec, forest, [p for p in plans if p.leafy],
                              {p.index: list(p.ends) for p in plans if p.leafy}, False))
    total = composites + sum(1 for p in plans if not p.leafy)
    if total <= l_bound:
        t0 = time.perf_counter()
        ham_paths = _solve_cluster_paths(g, plans, config, seed)
        timings["hamilton"] = timings.get("hamilton", 0) + (time.perf_counter() - t0) * 1000
        return _compose(dec, forest, plans, ham_paths, close=False)
    # r = l+1 and every component returns to its own cluster: splice along a
    # cross-cluster forest edge
    return _assemble_paths_spliced(g, dec, forest, config, seed)


def _plan_clusters_paths(g: Graph, dec: Decomposition, forest: LinearForest
                         ) -> list[_ClusterPlan]:
    interior = forest.interior()
    leaves_of: dict[int, list[int]] = {i: [] for i in range(len(dec.clusters))}
    for p in forest.paths:
        for leaf in (p[0], p[-1]):
            leaves_of[dec.cluster_of(leaf)].append(leaf)
    plans = []
    for i, cluster in enumerate(dec.clusters):
        ls = sorted(leaves_of[i])
        if len(ls) == 2:
            removed = frozenset(cluster.vertices & interior)
            plans.append(_ClusterPlan(i, cluster, (ls[0], ls[1]), removed, True))
        elif len(ls) == 0:
            removed = frozenset(cluster.vertices & forest.vertices())
            pair = _cross_pair(g, cluster, set(cluster.vertices) - removed)
            if pair is None:
                raise AssemblyFailed("endpoint-selection", f"cluster {i} unusable")
            plans.append(_ClusterPlan(i, cluster, pair, removed, False))
        else:
            raise AssemblyFailed("forest", f"cluster {i} holds {len(ls)} leaves")
    return plans


def _assemble_paths_joined(g: Graph, dec: Decomposition, config: RunConfig,
                           seed: int) -> list[list[int]]:
    """r = l+1, all clusters balanced: join two spanning paths by one edge."""
    order = sorted(range(len(dec.clusters)), key=lambda i: len(dec.clusters[i].vertices))
    join = None
    for ci in order:
        cluster = dec.clusters[ci]
        for u in sorted(cluster.vertices):
            for v in sorted(g.neighbors(u)):
                if v not in cluster.vertices:
                    join = (ci, u, dec.cluster_of(v), v)
                    break
            if join:
                break
        if join:
            break
    if join is None:
        raise AssemblyFailed("r-eq-l-plus-1", "no edge leaves any cluster")
    ci, u, cj, v = join

    def other_end(cluster: Cluster, fixed: int) -> int:
        side = cluster.y_side if fixed in cluster.x_side else cluster.x_side
        cands = sorted(side - {fixed})
        if not cands:
            raise AssemblyFailed("endpoint-selection", "no opposite-side end available")
        return cands[0]

    cl_i, cl_j = dec.clusters[ci], dec.clusters[cj]
    pi = ham_path(g, HamRequest(cl_i, frozenset(), (other_end(cl_i, u), u)),
                  mode=config.mode, seed=seed + 11 * ci)
    pj = ham_path(g, HamRequest(cl_j, frozenset(), (v, other_end(cl_j, v))),
                  mode=config.mode, seed=seed + 11 * cj)
    paths = [list(pi) + list(pj)]
    for k, cluster in enumerate(dec.clusters):
        if k in (ci, cj):
            continue
        pair = _cross_pair(g, cluster, set(cluster.vertices))
        if pair is None:
            raise AssemblyFailed("endpoint-selection", f"cluster {k} unusable")
        paths.append(list(ham_path(g, HamRequest(cluster, frozenset(), pair),
                                   mode=config.mode, seed=seed + 11 * k)))
    return paths


def _assemble_paths_spliced(g: Graph, dec: Decomposition, forest: LinearForest,
                            config: RunConfig, seed: int) -> list[list[int]]:
    """r = l+1, clusters imbalanced, every component's ends in one cluster:
    split one component at a cross-cluster edge and splice the two clusters'
    spanning paths into it."""
    # find a component leaving the cluster that holds its ends
    target = None
    for pidx, comp in enumerate(forest.paths):
        e_cluster = dec.cluster_of(comp[0])
        if dec.cluster_of(comp[-1]) != e_cluster:
            raise AssemblyFailed("splice", "cross-cluster component should have been composed")
        for k in range(len(comp) - 1):
            cu = dec.cluster_of(comp[k])
            cv = dec.cluster_of(comp[k + 1])
            if cu == e_cluster and cv != e_cluster:
                target = (pidx, k, e_cluster, cv)
                break
        if target:
            break
    if target is None:
        raise AssemblyFailed(
            "splice", "no cross-cluster forest edge; clusters should have been balanced")
    pidx, k, ce, cf = target
    comp = forest.paths[pidx]
    u, v = comp[k], comp[k + 1]
    piece_u = list(comp[:k + 1])   # ends: comp[0] .. u
    piece_v = list(comp[k + 1:])   # ends: v .. comp[-1]

    cluster_e = dec.clusters[ce]
    x1, y1 = comp[0], comp[-1]
    w_e = frozenset(cluster_e.vertices & (forest.vertices() - {x1, y1}))
    ham1 = ham_path(g, HamRequest(cluster_e, w_e, (x1, y1)),
                    mode=config.mode, seed=seed + 101)

    # choose x2 in the other cluster: the opposite-side end of its own
    # component when one exists; otherwise the second path runs same-sided
    # (the span is then one vertex heavier on v's side, matching an
    # odd-length alternating path)
    cluster_f = dec.clusters[cf]
    v_in_x = v in cluster_f.x_side
    x2: Optional[int] = None
    q2: Optional[list[int]] = None
    for qidx, q in enumerate(forest.paths):
        if qidx == pidx:
            continue
        if dec.cluster_of(q[0]) == cf and dec.cluster_of(q[-1]) == cf:
            for end in (q[0], q[-1]):
                if (end in cluster_f.x_side) != v_in_x:
                    x2 = end
                    q2 = _orient(q, end)
                    break
            break
    if x2 is None:
        same_side = cluster_f.x_side if v_in_x else cluster_f.y_side
        cands = sorted(same_side - forest.vertices())
        if not cands:
            raise AssemblyFailed("splice", "no free endpoint for the splice")
        x2 = cands[0]
    w_f = frozenset(cluster_f.vertices & (forest.vertices() - {x2, v}))
    ham2 = ham_path(g, HamRequest(cluster_f, w_f, (v, x2)),
                    mode=config.mode, seed=seed + 103)

    # P* = piece_u reversed (u .. x1) + ham1 (x1 .. y1) + piece_v reversed
    # (y1 .. v) + ham2 (v .. x2) + the x2-ended component, if any
    star: list[int] = list(reversed(piece_u))
    star.extend(list(ham1)[1:])
    star.extend(list(reversed(piece_v))[1:])
    star.extend(list(ham2)[1:])
    if q2 is not None:
        star.extend(q2[1:])

    paths = [star]
    for kk, cluster in enumerate(dec.clusters):
        if kk in (ce, cf):
            continue
        removed = frozenset(cluster.vertices & forest.interior())
        leaves = [leaf for p in forest.paths for leaf in (p[0], p[-1])
                  if dec.cluster_of(leaf) == kk]
        if leaves:
            plans = [_ClusterPlan(kk, cluster, (min(leaves), max(leaves)), removed, True)]
            hams = _solve_cluster_paths(g, plans, config, seed + 200 + kk)
            sub_forest = LinearForest(paths=tuple(
                p for p in forest.paths
                if dec.cluster_of(p[0]) == kk and dec.cluster_of(p[-1]) == kk))
            paths.extend(_compose(dec, sub_forest, plans, hams, close=False))
        else:
            pair = _cross_pair(g, cluster, set(cluster.vertices) - forest.vertices())
            if pair is None:
                raise AssemblyFailed("endpoint-selection", f"cluster {kk} unusable")
            removed_all = frozenset(cluster.vertices & forest.vertices())
            paths.append(list(ham_path(g, HamRequest(cluster, removed_all, pair),
                                       mode=config.mode, seed=seed + 200 + kk)))
    return paths
