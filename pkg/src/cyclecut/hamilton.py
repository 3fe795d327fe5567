"""Hamilton paths with prescribed endpoints inside clusters, after removals.

Two engines share a verifier.  The staged engine sets aside a short
absorbing path and a reservoir of well-connected vertices, covers the rest
by a directed cycle factor (loops, or doubled perfect-matching edges when
the cluster is treated bipartitely), merges small cycles by prefactor
rotations, then stitches everything through the reservoir and reinserts
unused reservoir vertices.  The direct engine is rotation-extension search
with restarts, or exact subset DP up to 18 vertices.  Near-bipartite
clusters run the staged engine on their side-crossing edges only.
"""

from __future__ import annotations

import logging
import math
import random
from collections import deque
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

from .decomposer import Cluster, NEAR_BIPARTITE
from .errors import (
    AbsorbFailed,
    ConnectFailed,
    HamFailed,
    InputError,
    NoPerfectMatching,
    ReservoirFailed,
    RotationExhausted,
)
from .graph import Graph

log = logging.getLogger("cyclecut.hamilton")

EXACT_DP_LIMIT = 18

MODE_PAPER = "paper"
MODE_DIRECT = "direct"
MODE_AUTO = "auto"


@dataclass(frozen=True)
class HamRequest:
    """Hamilton path request: span cluster minus removed, ends (x, y).

    For near-bipartite clusters the residual sides must be balanced and the
    ends must lie on opposite sides.
    """

    cluster: Cluster
    removed: frozenset[int]
    ends: tuple[int, int]

    def working(self) -> frozenset[int]:
        return frozenset(self.cluster.vertices - self.removed)

    def validate(self) -> None:
        x, y = self.ends
        work = self.working()
        if x == y or x not in work or y not in work:
            raise InputError(f"ends {self.ends} must be distinct vertices of the working set")
        if self.cluster.kind == NEAR_BIPARTITE:
            xs = self.cluster.x_side - self.removed
            ys = self.cluster.y_side - self.removed
            if (x in xs) != (y in xs):
                if len(xs) != len(ys):
                    raise InputError(
                        f"cross-ended near-bipartite request needs balanced sides "
                        f"({len(xs)} vs {len(ys)})")
            else:
                # same-side ends fit an odd alternating path: that side one heavier
                big, small = (xs, ys) if x in xs else (ys, xs)
                if len(big) != len(small) + 1:
                    raise InputError(
                        f"same-side near-bipartite request needs |side(ends)| = "
                        f"|other| + 1 ({len(xs)} vs {len(ys)})")

    def same_side_ends(self) -> bool:
        if self.cluster.kind != NEAR_BIPARTITE:
            return False
        x, y = self.ends
        return (x in self.cluster.x_side) == (y in self.cluster.x_side)


def check_ham_path(g: Graph, path: Sequence[int], working: Iterable[int],
                   x: int, y: int) -> None:
    """Full validity check run on every returned path."""
    work = set(working)
    if len(path) != len(work) or set(path) != work:
        raise HamFailed(f"path covers {len(set(path))} of {len(work)} vertices",
                        certificate=tuple(path))
    if path[0] != x or path[-1] != y:
        raise HamFailed(f"path ends ({path[0]},{path[-1]}) != requested ({x},{y})",
                        certificate=tuple(path))
    for u, v in zip(path, path[1:]):
        if not g.has_edge(u, v):
            raise HamFailed(f"non-edge ({u},{v}) on path", certificate=tuple(path))


# ---------------------------------------------------------------------------
# Exact subset DP
# ---------------------------------------------------------------------------

def exact_ham_path(g: Graph, working: Iterable[int], x: int, y: int) -> Optional[tuple[int, ...]]:
    """Subset-DP Hamilton path with reconstruction; None when none exists."""
    verts = sorted(set(working))
    m = len(verts)
    if m > EXACT_DP_LIMIT:
        raise InputError(f"exact DP limited to {EXACT_DP_LIMIT} vertices, got {m}")
    idx = {v: i for i, v in enumerate(verts)}
    if x not in idx or y not in idx:
        raise InputError("ends must lie in the working set")
    adj = [0] * m
    for v in verts:
        for w in g.neighbors(v):
            j = idx.get(w)
            if j is not None:
                adj[idx[v]] |= 1 << j
    if m == 1:
        return (x,) if x == y else None
    xi, yi = idx[x], idx[y]
    size = 1 << m
    ends = [0] * size
    start_mask = 1 << xi
    ends[start_mask] = start_mask
    for mask in range(size):
        e = ends[mask]
        if not e or not (mask & start_mask):
            continue
        for u in range(m):
            b = 1 << u
            if mask & b:
                continue
            if adj[u] & e:
                ends[mask | b] |= b
    full = size - 1
    if not (ends[full] >> yi) & 1:
        return None
    # backward reconstruction
    path = [yi]
    mask = full
    cur = yi
    while mask != start_mask:
        prev_mask = mask ^ (1 << cur)
        cand = ends[prev_mask] & adj[cur]
        if not cand:
            return None  # defensive; cannot happen when DP is consistent
        pi = (cand & -cand).bit_length() - 1
        path.append(pi)
        mask = prev_mask
        cur = pi
    path.reverse()
    return tuple(verts[i] for i in path)


# ---------------------------------------------------------------------------
# Rotation-extension (Posa) search
# ---------------------------------------------------------------------------

def _posa_cycle(adj: dict[int, frozenset[int]], verts: list[int], start: int,
                rng: random.Random, restarts: int = 24) -> Optional[list[int]]:
    """Hamilton cycle via rotation-extension with a fixed starting vertex.

    Returns vertex order of the cycle (closing edge implicit) or None.
    """
    n = len(verts)
    budget = 40 * n + 200
    for _ in range(restarts):
        path = [start]
        pos = {start: 0}
        steps = 0
        while steps < budget:
            steps += 1
            tip = path[-1]
            ext = sorted(w for w in adj[tip] if w not in pos)
            if ext:
                w = ext[rng.randrange(len(ext))]
                pos[w] = len(path)
                path.append(w)
                continue
            if len(path) == n and path[0] in adj[tip]:
                return path
            # rotate: tip--path[i] edge reverses the suffix after i
            pivots = sorted(pos[w] for w in adj[tip] if w in pos and pos[w] < len(path) - 2)
            if not pivots:
                break
            i = pivots[rng.randrange(len(pivots))]
            path[i + 1:] = reversed(path[i + 1:])
            for k in range(i + 1, len(path)):
                pos[path[k]] = k
    return None


def posa_ham_path(g: Graph, working: Iterable[int], x: int, y: int,
                  rng: random.Random,
                  edge_ok=None, restarts: int = 24) -> Optional[tuple[int, ...]]:
    """Hamilton path with both ends fixed, via a virtual vertex adjacent to
    exactly x and y and a Hamilton-cycle search started there."""
    verts = sorted(set(working))
    virtual = -1
    adj: dict[int, frozenset[int]] = {}
    vset = set(verts)
    for v in verts:
        nbrs = {w for w in g.neighbors(v) if w in vset and (edge_ok is None or edge_ok(v, w))}
        if v in (x, y):
            nbrs.add(virtual)
        adj[v] = frozenset(nbrs)
    adj[virtual] = frozenset({x, y})
    cycle = _posa_cycle(adj, verts + [virtual], virtual, rng, restarts=restarts)
    if cycle is None:
        return None
    k = cycle.index(virtual)
    order = cycle[k + 1:] + cycle[:k]
    if order[0] == y:
        order.reverse()
    return tuple(order)


# ---------------------------------------------------------------------------
# Reservoir
# ---------------------------------------------------------------------------

def select_reservoir(
    g: Graph,
    working: Iterable[int],
    excluded: Iterable[int],
    seed: int,
    zeta: float,
    bipartition: Optional[tuple[frozenset[int], frozenset[int]]] = None,
) -> frozenset[int]:
    """Small hub set giving short internal detours between any vertex pair.

    Hubs are sampled until every working vertex sees at least log(n) of
    them (side-balanced when bipartite), then joined into one connected
    piece by short internally-disjoint paths.
    """
    n = g.n
    work = set(working)
    pool = sorted(work - set(excluded))
    level = max(2, math.ceil(math.log(max(n, 3))))
    rng = random.Random(seed)
    if bipartition is not None:
        side_x = [v for v in pool if v in bipartition[0]]
        side_y = [v for v in pool if v in bipartition[1]]

    h = max(4, min(2 * level, len(pool)))
    hubs: Optional[list[int]] = None
    while True:
        if bipartition is not None:
            half = h // 2
            if half > min(len(side_x), len(side_y)):
                raise ReservoirFailed(
                    f"cannot draw {half} balanced hubs from sides of sizes "
                    f"{len(side_x)}/{len(side_y)}")
            cand = sorted(rng.sample(side_x, half) + rng.sample(side_y, half))
        else:
            if h > len(pool):
                raise ReservoirFailed(f"need {h} hubs but only {len(pool)} candidates")
            cand = sorted(rng.sample(pool, h))
        need = min(level, len(cand))
        if all(sum(1 for w in g.neighbors(v) if w in cand) >= need
               for v in work if v not in cand):
            hubs = cand
            break
        if h >= len(pool):
            raise ReservoirFailed(
                f"no hub set of size <= {len(pool)} covers every working vertex "
                f"{need} times")
        h = min(len(pool), h + level)

    reservoir = set(hubs)
    # join the hub components by short internally disjoint paths
    comps = g.components(reservoir)
    guard = len(hubs) + 4
    while len(comps) > 1 and guard > 0:
        guard -= 1
        a = min(comps[0])
        joined = False
        for comp in comps[1:]:
            for b in sorted(comp):
                from .forest import short_connect
                from .errors import Disconnected

                try:
                    path = short_connect(
                        g, work, a, b,
                        forbidden=(reservoir | set(excluded)) - {a, b}, zeta=zeta)
                except Disconnected:
                    continue
                reservoir.update(path)
                joined = True
                break
            if joined:
                break
        if not joined:
            raise ReservoirFailed("could not join hub components inside the working set")
        comps = g.components(reservoir)
    if len(comps) > 1:
        raise ReservoirFailed("hub set remained disconnected")
    if bipartition is not None:
        in_x = sum(1 for v in reservoir if v in bipartition[0])
        in_y = len(reservoir) - in_x
        # pad the smaller side with neighbours of the reservoir
        while in_x != in_y:
            small = bipartition[0] if in_x < in_y else bipartition[1]
            cand = sorted(w for v in reservoir for w in g.neighbors(v)
                          if w in small and w in work and w not in reservoir
                          and w not in set(excluded))
            if not cand:
                raise ReservoirFailed("cannot side-balance the reservoir")
            reservoir.add(cand[0])
            in_x = sum(1 for v in reservoir if v in bipartition[0])
            in_y = len(reservoir) - in_x
    target = math.ceil(math.log(max(n, 3))) ** 3
    if len(reservoir) > max(target, len(work) // 2):
        log.warning("reservoir size %d exceeds target %d", len(reservoir), target)
    return frozenset(reservoir)


# ---------------------------------------------------------------------------
# Cycle factors
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CycleFactor:
    """Directed cycle factor: every vertex has in- and out-degree one.

    Loops (succ[v] == v) and 2-cycles are allowed before reduction.
    """

    succ: dict[int, int]

    def components(self) -> list[list[int]]:
        seen: set[int] = set()
        comps = []
        for v in sorted(self.succ):
            if v in seen:
                continue
            cyc = [v]
            seen.add(v)
            w = self.succ[v]
            while w != v:
                cyc.append(w)
                seen.add(w)
                w = self.succ[w]
            comps.append(cyc)
        return comps

    def validate(self, g: Graph, bipartite: bool) -> None:
        indeg: dict[int, int] = {}
        for w in self.succ.values():
            indeg[w] = indeg.get(w, 0) + 1
        if any(c != 1 for c in indeg.values()) or set(indeg) != set(self.succ):
            raise InputError("factor is not in/out-degree one")
        for v, w in self.succ.items():
            if v == w:
                if bipartite:
                    raise InputError("loops are not allowed in bipartite factors")
            elif not g.has_edge(v, w):
                raise InputError(f"factor arc ({v},{w}) is not a graph edge")


def initial_cycle_factor(
    g: Graph,
    working: Iterable[int],
    bipartition: Optional[tuple[frozenset[int], frozenset[int]]] = None,
) -> CycleFactor:
    """All loops, or a perfect matching doubled into 2-cycles when bipartite."""
    work = sorted(set(working))
    if bipartition is None:
        return CycleFactor(succ={v: v for v in work})
    xs = sorted(v for v in work if v in bipartition[0])
    ys_set = {v for v in work if v in bipartition[1]}
    if len(xs) != len(ys_set):
        raise InputError(f"bipartite factor needs equal sides, got {len(xs)}/{len(ys_set)}")
    match_of_y: dict[int, int] = {}
    match_of_x: dict[int, int] = {}

    def try_augment(x: int, visited: set[int]) -> bool:
        for y in sorted(g.neighbors(x)):
            if y not in ys_set or y in visited:
                continue
            visited.add(y)
            if y not in match_of_y or try_augment(match_of_y[y], visited):
                match_of_y[y] = x
                match_of_x[x] = y
                return True
        return False

    for x in xs:
        if not try_augment(x, set()):
            # Hall violator: x plus X-vertices reachable by alternating paths
            violator = {x}
            frontier = {x}
            nbhd: set[int] = set()
            while frontier:
                nxt: set[int] = set()
                for u in frontier:
                    for y in g.neighbors(u):
                        if y in ys_set and y not in nbhd:
                            nbhd.add(y)
                            if y in match_of_y and match_of_y[y] not in violator:
                                violator.add(match_of_y[y])
                                nxt.add(match_of_y[y])
                frontier = nxt
            raise NoPerfectMatching(
                f"no perfect matching: |N(S)|={len(nbhd)} < |S|={len(violator)}",
                hall_violator=frozenset(violator))
    succ: dict[int, int] = {}
    for x, y in match_of_x.items():
        succ[x] = y
        succ[y] = x
    return CycleFactor(succ=succ)


def reduce_cycle_factor(
    g: Graph,
    factor: CycleFactor,
    min_size: int,
    bipartition: Optional[tuple[frozenset[int], frozenset[int]]] = None,
    edge_ok=None,
) -> CycleFactor:
    """Merge components below min_size by pivot rotations until none remain.

    Opening the arc into a root vertex of a small component yields a
    prefactor (a directed root-to-pivot path plus disjoint cycles); each
    rotation redirects the pivot's new out-arc onto a graph neighbour
    outside the path's guard zones, and the search closes the path back to
    the root once that strictly lowers the number of small components.
    """
    succ = dict(factor.succ)
    m = len(succ)

    def comps_of(s: dict[int, int]) -> list[list[int]]:
        return CycleFactor(succ=s).components()

    def small_count(s: dict[int, int]) -> int:
        return sum(1 for c in comps_of(s) if len(c) < min_size)

    def neighbors(v: int):
        for w in sorted(g.neighbors(v)):
            if w in succ and (edge_ok is None or edge_ok(v, w)):
                yield w

    while True:
        comps = comps_of(succ)
        smalls = [c for c in comps if len(c) < min_size]
        if not smalls:
            cf = CycleFactor(succ=succ)
            return cf
        current_smalls = len(smalls)
        root = min(min(smalls, key=lambda c: (len(c), min(c))))
        pred = {w: v for v, w in succ.items()}

        # state per pivot: (succ-map, pred-map) of its witness prefactor
        base_succ = dict(succ)
        first_pivot = pred[root]
        del base_succ[first_pivot]
        states: dict[int, tuple[dict[int, int], dict[int, int]]] = {
            first_pivot: (base_succ, {w: v for v, w in base_succ.items()})}
        queue = deque([first_pivot])
        closed: Optional[dict[int, int]] = None
        while queue and closed is None:
            pivot = queue.popleft()
            psucc, ppred = states[pivot]
            # root path: root -> ... -> pivot
            path = [root]
            while path[-1] in psucc:
                path.append(psucc[path[-1]])
            guard = min(math.ceil(m / 8), len(path) // 3)
            path_pos = {v: i for i, v in enumerate(path)}
            if root in set(neighbors(pivot)):
                cand = dict(psucc)
                cand[pivot] = root
                if small_count(cand) < current_smalls:
                    closed = cand
                    break
            for x in neighbors(pivot):
                if x == root:
                    continue
                i = path_pos.get(x)
                if i is not None and (i < guard or i > len(path) - 1 - guard):
                    continue
                new_pivot = ppred[x]
                if new_pivot in states:
                    continue
                nsucc = dict(psucc)
                npred = dict(ppred)
                del nsucc[new_pivot]
                nsucc[pivot] = x
                npred[x] = pivot
                states[new_pivot] = (nsucc, npred)
                queue.append(new_pivot)
        if closed is None:
            raise RotationExhausted(
                f"could not merge a component of size {len(smalls[0])} "
                f"(min_size={min_size}, {len(states)} pivots explored)")
        succ = closed


# ---------------------------------------------------------------------------
# Connect and absorb
# ---------------------------------------------------------------------------

def _bfs_connector(g: Graph, a: int, b: int, interior_pool: set[int],
                   edge_ok=None) -> Optional[list[int]]:
    """Shortest a-b path whose interior lies in interior_pool."""
    if b in g.neighbors(a) and (edge_ok is None or edge_ok(a, b)):
        return [a, b]
    prev = {a: a}
    queue = deque([a])
    while queue:
        u = queue.popleft()
        for w in sorted(g.neighbors(u)):
            if w in prev:
                continue
            if edge_ok is not None and not edge_ok(u, w):
                continue
            if w == b:
                prev[w] = u
                path = [b]
                while path[-1] != a:
                    path.append(prev[path[-1]])
                path.reverse()
                return path
            if w in interior_pool and (u == a or u in interior_pool):
                prev[w] = u
                queue.append(w)
    return None


def connect_and_absorb(
    g: Graph,
    working: Iterable[int],
    factor: CycleFactor,
    reservoir: Iterable[int],
    q_path: Sequence[int],
    ends: tuple[int, int],
    bipartition: Optional[tuple[frozenset[int], frozenset[int]]] = None,
    edge_ok=None,
) -> tuple[int, ...]:
    """Stitch the absorbing path and the factor's paths through the reservoir,
    then reinsert unused reservoir vertices; returns a path with the given ends."""
    x_star, y_star = ends
    work = set(working)
    avail = set(reservoir)

    # break every cycle into a path; bipartite paths start on the X side
    segments: list[list[int]] = []
    for comp in factor.components():
        if len(comp) == 1:
            segments.append([comp[0]])
            continue
        if len(comp) == 2:
            if bipartition is not None and comp[0] not in bipartition[0]:
                segments.append([comp[1], comp[0]])
            else:
                segments.append(sorted(comp) if bipartition is None else list(comp))
            continue
        if bipartition is not None:
            starts = [i for i, v in enumerate(comp) if v in bipartition[0]]
            i0 = min(starts, key=lambda i: comp[i])
        else:
            i0 = comp.index(min(comp))
        segments.append(comp[i0:] + comp[:i0])
    segments.sort(key=lambda s: s[0])

    q = list(q_path)
    if bipartition is not None and q and q[0] not in bipartition[0]:
        q.reverse()

    # ordering: y* | connector | Q | connector | P_1 | connector | ... | x*
    pieces: list[list[int]] = [q] + segments
    path: list[int] = [y_star]
    for piece in pieces:
        conn = _bfs_connector(g, path[-1], piece[0], avail, edge_ok=edge_ok)
        if conn is None:
            raise ConnectFailed(
                f"no reservoir connector from {path[-1]} to {piece[0]} "
                f"({len(avail)} reservoir vertices left)")
        for v in conn[1:-1]:
            avail.discard(v)
        path.extend(conn[1:-1])
        path.extend(piece)
    conn = _bfs_connector(g, path[-1], x_star, avail, edge_ok=edge_ok)
    if conn is None:
        raise ConnectFailed(f"no reservoir connector from {path[-1]} to {x_star}")
    for v in conn[1:-1]:
        avail.discard(v)
    path.extend(conn[1:-1])
    path.append(x_star)

    leftover = work - set(path)
    if not leftover <= set(reservoir):
        raise ConnectFailed("uncovered vertices outside the reservoir")
    path = _absorb(g, path, leftover, bipartition, edge_ok)
    path.reverse()  # ends (x*, y*)
    return tuple(path)


def _absorb(g: Graph, path: list[int], leftover: set[int],
            bipartition, edge_ok) -> list[int]:
    def slot_ok(p: int, w: int, q: int) -> bool:
        if not (g.has_edge(p, w) and g.has_edge(w, q)):
            return False
        if edge_ok is not None and not (edge_ok(p, w) and edge_ok(w, q)):
            return False
        return True

    if bipartition is None:
        for w in sorted(leftover):
            placed = False
            for i in range(len(path) - 1):
                if slot_ok(path[i], w, path[i + 1]):
                    path.insert(i + 1, w)
                    placed = True
                    break
            if not placed:
                raise AbsorbFailed(f"no reinsertion slot for leftover vertex {w}")
        return path

    left_x = sorted(v for v in leftover if v in bipartition[0])
    left_y = sorted(v for v in leftover if v in bipartition[1])
    if len(left_x) != len(left_y):
        raise AbsorbFailed(
            f"bipartite leftover is side-imbalanced ({len(left_x)}/{len(left_y)})")
    while left_x:
        placed = False
        for xl in list(left_x):
            for yl in list(left_y):
                if not g.has_edge(xl, yl):
                    continue
                if edge_ok is not None and not edge_ok(xl, yl):
                    continue
                for i in range(len(path) - 1):
                    p, qv = path[i], path[i + 1]
                    if p in bipartition[0] and slot_ok(p, yl, xl) and g.has_edge(xl, qv):
                        if edge_ok is None or edge_ok(xl, qv):
                            path[i + 1:i + 1] = [yl, xl]
                            placed = True
                            break
                    if p in bipartition[1] and slot_ok(p, xl, yl) and g.has_edge(yl, qv):
                        if edge_ok is None or edge_ok(yl, qv):
                            path[i + 1:i + 1] = [xl, yl]
                            placed = True
                            break
                if placed:
                    left_x.remove(xl)
                    left_y.remove(yl)
                    break
            if placed:
                break
        if not placed:
            raise AbsorbFailed(
                f"no reinsertion slot for leftover pair among {left_x}/{left_y}")
    return path


# ---------------------------------------------------------------------------
# The staged pipeline and the mode dispatcher
# ---------------------------------------------------------------------------

def _pick_absorbing_path(g: Graph, candidates: list[int], rng: random.Random,
                         bipartition, edge_ok) -> Optional[list[int]]:
    """A short path among the candidates, cross-ended when bipartite."""
    sample_target = 4
    for _ in range(20):
        if len(candidates) < 2:
            return None
        if bipartition is not None:
            xs = [v for v in candidates if v in bipartition[0]]
            ys = [v for v in candidates if v in bipartition[1]]
            if not xs or not ys:
                return None
            k = min(sample_target // 2, len(xs), len(ys))
            sample = rng.sample(xs, k) + rng.sample(ys, k)
        else:
            sample = rng.sample(candidates, min(sample_target, len(candidates)))
        sub = sorted(sample)
        pairs = [(a, b) for a in sub for b in sub if a < b]
        rng.shuffle(pairs)
        for a, b in pairs:
            if bipartition is not None and ((a in bipartition[0]) == (b in bipartition[0])):
                continue
            sg = _filtered_subgraph(g, sub, edge_ok)
            found = exact_ham_path(sg, sub, a, b)
            if found is not None:
                return list(found)
        # fall back to a single edge
        u = rng.choice(candidates)
        nbrs = [w for w in g.neighbors(u) if w in candidates
                and (edge_ok is None or edge_ok(u, w))
                and (bipartition is None or (u in bipartition[0]) != (w in bipartition[0]))]
        if nbrs:
            return [u, min(nbrs)]
    return None


def _filtered_subgraph(g: Graph, vertices: list[int], edge_ok) -> Graph:
    vs = set(vertices)
    edges = [(u, v) for u in vs for v in g.neighbors(u)
             if u < v and v in vs and (edge_ok is None or edge_ok(u, v))]
    return Graph(g.n, edges)


def _paper_ham_path(g: Graph, working: frozenset[int], x: int, y: int,
                    bipartition, edge_ok, zeta: float,
                    rng: random.Random) -> tuple[int, ...]:
    work = sorted(working)
    m = len(work)
    if m < 10:
        raise HamFailed(f"staged engine needs a larger working set than {m}")
    candidates = [v for v in work if v not in (x, y)]
    q = _pick_absorbing_path(g, candidates, rng, bipartition, edge_ok)
    if q is None:
        raise HamFailed("could not place an absorbing path")
    h4 = set(work) - set(q[1:-1])
    reservoir = select_reservoir(
        g if edge_ok is None else _filtered_subgraph(g, work, edge_ok),
        h4, excluded={q[0], q[-1], x, y}, seed=rng.randrange(1 << 30),
        zeta=zeta, bipartition=bipartition)
    h5 = h4 - set(reservoir) - {q[0], q[-1], x, y}
    if h5:
        factor = initial_cycle_factor(
            g if edge_ok is None else _filtered_subgraph(g, sorted(h5), edge_ok),
            h5, bipartition=bipartition)
        min_size = max(4, math.ceil(len(h5) / 8))
        while True:
            try:
                factor = reduce_cycle_factor(g, factor, min_size,
                                             bipartition=bipartition, edge_ok=edge_ok)
                break
            except RotationExhausted:
                min_size //= 2
                if min_size < 3:
                    raise
    else:
        factor = CycleFactor(succ={})
    path = connect_and_absorb(g, working, factor, reservoir, q, (x, y),
                              bipartition=bipartition, edge_ok=edge_ok)
    return path


def ham_path(g: Graph, req: HamRequest, mode: str = MODE_AUTO, seed: int = 0) -> tuple[int, ...]:
    """Hamilton path on cluster minus removed with the requested ends.

    Modes: "paper" (staged engine), "direct" (exact DP up to 18 vertices,
    else rotation-extension), "auto" (direct for small, staged with direct
    fallback for large).  Every returned path is re-verified.
    """
    req.validate()
    mode = mode.lower()
    if mode not in (MODE_PAPER, MODE_DIRECT, MODE_AUTO):
        raise InputError(f"unknown mode {mode!r}")
    working = req.working()
    x, y = req.ends
    m = len(working)
    rng = random.Random(seed)

    bipartition = None
    edge_ok = None
    same_side = req.same_side_ends()
    if req.cluster.kind == NEAR_BIPARTITE and not same_side:
        xs = frozenset(req.cluster.x_side & working)
        ys = frozenset(req.cluster.y_side & working)
        if x not in xs:
            x, y = y, x
        bipartition = (xs, ys)
        sides = req.cluster.x_side

        def edge_ok(u, v, _sides=sides):
            return (u in _sides) != (v in _sides)

    def run_direct() -> tuple[int, ...]:
        if m <= EXACT_DP_LIMIT:
            found = exact_ham_path(g, working, x, y)
            if found is None:
                raise HamFailed(f"no Hamilton path from {x} to {y} on {m} vertices")
            return found
        found = posa_ham_path(g, working, x, y, rng)
        if found is None:
            raise HamFailed(f"rotation search failed on {m} vertices")
        return found

    def run_paper() -> tuple[int, ...]:
        zeta = 0.2
        last: Optional[Exception] = None
        for _ in range(3):
            try:
                return _paper_ham_path(g, working, x, y, bipartition, edge_ok, zeta, rng)
            except (HamFailed, ReservoirFailed, NoPerfectMatching,
                    RotationExhausted, ConnectFailed, AbsorbFailed, InputError) as exc:
                last = exc
        raise HamFailed(f"staged engine failed: {last}") from last

    if mode == MODE_DIRECT or (same_side and mode == MODE_AUTO):
        path = run_direct()
    elif mode == MODE_PAPER:
        if same_side:
            raise HamFailed("the staged engine only handles cross-ended bipartite requests")
        path = run_paper()
    else:
        if m <= EXACT_DP_LIMIT:
            path = run_direct()
        else:
            try:
                path = run_paper()
            except HamFailed:
                path = run_direct()

    if path[0] != req.ends[0]:
        path = tuple(reversed(path))
    check_ham_path(g, path, working, req.ends[0], req.ends[1])
    return path


def prefactor_dot(succ: dict[int, int], root: int, pivot: int) -> str:
    """DOT dump of a prefactor's arcs, for debugging rotation trees."""
    lines = ["digraph prefactor {"]
    lines.append(f'  {root} [shape=doublecircle];')
    lines.append(f'  {pivot} [shape=diamond];')
    for v, w in sorted(succ.items()):
        lines.append(f"  {v} -> {w};")
    lines.append("}")
    return "\n".join(lines)
