"""Undirected simple graphs, regularity checks, generators and cut utilities.

Vertices are integers ``0..n-1``.  Graphs are immutable after construction,
so they are safe to share across threads.  Sparsity values are exact
rationals (:class:`fractions.Fraction`): cut decisions downstream compare
against rational thresholds and must not depend on float rounding.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Optional, Sequence

import numpy as np

from .errors import EmptySide, GenerationFailed, InputError, NotRegular, SizeTooSmall


class Graph:
    """Adjacency-set representation of an undirected simple graph."""

    __slots__ = ("n", "_adj", "_masks")

    def __init__(self, n: int, edges: Iterable[tuple[int, int]]):
        if n < 1:
            raise InputError("graph needs at least one vertex")
        adj: list[set[int]] = [set() for _ in range(n)]
        for u, v in edges:
            if not (0 <= u < n and 0 <= v < n):
                raise InputError(f"edge ({u},{v}) out of range for n={n}")
            if u == v:
                raise InputError(f"self-loop at vertex {u}")
            adj[u].add(v)
            adj[v].add(u)
        self.n = n
        self._adj: tuple[frozenset[int], ...] = tuple(frozenset(s) for s in adj)
        self._masks: Optional[tuple[int, ...]] = None

    # -- basic queries -------------------------------------------------------

    def neighbors(self, v: int) -> frozenset[int]:
        return self._adj[v]

    def degree(self, v: int) -> int:
        return len(self._adj[v])

    def has_edge(self, u: int, v: int) -> bool:
        return v in self._adj[u]

    def edges(self) -> Iterator[tuple[int, int]]:
        for u in range(self.n):
            for v in self._adj[u]:
                if u < v:
                    yield (u, v)

    def edge_count(self) -> int:
        return sum(len(s) for s in self._adj) // 2

    def adjacency_masks(self) -> tuple[int, ...]:
        """Neighbour sets as bitmasks, for subset-DP style algorithms."""
        if self._masks is None:
            masks = []
            for v in range(self.n):
                m = 0
                for u in self._adj[v]:
                    m |= 1 << u
                masks.append(m)
            self._masks = tuple(masks)
        return self._masks

    def edges_within(self, vertices: Iterable[int]) -> int:
        vs = set(vertices)
        return sum(1 for u in vs for v in self._adj[u] if v in vs and u < v)

    def edges_between(self, xs: Iterable[int], ys: Iterable[int]) -> int:
        yset = set(ys)
        return sum(1 for u in xs for v in self._adj[u] if v in yset)

    def components(self, subset: Optional[Iterable[int]] = None) -> list[frozenset[int]]:
        """Connected components of the induced subgraph (whole graph by default)."""
        allowed = set(range(self.n)) if subset is None else set(subset)
        seen: set[int] = set()
        comps = []
        for start in sorted(allowed):
            if start in seen:
                continue
            stack = [start]
            comp = {start}
            seen.add(start)
            while stack:
                u = stack.pop()
                for w in self._adj[u]:
                    if w in allowed and w not in comp:
                        comp.add(w)
                        seen.add(w)
                        stack.append(w)
            comps.append(frozenset(comp))
        return comps

    # -- serialization ---------------------------------------------------------

    def to_json_dict(self) -> dict:
        return {"n": self.n, "edges": [list(e) for e in sorted(self.edges())]}

    @classmethod
    def from_json_dict(cls, data: dict) -> "Graph":
        try:
            n = int(data["n"])
            edges = [(int(u), int(v)) for u, v in data["edges"]]
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"bad graph JSON: {exc}") from exc
        return cls(n, edges)

    def to_dot(self) -> str:
        lines = ["graph G {"]
        for v in range(self.n):
            lines.append(f"  {v};")
        for u, v in sorted(self.edges()):
            lines.append(f"  {u} -- {v};")
        lines.append("}")
        return "\n".join(lines)

    def __eq__(self, other) -> bool:
        return isinstance(other, Graph) and self.n == other.n and self._adj == other._adj

    def __hash__(self) -> int:
        return hash((self.n, self._adj))

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, m={self.edge_count()})"


@dataclass(frozen=True)
class RegularityInfo:
    """Common degree d and density ratio c = d/n of a regular graph."""

    d: int
    c: Fraction


@dataclass(frozen=True)
class Cut:
    """A bipartition {X, Y} of some vertex set, with its exact sparsity."""

    x: frozenset[int]
    y: frozenset[int]
    sparsity: Fraction


def validate_regular(g: Graph) -> RegularityInfo:
    """Return (d, c) if every vertex has the same degree, else raise NotRegular."""
    d = g.degree(0)
    for v in range(1, g.n):
        if g.degree(v) != d:
            raise NotRegular(0, d, v, g.degree(v))
    return RegularityInfo(d=d, c=Fraction(d, g.n))


# ---------------------------------------------------------------------------
# Generators
# ---------------------------------------------------------------------------

def gen_clique_union(sizes: Sequence[int]) -> Graph:
    """Disjoint union of complete graphs, one block per entry, blocks contiguous."""
    if not sizes:
        raise InputError("need at least one block size")
    for s in sizes:
        if s < 2:
            raise SizeTooSmall(f"clique size {s} < 2")
    n = sum(sizes)
    edges = []
    base = 0
    for s in sizes:
        for i in range(base, base + s):
            for j in range(i + 1, base + s):
                edges.append((i, j))
        base += s
    return Graph(n, edges)


def gen_bipartite_union(k: int, d: int) -> Graph:
    """k disjoint copies of the complete bipartite graph K_{d,d}."""
    if k < 1 or d < 1:
        raise InputError(f"need k >= 1 and d >= 1, got k={k}, d={d}")
    edges = []
    for block in range(k):
        base = 2 * d * block
        for i in range(d):
            for j in range(d):
                edges.append((base + i, base + d + j))
    return Graph(2 * d * k, edges)


def gen_petersen() -> Graph:
    """The Petersen graph: outer 5-cycle, inner pentagram, spokes."""
    edges = []
    for i in range(5):
        edges.append((i, (i + 1) % 5))          # outer cycle
        edges.append((5 + i, 5 + (i + 2) % 5))  # inner pentagram
        edges.append((i, 5 + i))                # spokes
    return Graph(10, edges)


def gen_random_regular(n: int, d: int, seed: int) -> Graph:
    """Random simple d-regular graph via the pairing model.

    Stub pairing with per-round retry of clashing stubs (the standard
    library approach), full restart on a dead end, capped at 10*n restarts;
    after that a double-edge-swap repair frees the remaining stubs.
    Deterministic for a fixed seed.
    """
    if n * d % 2 != 0:
        raise InputError(f"n*d must be even, got n={n}, d={d}")
    if not 0 <= d < n:
        raise InputError(f"need 0 <= d < n, got n={n}, d={d}")
    if d == 0:
        if n == 1:
            return Graph(1, [])
        raise InputError("d=0 only supported for n=1")
    rng = random.Random(seed)

    def try_pairing() -> Optional[set[tuple[int, int]]]:
        edges: set[tuple[int, int]] = set()
        stubs = list(range(n)) * d
        while stubs:
            clashes: dict[int, int] = {}
            rng.shuffle(stubs)
            it = iter(stubs)
            for s1, s2 in zip(it, it):
                if s1 > s2:
                    s1, s2 = s2, s1
                if s1 != s2 and (s1, s2) not in edges:
                    edges.add((s1, s2))
                else:
                    clashes[s1] = clashes.get(s1, 0) + 1
                    clashes[s2] = clashes.get(s2, 0) + 1
            if not clashes:
                return edges
            # dead end: no pair of clashing stubs can ever be joined
            stuck = True
            items = list(clashes)
            for i, a in enumerate(items):
                for b in items[i:]:
                    u, v = min(a, b), max(a, b)
                    if u != v and (u, v) not in edges:
                        stuck = False
                        break
                if not stuck:
                    break
            if stuck:
                return None
            stubs = [v for v, cnt in clashes.items() for _ in range(cnt)]
        return edges

    for _ in range(10 * n):
        edges = try_pairing()
        if edges is not None:
            return Graph(n, edges)

    # edge-swap repair: greedily pair what we can, then free blocked stubs by
    # swapping with existing edges ((a,b),(s1,s2) -> (a,s1),(b,s2))
    edges = set()
    deficit = {v: d for v in range(n)}
    order = list(range(n))
    rng.shuffle(order)
    for u in order:
        for v in sorted(range(n), key=lambda x: (-deficit[x], x)):
            if deficit[u] == 0:
                break
            if u != v and deficit[v] > 0 and (min(u, v), max(u, v)) not in edges:
                edges.add((min(u, v), max(u, v)))
                deficit[u] -= 1
                deficit[v] -= 1
    for _ in range(100 * n):
        short = [v for v, c in deficit.items() if c > 0]
        if not short:
            return Graph(n, edges)
        s1 = rng.choice(short)
        s2 = rng.choice(short)
        pool = list(edges)
        a, b = pool[rng.randrange(len(pool))]
        if len({s1, s2, a, b}) == 4:
            e1 = (min(a, s1), max(a, s1))
            e2 = (min(b, s2), max(b, s2))
            if e1 not in edges and e2 not in edges:
                edges.remove((a, b))
                edges.add(e1)
                edges.add(e2)
                deficit[s1] -= 1
                deficit[s2] -= 1
    raise GenerationFailed(f"could not realize a simple {d}-regular graph on {n} vertices")


# ---------------------------------------------------------------------------
# Cuts
# ---------------------------------------------------------------------------

def cut_sparsity(g: Graph, xs: Iterable[int], ys: Iterable[int]) -> Fraction:
    """e(X,Y) / (|X|*|Y|) as an exact rational."""
    xset, yset = set(xs), set(ys)
    if not xset or not yset:
        raise EmptySide("cut sides must be nonempty")
    if xset & yset:
        raise InputError("cut sides must be disjoint")
    return Fraction(g.edges_between(xset, yset), len(xset) * len(yset))


def bipartition_of(g: Graph) -> Optional[tuple[frozenset[int], frozenset[int]]]:
    """2-coloring of g, or None if an odd cycle exists.

    Vertices of one-vertex components land on the first side.
    """
    color = [-1] * g.n
    for start in range(g.n):
        if color[start] != -1:
            continue
        color[start] = 0
        stack = [start]
        while stack:
            u = stack.pop()
            for v in g.neighbors(u):
                if color[v] == -1:
                    color[v] = 1 - color[u]
                    stack.append(v)
                elif color[v] == color[u]:
                    return None
    xs = frozenset(v for v in range(g.n) if color[v] == 0)
    ys = frozenset(v for v in range(g.n) if color[v] == 1)
    return xs, ys


def _induced_edge_table(g: Graph, vertices: Sequence[int]) -> np.ndarray:
    """edge_table[mask] = number of edges inside the subset of `vertices` coded
    by `mask`.  Filled lowest-set-bit groups first so each entry only reads
    already-final entries."""
    m = len(vertices)
    index = {v: i for i, v in enumerate(vertices)}
    local_adj = np.zeros(m, dtype=np.int64)
    for i, v in enumerate(vertices):
        a = 0
        for w in g.neighbors(v):
            j = index.get(w)
            if j is not None:
                a |= 1 << j
        local_adj[i] = a

    size = 1 << m
    table = np.zeros(size, dtype=np.int32)
    masks = np.arange(size, dtype=np.int64)
    for low in range(m - 1, -1, -1):
        group = masks[(masks >> low) & 1 == 1]
        group = group[(group & ((1 << low) - 1)) == 0]
        rest = group ^ (1 << low)
        inter = local_adj[low] & rest
        # vectorized popcount on int64
        x = inter
        x = x - ((x >> 1) & 0x5555555555555555)
        x = (x & 0x3333333333333333) + ((x >> 2) & 0x3333333333333333)
        x = (x + (x >> 4)) & 0x0F0F0F0F0F0F0F0F
        pc = (x * 0x0101010101010101) >> 56
        table[group] = table[rest] + pc.astype(np.int32)
    return table


MAX_CUT_EXACT_THRESHOLD = 20


def max_cut_bipartition(
    g: Graph,
    vertices: Iterable[int],
    exact_threshold: int = MAX_CUT_EXACT_THRESHOLD,
    seed: int = 0,
) -> tuple[frozenset[int], frozenset[int], int]:
    """Bipartition of `vertices` maximising cross edges; returns (X, Y, uncut).

    Exhaustive for |A| <= exact_threshold; otherwise single-vertex local
    search to move-stability (every vertex has at least as many neighbours
    across as on its own side), restarted a few times deterministically.
    """
    vs = sorted(set(vertices))
    if len(vs) < 2:
        raise InputError("max cut needs at least 2 vertices")
    m = len(vs)
    total = g.edges_within(vs)

    if m <= exact_threshold:
        table = _induced_edge_table(g, vs)
        full = (1 << m) - 1
        # fix vertex vs[0] on the X side; skip the empty/full splits
        cand = np.arange(1, 1 << (m - 1), 2, dtype=np.int64) if m > 1 else np.array([], dtype=np.int64)
        if len(cand) == 0:
            cand = np.array([1], dtype=np.int64)
        uncut_all = table[cand] + table[full ^ cand]
        best_i = int(np.argmin(uncut_all))
        best_mask = int(cand[best_i])
        uncut = int(uncut_all[best_i])
        xs = frozenset(vs[i] for i in range(m) if best_mask >> i & 1)
        ys = frozenset(v for v in vs if v not in xs)
        return xs, ys, uncut

    rng = random.Random(seed)
    best: Optional[tuple[int, set[int]]] = None
    for attempt in range(3):
        side = {v: (i % 2 if attempt == 0 else rng.randint(0, 1)) for i, v in enumerate(vs)}
        improved = True
        while improved:
            improved = False
            for v in vs:
                same = sum(1 for w in g.neighbors(v) if w in side and side[w] == side[v])
                cross = sum(1 for w in g.neighbors(v) if w in side and side[w] != side[v])
                if same > cross:
                    n_side = sum(1 for u in vs if side[u] == side[v])
                    if n_side > 1:  # keep both sides nonempty
                        side[v] = 1 - side[v]
                        improved = True
        xset = {v for v in vs if side[v] == 0}
        cut = g.edges_between(xset, set(vs) - xset)
        uncut = total - cut
        if best is None or uncut < best[0]:
            best = (uncut, xset)
    uncut, xset = best
    return frozenset(xset), frozenset(set(vs) - xset), uncut
