"""Partition a regular graph into clusters with no sparse cuts.

Iteratively splits the vertex set along the sparsest cut found (threshold
escalating geometrically), reassigns high-cross-degree vertices so every
vertex keeps many same-side neighbours, and classifies each final cluster as
near- or far-from-bipartite by a pigeonhole over a ladder of thresholds.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import (
    ClassificationAmbiguous,
    DecompositionFailed,
    InputError,
    RefinementFailed,
)
from .graph import Cut, Graph, RegularityInfo, _induced_edge_table, max_cut_bipartition

log = logging.getLogger("cyclecut.decomposer")

NEAR_BIPARTITE = "near_bipartite"
FAR_BIPARTITE = "far_bipartite"

SPARSE_CUT_EXACT_THRESHOLD = 16


@dataclass(frozen=True)
class ParameterLadder:
    """Desk-scale surrogate for the asymptotic parameter hierarchy.

    Requires eta < beta < gamma < zeta in (0,1) and delta in (0,1); the
    asymptotic ordering zeta << delta cannot hold at desk densities (delta
    defaults to 0.25*c, which sits below the workable zeta for any c < 0.8),
    so delta is only range-checked.  `r_max` defaults to ceil(1/c)+1.
    """

    eta: Fraction = Fraction(1, 100)
    beta: Fraction = Fraction(1, 50)
    gamma: Fraction = Fraction(1, 10)
    zeta: Fraction = Fraction(1, 5)
    delta: Fraction = Fraction(1, 16)
    r_max: int = 5

    def __post_init__(self):
        vals = [self.eta, self.beta, self.gamma, self.zeta]
        if not all(a < b for a, b in zip(vals, vals[1:])):
            raise InputError(f"ladder must satisfy eta < beta < gamma < zeta, got {vals}")
        if not (0 < self.eta and self.zeta < 1 and 0 < self.delta < 1):
            raise InputError("ladder values must lie in (0,1)")
        if self.r_max < 1:
            raise InputError("r_max must be >= 1")

    def pigeonhole_sequence(self, r: int) -> list[Fraction]:
        """r+2 geometrically spaced classification thresholds in [eta, gamma]."""
        lo, hi = float(self.eta), float(self.gamma)
        pts = r + 2
        seq = [Fraction(lo * (hi / lo) ** (i / (pts - 1))).limit_denominator(10**6)
               for i in range(pts)]
        seq[0], seq[-1] = self.eta, self.gamma
        return seq


def default_ladder(info: RegularityInfo, **overrides) -> ParameterLadder:
    """Ladder with delta tied to the graph's density ratio c."""
    params = dict(
        eta=Fraction(1, 100),
        beta=Fraction(1, 50),
        gamma=Fraction(1, 10),
        zeta=Fraction(1, 5),
        delta=info.c / 4,
        r_max=math.ceil(1 / info.c) + 1,
    )
    for k, v in overrides.items():
        if v is None:
            continue
        params[k] = Fraction(v).limit_denominator(10**9) if k != "r_max" else int(v)
    return ParameterLadder(**params)


@dataclass(frozen=True)
class Cluster:
    """A part of the decomposition, with its bipartiteness classification."""

    vertices: frozenset[int]
    kind: str  # NEAR_BIPARTITE or FAR_BIPARTITE
    x_side: Optional[frozenset[int]] = None
    y_side: Optional[frozenset[int]] = None
    uncut: int = 0

    def __post_init__(self):
        if self.kind == NEAR_BIPARTITE:
            if not self.x_side or not self.y_side:
                raise InputError("near-bipartite cluster needs both sides")
            if self.x_side | self.y_side != self.vertices or self.x_side & self.y_side:
                raise InputError("sides must partition the cluster")

    def to_json_dict(self) -> dict:
        out = {"vertices": sorted(self.vertices), "kind": self.kind, "uncut": self.uncut}
        if self.kind == NEAR_BIPARTITE:
            out["x_side"] = sorted(self.x_side)
            out["y_side"] = sorted(self.y_side)
        return out

    @classmethod
    def from_json_dict(cls, data: dict) -> "Cluster":
        kind = data["kind"]
        return cls(
            vertices=frozenset(data["vertices"]),
            kind=kind,
            x_side=frozenset(data["x_side"]) if kind == NEAR_BIPARTITE else None,
            y_side=frozenset(data["y_side"]) if kind == NEAR_BIPARTITE else None,
            uncut=int(data.get("uncut", 0)),
        )


@dataclass(frozen=True)
class Decomposition:
    """Clusters partitioning V(G), plus the parameters that produced them.

    `eta_effective` mirrors how the construction derives its cross-edge
    bound after the fact: 3*sqrt(last splitting threshold).  `beta_effective`
    / `gamma_effective` are the pigeonhole pair actually used to classify.
    """

    clusters: tuple[Cluster, ...]
    ladder: ParameterLadder
    eta_effective: Fraction
    beta_effective: Fraction
    gamma_effective: Fraction

    @property
    def near_count(self) -> int:
        return sum(1 for c in self.clusters if c.kind == NEAR_BIPARTITE)

    def cluster_of(self, v: int) -> int:
        for i, c in enumerate(self.clusters):
            if v in c.vertices:
                return i
        raise InputError(f"vertex {v} not in any cluster")

    def cross_edge_count(self, g: Graph) -> int:
        owner = {}
        for i, c in enumerate(self.clusters):
            for v in c.vertices:
                owner[v] = i
        return sum(1 for u, v in g.edges() if owner[u] != owner[v])

    def to_json_dict(self) -> dict:
        return {
            "clusters": [c.to_json_dict() for c in self.clusters],
            "ladder": {
                "eta": str(self.ladder.eta), "beta": str(self.ladder.beta),
                "gamma": str(self.ladder.gamma), "zeta": str(self.ladder.zeta),
                "delta": str(self.ladder.delta), "r_max": self.ladder.r_max,
            },
            "eta_effective": str(self.eta_effective),
            "beta_effective": str(self.beta_effective),
            "gamma_effective": str(self.gamma_effective),
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "Decomposition":
        lad = data["ladder"]
        ladder = ParameterLadder(
            eta=Fraction(lad["eta"]), beta=Fraction(lad["beta"]),
            gamma=Fraction(lad["gamma"]), zeta=Fraction(lad["zeta"]),
            delta=Fraction(lad["delta"]), r_max=int(lad["r_max"]),
        )
        return cls(
            clusters=tuple(Cluster.from_json_dict(c) for c in data["clusters"]),
            ladder=ladder,
            eta_effective=Fraction(data["eta_effective"]),
            beta_effective=Fraction(data["beta_effective"]),
            gamma_effective=Fraction(data["gamma_effective"]),
        )


# ---------------------------------------------------------------------------
# Sparse cuts
# ---------------------------------------------------------------------------

def _local_improve_cut(g: Graph, xs: set[int], ys: set[int], cap: int = 400) -> tuple[set[int], set[int]]:
    """Greedy single-vertex moves minimising exact sparsity."""
    cross = g.edges_between(xs, ys)
    for _ in range(cap):
        best_move = None
        best_val = Fraction(cross, len(xs) * len(ys))
        for v in sorted(xs | ys):
            src, dst = (xs, ys) if v in xs else (ys, xs)
            if len(src) == 1:
                continue
            to_dst = sum(1 for w in g.neighbors(v) if w in dst)
            to_src = sum(1 for w in g.neighbors(v) if w in src)
            new_cross = cross - to_dst + to_src
            new_val = Fraction(new_cross, (len(xs) + (1 if v in ys else -1)) * (len(ys) + (1 if v in xs else -1)))
            if new_val < best_val:
                best_val = new_val
                best_move = (v, new_cross)
        if best_move is None:
            break
        v, cross = best_move
        if v in xs:
            xs.remove(v)
            ys.add(v)
        else:
            ys.remove(v)
            xs.add(v)
    return xs, ys


def find_sparse_cut(g: Graph, vertices: Iterable[int], threshold: Fraction) -> Optional[Cut]:
    """Search for a cut of G[A] with sparsity <= threshold.

    Candidates come from, in order: a connected-component split (sparsity 0),
    exhaustive enumeration for |A| <= 16, Fiedler-vector sweep cuts (a few
    eigenvectors, to cope with degenerate spectra), and greedy single-vertex
    improvement of the best sweep cut.  A None return certifies only that
    this strategy found nothing at or below the threshold.
    """
    vs = sorted(set(vertices))
    if len(vs) < 2:
        return None
    threshold = Fraction(threshold)

    comps = g.components(vs)
    if len(comps) > 1:
        xs = min(comps, key=lambda c: (len(c), min(c)))
        ys = frozenset(set(vs) - xs)
        return Cut(x=xs, y=ys, sparsity=Fraction(0))

    m = len(vs)
    if m <= SPARSE_CUT_EXACT_THRESHOLD:
        table = _induced_edge_table(g, vs)
        full = (1 << m) - 1
        total = int(table[full])
        cand = np.arange(1, 1 << (m - 1), 2, dtype=np.int64)
        cross = total - table[cand] - table[full ^ cand]
        pc = cand.copy()
        pc = pc - ((pc >> 1) & 0x5555555555555555)
        pc = (pc & 0x3333333333333333) + ((pc >> 2) & 0x3333333333333333)
        pc = (pc + (pc >> 4)) & 0x0F0F0F0F0F0F0F0F
        sizes = ((pc * 0x0101010101010101) >> 56).astype(np.int64)
        denom = sizes * (m - sizes)
        # exact comparison cross/denom <= p/q via cross*q <= p*denom (int64 safe)
        ok = cross.astype(np.int64) * threshold.denominator <= threshold.numerator * denom
        if not ok.any():
            return None
        idx = np.flatnonzero(ok)
        # pick the sparsest admissible cut (exact cross-multiplication compare)
        best = idx[0]
        for i in idx[1:]:
            if int(cross[i]) * int(denom[best]) < int(cross[best]) * int(denom[i]):
                best = i
        mask = int(cand[best])
        xs = frozenset(vs[i] for i in range(m) if mask >> i & 1)
        ys = frozenset(set(vs) - xs)
        return Cut(x=xs, y=ys, sparsity=Fraction(int(cross[best]), int(denom[best])))

    # spectral sweep
    index = {v: i for i, v in enumerate(vs)}
    lap = np.zeros((m, m))
    for v in vs:
        i = index[v]
        for w in g.neighbors(v):
            j = index.get(w)
            if j is not None:
                lap[i, j] -= 1.0
                lap[i, i] += 1.0
    _, vecs = np.linalg.eigh(lap)

    in_a = set(vs)
    best_cut: Optional[tuple[Fraction, set[int], set[int]]] = None
    for col in range(1, min(4, m)):
        order = sorted(range(m), key=lambda i: (vecs[i, col], i))
        prefix: set[int] = set()
        cross = 0
        for k in range(m - 1):
            v = vs[order[k]]
            to_prefix = sum(1 for w in g.neighbors(v) if w in prefix)
            to_rest = sum(1 for w in g.neighbors(v) if w in in_a and w not in prefix)
            cross += to_rest - to_prefix
            prefix.add(v)
            val = Fraction(cross, len(prefix) * (m - len(prefix)))
            if best_cut is None or val < best_cut[0]:
                best_cut = (val, set(prefix), set(vs) - prefix)
    assert best_cut is not None
    xs, ys = _local_improve_cut(g, best_cut[1], best_cut[2])
    val = Fraction(g.edges_between(xs, ys), len(xs) * len(ys))
    if val <= threshold:
        return Cut(x=frozenset(xs), y=frozenset(ys), sparsity=val)
    return None


# ---------------------------------------------------------------------------
# Refinement
# ---------------------------------------------------------------------------

def refine_split(
    g: Graph,
    a1: Iterable[int],
    a2: Iterable[int],
    eta_i: Fraction,
    mindeg_target: Fraction,
) -> tuple[frozenset[int], frozenset[int]]:
    """Repartition A1 u A2 so every vertex has >= mindeg_target*n same-side
    neighbours.

    Vertices with more than sqrt(eta_i)*n cross neighbours are pulled out and
    reassigned to whichever core side holds enough of their neighbours.
    """
    n = g.n
    s1, s2 = set(a1), set(a2)
    if s1 & s2 or not s1 or not s2:
        raise InputError("refine_split needs a proper cut")
    # count <= sqrt(eta)*n  <=>  count^2 <= eta*n^2, kept exact
    def low_cross(count: int) -> bool:
        return Fraction(count * count) <= Fraction(eta_i) * n * n

    core1 = {v for v in s1 if low_cross(sum(1 for w in g.neighbors(v) if w in s2))}
    core2 = {v for v in s2 if low_cross(sum(1 for w in g.neighbors(v) if w in s1))}
    need = Fraction(mindeg_target) * n
    new1, new2 = set(core1), set(core2)
    for v in sorted((s1 | s2) - core1 - core2):
        d1 = sum(1 for w in g.neighbors(v) if w in core1)
        d2 = sum(1 for w in g.neighbors(v) if w in core2)
        ok1, ok2 = Fraction(d1) >= need, Fraction(d2) >= need
        if ok1 and ok2:
            # prefer the original side, then the side with more neighbours
            if v in s1 and d1 >= d2:
                new1.add(v)
            elif v in s2 and d2 >= d1:
                new2.add(v)
            else:
                (new1 if d1 >= d2 else new2).add(v)
        elif ok1:
            new1.add(v)
        elif ok2:
            new2.add(v)
        else:
            raise RefinementFailed(v, max(d1, d2), need)
    # final verification against the actual sides
    for side, other in ((new1, new2), (new2, new1)):
        for v in side:
            same = sum(1 for w in g.neighbors(v) if w in side)
            if Fraction(same) < need:
                raise RefinementFailed(v, same, need)
    if not new1 or not new2:
        raise RefinementFailed(-1, 0, need)
    return frozenset(new1), frozenset(new2)


# ---------------------------------------------------------------------------
# Classification
# ---------------------------------------------------------------------------

def classify_cluster(
    g: Graph,
    vertices: Iterable[int],
    beta: Fraction,
    gamma: Fraction,
    exact_threshold: int = 20,
) -> Cluster:
    """Near/far-bipartite classification of one vertex set at fixed (beta, gamma)."""
    vs = frozenset(vertices)
    if not vs:
        raise InputError("cannot classify an empty cluster")
    if len(vs) == 1:
        return Cluster(vertices=vs, kind=FAR_BIPARTITE, uncut=0)
    xs, ys, uncut = max_cut_bipartition(g, vs, exact_threshold=exact_threshold)
    n2 = g.n * g.n
    if Fraction(uncut) <= Fraction(beta) * n2:
        return Cluster(vertices=vs, kind=NEAR_BIPARTITE, x_side=xs, y_side=ys, uncut=uncut)
    if Fraction(uncut) >= Fraction(gamma) * n2:
        return Cluster(vertices=vs, kind=FAR_BIPARTITE, uncut=uncut)
    raise ClassificationAmbiguous(
        f"cluster uncut count {uncut} lies strictly between beta*n^2={float(beta) * n2:.2f} "
        f"and gamma*n^2={float(gamma) * n2:.2f}")


def _pick_pigeonhole_pair(
    uncut_fracs: Sequence[Fraction], seq: Sequence[Fraction]
) -> Optional[tuple[Fraction, Fraction]]:
    """First consecutive pair (b_i, b_{i+1}) with no value strictly inside."""
    for lo, hi in zip(seq, seq[1:]):
        if not any(lo < u < hi for u in uncut_fracs):
            return lo, hi
    return None


# ---------------------------------------------------------------------------
# Main loop
# ---------------------------------------------------------------------------

def decompose(
    g: Graph,
    info: RegularityInfo,
    ladder: ParameterLadder,
    bipartition: Optional[tuple[frozenset[int], frozenset[int]]] = None,
    exact_threshold: int = 20,
) -> Decomposition:
    """Split V(G) along sparse cuts until no part has a zeta-sparse cut.

    When `bipartition` is given (bipartite input), every cluster is
    classified near-bipartite with sides inherited from the global coloring
    instead of via max-cut.
    """
    n = g.n
    parts: list[frozenset[int]] = [frozenset(range(n))]
    last_split_threshold: Optional[Fraction] = None

    while True:
        stage_thr = min(ladder.eta * Fraction(3) ** (len(parts) - 1), ladder.zeta)
        candidates = []
        for idx, part in enumerate(parts):
            if len(part) < 2:
                continue
            cut = find_sparse_cut(g, part, ladder.zeta)
            if cut is not None:
                candidates.append((cut.sparsity, idx, cut))
        if not candidates:
            break
        candidates.sort(key=lambda t: (t[0], t[1]))
        sparsity, idx, cut = candidates[0]
        if len(parts) + 1 > ladder.r_max:
            raise DecompositionFailed(
                f"hit r_max={ladder.r_max} with a {float(sparsity):.4f}-sparse cut remaining; "
                f"ladder too aggressive for this instance")
        thr_used = max(stage_thr, sparsity)
        try:
            p1, p2 = refine_split(g, cut.x, cut.y, eta_i=thr_used, mindeg_target=ladder.delta)
        except RefinementFailed as exc:
            raise DecompositionFailed(f"refinement failed while splitting: {exc}") from exc
        last_split_threshold = thr_used
        parts = parts[:idx] + parts[idx + 1:] + [p1, p2]
        parts.sort(key=min)
        log.debug("split into %d parts along sparsity %.4f", len(parts), float(sparsity))

    eta_effective = ladder.eta
    if last_split_threshold is not None:
        eta_effective = max(
            ladder.eta,
            Fraction(3 * math.sqrt(float(last_split_threshold))).limit_denominator(10**6),
        )

    r = len(parts)
    n2 = n * n
    clusters: list[Cluster] = []
    if bipartition is not None:
        gx, gy = bipartition
        for part in parts:
            xs, ys = frozenset(part & gx), frozenset(part & gy)
            if not xs or not ys:
                raise DecompositionFailed(f"cluster {sorted(part)[:6]}... has an empty coloring side")
            uncut = g.edges_within(part) - g.edges_between(xs, ys)
            clusters.append(Cluster(vertices=part, kind=NEAR_BIPARTITE,
                                    x_side=xs, y_side=ys, uncut=uncut))
        beta_eff, gamma_eff = ladder.beta, ladder.gamma
    else:
        results = []
        for part in parts:
            xs, ys, uncut = (None, None, 0) if len(part) == 1 else \
                max_cut_bipartition(g, part, exact_threshold=exact_threshold)
            results.append((part, xs, ys, uncut))
        seq = ladder.pigeonhole_sequence(r)
        pair = _pick_pigeonhole_pair([Fraction(u, n2) for _, _, _, u in results], seq)
        if pair is None:
            raise ClassificationAmbiguous(
                f"no ladder pair separates cluster uncut densities "
                f"{[round(u / n2, 5) for _, _, _, u in results]}; extend the ladder")
        beta_eff, gamma_eff = pair
        for part, xs, ys, uncut in results:
            if xs is not None and Fraction(uncut) <= beta_eff * n2:
                clusters.append(Cluster(vertices=part, kind=NEAR_BIPARTITE,
                                        x_side=xs, y_side=ys, uncut=uncut))
            else:
                clusters.append(Cluster(vertices=part, kind=FAR_BIPARTITE, uncut=uncut))

    dec = Decomposition(
        clusters=tuple(clusters),
        ladder=ladder,
        eta_effective=eta_effective,
        beta_effective=beta_eff,
        gamma_effective=gamma_eff,
    )
    log.info("decomposed into r=%d clusters (%d near-bipartite)", r, dec.near_count)
    return dec
