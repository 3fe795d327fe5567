"""Independent validity checking and exponential-time ground-truth oracles.

Verifiers re-derive everything from the raw graph and never trust upstream
invariants; they gate the acceptance tests.  The oracles are deliberately
separate implementations from the production search paths.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

from .decomposer import Decomposition, NEAR_BIPARTITE
from .errors import TooLarge
from .forest import LinearForest
from .graph import Graph

BRUTE_CYCLE_CAP = 14
BRUTE_PATH_CAP = 20


@dataclass(frozen=True)
class VerificationReport:
    passed: bool
    checks: tuple[tuple[str, bool, str], ...]
    counts: dict

    def failures(self) -> list[str]:
        return [name for name, ok, _ in self.checks if not ok]

    def to_json_dict(self) -> dict:
        return {
            "passed": self.passed,
            "checks": [{"name": n, "passed": ok, "detail": d} for n, ok, d in self.checks],
            "counts": self.counts,
        }


def _build_report(checks: list[tuple[str, bool, str]], counts: dict) -> VerificationReport:
    return VerificationReport(
        passed=all(ok for _, ok, _ in checks),
        checks=tuple(checks),
        counts=counts,
    )


def _coverage_checks(g: Graph, parts: Sequence[Sequence[int]]) -> list[tuple[str, bool, str]]:
    checks = []
    flat = [v for p in parts for v in p]
    in_range = all(isinstance(v, int) and 0 <= v < g.n for v in flat)
    checks.append(("vertices_in_range", in_range, f"n={g.n}"))
    if not in_range:
        return checks
    disjoint = len(flat) == len(set(flat))
    checks.append(("disjoint", disjoint, f"{len(flat)} listed, {len(set(flat))} distinct"))
    coverage = set(flat) == set(range(g.n))
    missing = sorted(set(range(g.n)) - set(flat))[:5]
    checks.append(("coverage", coverage, f"missing {missing}" if missing else "all covered"))
    return checks


def verify_cycle_partition(g: Graph, cycles: Sequence[Sequence[int]],
                           d: Optional[int] = None) -> VerificationReport:
    """Check disjointness, coverage, adjacency incl. wrap edges, min length 3,
    and the cycle-count bound floor(n/(d+1))."""
    checks = _coverage_checks(g, cycles)
    in_range = checks[0][1]
    min_len = all(len(set(c)) == len(c) and len(c) >= 3 for c in cycles)
    checks.append(("min_length_3", min_len, f"{len(cycles)} parts"))
    adjacency = in_range
    detail = "all consecutive and wrap pairs adjacent" if in_range else "skipped: bad vertices"
    for i, c in enumerate(cycles):
        if not adjacency or len(c) < 2:
            continue
        for u, v in zip(c, list(c[1:]) + [c[0]]):
            if not g.has_edge(u, v):
                adjacency = False
                detail = f"cycle {i}: missing edge ({u},{v})"
                break
    checks.append(("adjacency", adjacency, detail))
    if d is None:
        degs = {g.degree(v) for v in range(g.n)}
        d = min(degs) if degs else 0
    bound = g.n // (d + 1)
    checks.append(("count_bound", len(cycles) <= bound,
                   f"{len(cycles)} cycles vs bound {bound}"))
    return _build_report(checks, {"parts": len(cycles), "bound": bound, "n": g.n})


def verify_path_partition(g: Graph, paths: Sequence[Sequence[int]],
                          bipartite: bool = True, d: Optional[int] = None,
                          allow_singletons: bool = False) -> VerificationReport:
    checks = _coverage_checks(g, paths)
    in_range = checks[0][1]
    min_len = all(len(set(p)) == len(p) and (len(p) >= 1 if allow_singletons else len(p) >= 2)
                  for p in paths)
    checks.append(("min_length", min_len, f"{len(paths)} parts"))
    adjacency = in_range
    detail = "all consecutive pairs adjacent" if in_range else "skipped: bad vertices"
    for i, p in enumerate(paths):
        if not adjacency:
            break
        for u, v in zip(p, p[1:]):
            if not g.has_edge(u, v):
                adjacency = False
                detail = f"path {i}: missing edge ({u},{v})"
                break
    checks.append(("adjacency", adjacency, detail))
    if d is None:
        degs = {g.degree(v) for v in range(g.n)}
        d = min(degs) if degs else 0
    bound = g.n // (2 * d) if (bipartite and d > 0) else g.n // (d + 1)
    checks.append(("count_bound", len(paths) <= bound,
                   f"{len(paths)} paths vs bound {bound}"))
    return _build_report(checks, {"parts": len(paths), "bound": bound, "n": g.n})


def verify_forest(g: Graph, dec: Decomposition, f: LinearForest,
                  xi: float = 0.1) -> VerificationReport:
    """Check the five balancing-forest properties against the decomposition."""
    import math

    checks: list[tuple[str, bool, str]] = []
    valid = True
    detail = "forest well-formed"
    try:
        f.validate(g)
    except Exception as exc:  # noqa: BLE001 - verifier is total
        valid = False
        detail = str(exc)
    checks.append(("forest_valid", valid, detail))

    r = len(dec.clusters)
    zeta = float(dec.ladder.zeta)
    limit = math.ceil(xi * g.n) + r * (math.ceil(3 / zeta) + 2)
    checks.append(("a_size", f.size() <= limit, f"|V(H)|={f.size()} vs limit {limit}"))
    checks.append(("b_no_isolated", all(len(p) >= 2 for p in f.paths), ""))

    leaf_cluster: dict[int, list[int]] = {i: [] for i in range(r)}
    ok_cluster = True
    for p in f.paths:
        for leaf in (p[0], p[-1]):
            try:
                leaf_cluster[dec.cluster_of(leaf)].append(leaf)
            except Exception:
                ok_cluster = False
    two_or_zero = ok_cluster and all(len(ls) in (0, 2) for ls in leaf_cluster.values())
    checks.append(("c_two_or_zero_leaves", two_or_zero,
                   str({i: len(ls) for i, ls in leaf_cluster.items() if ls})))

    one_per_side = True
    residual = True
    covered = f.vertices()
    for i, cluster in enumerate(dec.clusters):
        if cluster.kind != NEAR_BIPARTITE:
            continue
        ls = leaf_cluster.get(i, [])
        if ls:
            in_x = sum(1 for v in ls if v in cluster.x_side)
            if not (len(ls) == 2 and in_x == 1):
                one_per_side = False
        cx = sum(1 for v in cluster.x_side if v in covered)
        cy = sum(1 for v in cluster.y_side if v in covered)
        if cx - cy != len(cluster.x_side) - len(cluster.y_side):
            residual = False
    checks.append(("d_one_leaf_per_side", one_per_side, ""))
    checks.append(("e_residual_balance", residual, ""))
    return _build_report(checks, {"size": f.size(), "paths": len(f.paths)})


# ---------------------------------------------------------------------------
# Brute-force oracles
# ---------------------------------------------------------------------------

def _subset_adj_masks(g: Graph, verts: Sequence[int]) -> list[int]:
    idx = {v: i for i, v in enumerate(verts)}
    masks = [0] * len(verts)
    for v in verts:
        for w in g.neighbors(v):
            j = idx.get(w)
            if j is not None:
                masks[idx[v]] |= 1 << j
    return masks


def brute_min_cycle_partition(g: Graph) -> float:
    """Exact minimum number of vertex-disjoint cycles (length >= 3) covering
    V(G), or inf if impossible.

    Marks every subset inducing a Hamiltonian cycle on itself (paths anchored
    at the subset's lowest vertex), then exact-covers by those subsets.
    """
    n = g.n
    if n > BRUTE_CYCLE_CAP:
        raise TooLarge(f"oracle capped at {BRUTE_CYCLE_CAP} vertices, got {n}")
    adj = _subset_adj_masks(g, list(range(n)))
    size = 1 << n
    # ends[mask] = endpoints of paths covering mask, starting at lowbit(mask)
    ends = [0] * size
    for v in range(n):
        ends[1 << v] = 1 << v
    for mask in range(size):
        e = ends[mask]
        if not e:
            continue
        low = mask & -mask
        for u in range(n):
            b = 1 << u
            if mask & b or b < low:
                continue
            if adj[u] & e:
                ends[mask | b] |= b
    ham_cycle = bytearray(size)
    for mask in range(size):
        if bin(mask).count("1") < 3 or not ends[mask]:
            continue
        low_i = (mask & -mask).bit_length() - 1
        if ends[mask] & adj[low_i]:
            ham_cycle[mask] = 1

    INF = float("inf")
    best = [INF] * size
    best[0] = 0
    for mask in range(1, size):
        low = mask & -mask
        sub = mask
        b = INF
        while sub:
            if (sub & low) and ham_cycle[sub] and best[mask ^ sub] + 1 < b:
                b = best[mask ^ sub] + 1
            sub = (sub - 1) & mask
        best[mask] = b
    return best[size - 1]


def brute_ham_path(g: Graph, working: Iterable[int], x: int, y: int) -> bool:
    """Subset-DP existence of a Hamilton path on `working` with ends x, y."""
    verts = sorted(set(working))
    m = len(verts)
    if m > BRUTE_PATH_CAP:
        raise TooLarge(f"oracle capped at {BRUTE_PATH_CAP} vertices, got {m}")
    idx = {v: i for i, v in enumerate(verts)}
    if x not in idx or y not in idx or x == y:
        return False
    adj = _subset_adj_masks(g, verts)
    xi, yi = idx[x], idx[y]
    size = 1 << m
    reach = [0] * size
    reach[1 << xi] = 1 << xi
    start_bit = 1 << xi
    for mask in range(size):
        e = reach[mask]
        if not e or not mask & start_bit:
            continue
        for u in range(m):
            b = 1 << u
            if mask & b:
                continue
            if adj[u] & e:
                reach[mask | b] |= b
    return bool((reach[size - 1] >> yi) & 1)
