"""Centralized oracles: domination, exact k-hop MDS, pruning, Voronoi cells,
expansion, and approximation-ratio reports."""

from __future__ import annotations

import math
from collections import deque
from dataclasses import asdict, dataclass
from fractions import Fraction
from typing import Iterable, Mapping

from .graph_core import INF, GraphError, PortGraph, bfs_distances, is_connected, multi_source_distances

__all__ = [
    "SizeError",
    "LemmaViolation",
    "is_k_dominating",
    "k_balls",
    "exact_mds",
    "constrained_exact_mds",
    "is_constrained_dominating",
    "greedy_dominating_set",
    "packing_lower_bound",
    "central_prune_oracle",
    "VoronoiDecomposition",
    "voronoi",
    "usefk_check",
    "expansion_bruteforce",
    "DegreeClassCounts",
    "degree_class_counts",
    "low_degree_bound",
    "high_degree_bound",
    "threshold_for",
    "RatioReport",
    "ratio_report",
    "selection_witnesses",
    "ball_max_degree",
]


class SizeError(ValueError):
    """Instance too large for an exhaustive oracle."""


class LemmaViolation(AssertionError):
    """A structural property that is proved to hold was observed to fail."""


# domination ------------------------------------------------------------

def is_k_dominating(g: PortGraph, s: Iterable[int], k: int) -> bool:
    s = list(s)
    if g.n == 0:
        return True
    if not s:
        return False
    dist = multi_source_distances(g, s, limit=k)
    return all(d <= k for d in dist)


def k_balls(g: PortGraph, radius: int | Mapping[int, int], nodes: Iterable[int] | None = None) -> dict[int, int]:
    """Bitmask per candidate c of the nodes it covers.

    With an int radius, c covers every node within that distance.  With a
    mapping, c covers node v iff dist(c, v) <= radius[v] (only keys of the
    mapping are elements).
    """
    cands = range(g.n) if nodes is None else list(nodes)
    balls = {}
    for c in cands:
        dist = bfs_distances(g, c)
        mask = 0
        if isinstance(radius, Mapping):
            for v, rv in radius.items():
                if dist[v] <= rv:
                    mask |= 1 << v
        else:
            for v, d in enumerate(dist):
                if d <= radius:
                    mask |= 1 << v
        balls[c] = mask
    return balls


def _set_cover(universe: int, sets: dict[int, int]) -> list[int]:
    """Minimum set cover by branch and bound over bitmasks.

    Branches on the uncovered element with fewest covering sets; bounds by
    ceil(uncovered / largest remaining coverage).  Ties go to lower ids.
    """
    cands = sorted(sets)
    if universe == 0:
        return []
    covering: dict[int, list[int]] = {}
    rest = universe
    while rest:
        low = rest & -rest
        e = low.bit_length() - 1
        covering[e] = [c for c in cands if sets[c] >> e & 1]
        if not covering[e]:
            raise ValueError(f"element {e} cannot be covered")
        rest ^= low

    best = greedy_cover(universe, sets)

    def search(uncovered: int, chosen: list[int]):
        nonlocal best
        if not uncovered:
            if len(chosen) < len(best):
                best = list(chosen)
            return
        maxcov = 0
        pick_e, pick_n = -1, None
        rest = uncovered
        while rest:
            low = rest & -rest
            e = low.bit_length() - 1
            rest ^= low
            options = covering[e]
            if pick_n is None or len(options) < pick_n:
                pick_e, pick_n = e, len(options)
        for c in cands:
            cov = (sets[c] & uncovered).bit_count()
            if cov > maxcov:
                maxcov = cov
        need = -(-uncovered.bit_count() // maxcov)
        if len(chosen) + need >= len(best):
            return
        options = sorted(covering[pick_e], key=lambda c: (-(sets[c] & uncovered).bit_count(), c))
        for c in options:
            chosen.append(c)
            search(uncovered & ~sets[c], chosen)
            chosen.pop()

    search(universe, [])
    return sorted(best)


def greedy_cover(universe: int, sets: dict[int, int]) -> list[int]:
    chosen = []
    uncovered = universe
    while uncovered:
        c = max(sorted(sets), key=lambda c: (sets[c] & uncovered).bit_count())
        if not sets[c] & uncovered:
            raise ValueError("universe cannot be covered")
        chosen.append(c)
        uncovered &= ~sets[c]
    return sorted(chosen)


def exact_mds(g: PortGraph, k: int, limit: int = 30) -> set[int]:
    """A minimum k-hop dominating set of the whole graph."""
    if g.n > limit:
        raise SizeError(f"{g.n} nodes exceeds the exact-search cap {limit}; use bounds mode")
    balls = k_balls(g, k)
    return set(_set_cover((1 << g.n) - 1, balls))


def constrained_exact_mds(g: PortGraph, survivors: Iterable[int], radius: Mapping[int, int], limit: int = 30) -> set[int]:
    """Minimum D within ``survivors`` with a member within radius[v] of each v.

    Distances are measured in ``g`` (use the input graph; the deleted parts
    are pendant trees so distances between survivors coincide with the
    pruned graph's).
    """
    survivors = sorted(survivors)
    if len(survivors) > limit:
        raise SizeError(f"{len(survivors)} survivors exceeds the exact-search cap {limit}")
    balls = k_balls(g, radius, nodes=survivors)
    universe = 0
    for v in radius:
        universe |= 1 << v
    return set(_set_cover(universe, balls))


def is_constrained_dominating(g: PortGraph, s: Iterable[int], radius: Mapping[int, int]) -> bool:
    s = list(s)
    if not radius:
        return True
    if not s:
        return False
    dist = multi_source_distances(g, s)
    return all(dist[v] <= rv for v, rv in radius.items())


def greedy_dominating_set(g: PortGraph, k: int) -> set[int]:
    return set(greedy_cover((1 << g.n) - 1, k_balls(g, k)))


def packing_lower_bound(g: PortGraph, k: int) -> list[int]:
    """Greedy set of nodes with pairwise distance > 2k.

    Their k-balls are disjoint, so every k-hop dominating set needs a
    distinct member for each; the size is a certified lower bound on the
    optimum.  Candidates with smaller k-balls are tried first.
    """
    sizes = []
    for v in range(g.n):
        dist = multi_source_distances(g, [v], limit=k)
        sizes.append(sum(1 for d in dist if d <= k))
    blocked = [False] * g.n
    chosen = []
    for v in sorted(range(g.n), key=lambda v: (sizes[v], v)):
        if blocked[v]:
            continue
        chosen.append(v)
        dist = multi_source_distances(g, [v], limit=2 * k)
        for w, d in enumerate(dist):
            if d <= 2 * k:
                blocked[w] = True
    return chosen


# pruning oracle ----------------------------------------------------------

def central_prune_oracle(g: PortGraph, k: int) -> tuple[set[int], dict[int, int]]:
    """Synchronized degree-1 deletion for k iterations, computed centrally.

    Returns the survivors V and, per survivor, the last iteration in which a
    neighbor was deleted (0 if none).  V is empty exactly when the last
    deleted nodes removed each other.
    """
    if not is_connected(g):
        raise GraphError("pruning oracle needs a connected graph")
    alive = [True] * g.n
    deg = g.degrees()
    last = [0] * g.n
    for it in range(1, k + 1):
        doomed = [v for v in range(g.n) if alive[v] and deg[v] == 1]
        for v in doomed:
            alive[v] = False
        for v in doomed:
            for w, _ in g.adj[v]:
                if alive[w]:
                    deg[w] -= 1
                    last[w] = it
    survivors = {v for v in range(g.n) if alive[v]}
    return survivors, {v: last[v] for v in survivors}


def pruned_radius(k: int, r: Mapping[int, int]) -> dict[int, int]:
    return {v: k - rv for v, rv in r.items()}


# Voronoi cells ------------------------------------------------------------

@dataclass
class VoronoiDecomposition:
    dominator: dict[int, int]
    cells: dict[int, set[int]]
    parent: dict[int, int | None]
    depth: dict[int, int]

    def leaves(self, m: int) -> set[int]:
        cell = self.cells[m]
        has_child = {self.parent[v] for v in cell if self.parent[v] is not None}
        return {v for v in cell if v != m and v not in has_child}


def voronoi(g: PortGraph, survivors: Iterable[int], dominators: Iterable[int], k: int,
            check: bool = True) -> VoronoiDecomposition:
    """Nearest-dominator partition of the graph induced by ``survivors``.

    Ties go to the smallest dominator id.  With ``check`` the three cell
    properties guaranteed at girth >= 4k+3 are asserted: each cell is a tree
    of depth <= k, every non-root leaf has an edge leaving its cell, and no
    two cells are joined by more than one edge.
    """
    V = set(survivors)
    M = sorted(set(dominators))
    if not set(M) <= V:
        raise ValueError("dominators must be survivors")
    dominator: dict[int, int] = {m: m for m in M}
    depth = {m: 0 for m in M}
    parent: dict[int, int | None] = {m: None for m in M}
    frontier = list(M)
    d = 0
    while frontier:
        d += 1
        offers: dict[int, tuple[int, int]] = {}
        for u in frontier:
            for w, _ in g.adj[u]:
                if w in V and w not in dominator:
                    cand = (dominator[u], u)
                    if w not in offers or cand < offers[w]:
                        offers[w] = cand
        for w, (m, u) in offers.items():
            dominator[w] = m
            parent[w] = u
            depth[w] = d
        frontier = sorted(offers)
    if set(dominator) != V:
        missing = sorted(V - set(dominator))
        raise ValueError(f"survivors {missing[:5]} are not reachable from the dominators")
    cells: dict[int, set[int]] = {m: set() for m in M}
    for v, m in dominator.items():
        cells[m].add(v)
    decomp = VoronoiDecomposition(dominator, cells, parent, depth)
    if check:
        _check_voronoi(g, V, decomp, k)
    return decomp


def _check_voronoi(g: PortGraph, V: set[int], dec: VoronoiDecomposition, k: int) -> None:
    between: dict[tuple[int, int], int] = {}
    for m, cell in dec.cells.items():
        inner = sum(1 for v in cell for w, _ in g.adj[v] if w in cell) // 2
        if inner != len(cell) - 1:
            raise LemmaViolation(f"cell of {m} has {inner} internal edges for {len(cell)} nodes; not a tree")
        deepest = max(dec.depth[v] for v in cell)
        if deepest > k:
            raise LemmaViolation(f"cell of {m} has depth {deepest} > k={k}")
        for leaf in dec.leaves(m):
            if not any(w in V and dec.dominator[w] != m for w, _ in g.adj[leaf]):
                raise LemmaViolation(f"leaf {leaf} of cell {m} has no edge leaving the cell")
    for v in V:
        for w, _ in g.adj[v]:
            if w in V and v < w and dec.dominator[v] != dec.dominator[w]:
                key = tuple(sorted((dec.dominator[v], dec.dominator[w])))
                between[key] = between.get(key, 0) + 1
    for (a, b), count in between.items():
        if count > 1:
            raise LemmaViolation(f"cells of {a} and {b} are joined by {count} edges")


def usefk_check(decomp: VoronoiDecomposition, fk_upper, k: int) -> bool:
    n_v = len(decomp.dominator)
    n_m = len(decomp.cells)
    return n_v <= (2 * k * Fraction(fk_upper) + 1) * n_m


# expansion ---------------------------------------------------------------

def expansion_bruteforce(g: PortGraph, k: int, limit: int = 12) -> Fraction:
    """Exact max edge/node ratio over minors from deleting nodes and
    contracting disjoint connected pieces of radius <= k.

    Pieces are chosen in canonical order (the smallest unassigned node either
    is deleted or anchors a new piece).  A branch is cut when no number j of
    further pieces can beat the best ratio.  Those pieces add at most
    min(edges touching the unassigned nodes, j*N + j(j-1)/2) edges, and a
    minor's cycle rank never exceeds the graph's.
    """
    n = g.n
    if n > limit:
        raise SizeError(f"{n} nodes exceeds the expansion brute-force cap {limit}")
    if n == 0:
        raise ValueError("empty graph")
    nbr = [0] * n
    for v in range(n):
        for w, _ in g.adj[v]:
            nbr[v] |= 1 << w
    full = (1 << n) - 1
    radius_ok: dict[int, bool] = {}

    def small_radius(mask: int) -> bool:
        if mask not in radius_ok:
            radius_ok[mask] = any(_ecc(nbr, mask, c) <= k for c in _bits(mask))
        return radius_ok[mask]

    def connected_sets(u: int, allowed: int):
        """All connected subsets of ``allowed`` that contain u."""
        seen = set()
        stack = [(1 << u, nbr[u] & allowed)]
        while stack:
            mask, border = stack.pop()
            if mask in seen:
                continue
            seen.add(mask)
            yield mask
            rest = border
            while rest:
                low = rest & -rest
                rest ^= low
                w = low.bit_length() - 1
                new = mask | low
                if new not in seen:
                    stack.append((new, (border | nbr[w]) & allowed & ~new))

    def edges_touching(mask: int) -> int:
        total = sum(nbr[v].bit_count() for v in _bits(mask))
        inside = sum((nbr[v] & mask).bit_count() for v in _bits(mask)) // 2
        return total - inside

    rank = g.m - n + _component_count(nbr, full)

    def hopeless(edges: int, nodes: int, unassigned: int) -> bool:
        cap = edges_touching(unassigned)
        for j in range(1, unassigned.bit_count() + 1):
            most = min(edges + min(cap, j * nodes + j * (j - 1) // 2), nodes + j - 1 + rank)
            if most > best[0] * (nodes + j):
                return False
        return True

    best = [Fraction(g.m, n)]  # the graph itself is a candidate

    def search(unassigned: int, piece_of: dict[int, int], pieces: list[int], edges: int):
        nodes = len(pieces)
        if nodes and Fraction(edges, nodes) > best[0]:
            best[0] = Fraction(edges, nodes)
        if not unassigned or hopeless(edges, nodes, unassigned):
            return
        u = (unassigned & -unassigned).bit_length() - 1
        for piece in sorted(connected_sets(u, unassigned), key=lambda s: -s.bit_count()):
            if not small_radius(piece):
                continue
            touching = set()
            for v in _bits(piece):
                rest = nbr[v] & ~piece & ~unassigned
                for w in _bits(rest):
                    if w in piece_of:
                        touching.add(piece_of[w])
            idx = len(pieces)
            pieces.append(piece)
            for v in _bits(piece):
                piece_of[v] = idx
            search(unassigned & ~piece, piece_of, pieces, edges + len(touching))
            for v in _bits(piece):
                del piece_of[v]
            pieces.pop()
        # delete u
        search(unassigned & ~(1 << u), piece_of, pieces, edges)

    search(full, {}, [], 0)
    return best[0]


def _bits(mask: int):
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def _component_count(nbr: list[int], mask: int) -> int:
    count = 0
    while mask:
        seen = frontier = mask & -mask
        while frontier:
            nxt = 0
            for v in _bits(frontier):
                nxt |= nbr[v]
            frontier = nxt & mask & ~seen
            seen |= frontier
        mask &= ~seen
        count += 1
    return count


def _ecc(nbr: list[int], mask: int, c: int) -> float:
    seen = 1 << c
    frontier = seen
    d = 0
    while seen != mask:
        nxt = 0
        for v in _bits(frontier):
            nxt |= nbr[v]
        nxt &= mask & ~seen
        if not nxt:
            return INF
        seen |= nxt
        frontier = nxt
        d += 1
    return d


# degree classes ----------------------------------------------------------

def low_degree_bound(threshold: int, k: int) -> Fraction:
    """Per-dominator cap on selected nodes of degree <= threshold."""
    if threshold <= 2:
        return Fraction(2 * k + 1)
    return Fraction(threshold, threshold - 2) * (threshold - 1) ** k


def high_degree_bound(threshold: int, fk_upper) -> Fraction:
    """Per-dominator cap on selected nodes of degree > threshold."""
    if threshold < 2:
        raise ValueError("threshold must be at least 2")
    return 4 * Fraction(fk_upper) / (threshold - 1)


def threshold_for(fk_upper, k: int) -> int:
    """max(2, floor(f^(1/(k+1)))), computed exactly on integers."""
    f = Fraction(fk_upper)
    t = max(2, int(math.floor(float(f) ** (1.0 / (k + 1)))))
    while t > 2 and Fraction(t) ** (k + 1) > f:
        t -= 1
    while Fraction(t + 1) ** (k + 1) <= f:
        t += 1
    return t


@dataclass
class DegreeClassCounts:
    threshold: int
    low: int
    high: int
    low_bound: Fraction
    high_bound: Fraction
    low_ok: bool
    high_ok: bool


def degree_class_counts(pruned_degree: Mapping[int, int], k: int, selected: Iterable[int],
                        dominators: Iterable[int], threshold: int, fk_upper) -> DegreeClassCounts:
    """Split the selected set by degree threshold and test both per-class caps.

    ``pruned_degree`` gives each survivor's degree in the pruned graph.
    """
    sel = list(selected)
    m = len(set(dominators))
    low = sum(1 for d in sel if pruned_degree[d] <= threshold)
    high = len(sel) - low
    lb = low_degree_bound(threshold, k) * m
    hb = high_degree_bound(threshold, fk_upper) * m
    return DegreeClassCounts(threshold, low, high, lb, hb, low <= lb, high <= hb)


def ball_max_degree(g: PortGraph, survivors: Iterable[int], v: int, r: int) -> int:
    """Max pruned-graph degree among survivors within r hops of v (in the pruned graph)."""
    V = set(survivors)
    pdeg = {u: sum(1 for w, _ in g.adj[u] if w in V) for u in V}
    seen = {v}
    frontier = [v]
    for _ in range(r):
        nxt = []
        for u in frontier:
            for w, _ in g.adj[u]:
                if w in V and w not in seen:
                    seen.add(w)
                    nxt.append(w)
        frontier = nxt
    return max(pdeg[u] for u in seen)


def selection_witnesses(g: PortGraph, survivors: Iterable[int], r: Mapping[int, int], k: int,
                        selected: Iterable[int]) -> dict[int, int | None]:
    """For each selected v, some survivor w with dist(v, w) <= k - r_w whose
    (k - r_w)-ball max degree equals v's pruned degree; None when absent."""
    V = set(survivors)
    sub_dist = {}
    pdeg = {u: sum(1 for w, _ in g.adj[u] if w in V) for u in V}

    def dist_from(w):
        if w not in sub_dist:
            dist = {w: 0}
            q = deque([w])
            while q:
                u = q.popleft()
                for x, _ in g.adj[u]:
                    if x in V and x not in dist:
                        dist[x] = dist[u] + 1
                        q.append(x)
            sub_dist[w] = dist
        return sub_dist[w]

    ballmax = {}
    for w in V:
        rad = k - r[w]
        dist = dist_from(w)
        ballmax[w] = max(pdeg[u] for u, d in dist.items() if d <= rad)
    out = {}
    for v in selected:
        out[v] = None
        for w in sorted(V):
            if dist_from(w).get(v, INF) <= k - r[w] and ballmax[w] == pdeg[v]:
                out[v] = w
                break
    return out


# ratio reports -----------------------------------------------------------

THEOREM_BOUND_ALGS = ("alg1", "alg2")


@dataclass
class RatioReport:
    family: str
    n: int
    delta: int
    k: int
    girth_lb: float
    fk_upper: Fraction | None
    alg: str
    out_size: int
    opt_lo: int
    opt_hi: int
    ratio_lo: Fraction
    bound: Fraction | None
    bound_ok: bool | None
    opt_exact: bool = False
    bound_certified: bool | None = None
    instance: str = ""

    @property
    def ratio_hi(self) -> Fraction:
        return Fraction(self.out_size, self.opt_lo) if self.opt_lo else Fraction(0)

    def row(self) -> dict[str, str]:
        def fmt(x):
            if x is None:
                return ""
            if isinstance(x, bool):
                return "true" if x else "false"
            if isinstance(x, Fraction):
                return str(x.numerator) if x.denominator == 1 else f"{float(x):.6g}"
            if isinstance(x, float) and math.isinf(x):
                return "inf"
            return str(x)

        return {col: fmt(getattr(self, col)) for col in CSV_COLUMNS}

    def as_json(self) -> dict:
        data = asdict(self)
        for key, val in data.items():
            if isinstance(val, Fraction):
                data[key] = str(val)
            elif isinstance(val, float) and math.isinf(val):
                data[key] = "inf"
        return data


CSV_COLUMNS = ["family", "n", "delta", "k", "girth_lb", "fk_upper", "alg", "out_size",
               "opt_lo", "opt_hi", "ratio_lo", "bound", "bound_ok"]


def theorem_bound(alg: str, k: int, fk_upper) -> Fraction | None:
    """Concrete ratio cap: 2k f + 1 for the pruning algorithms; for the
    3k-round pipeline the sum of the low- and high-degree caps at the
    threshold max(2, floor(f^(1/(k+1))))."""
    if fk_upper is None:
        return None
    f = Fraction(fk_upper)
    if alg in THEOREM_BOUND_ALGS:
        return 2 * k * f + 1
    if alg == "pipeline3k":
        t = threshold_for(f, k)
        return low_degree_bound(t, k) + high_degree_bound(t, f)
    return None


def ratio_report(instance, alg: str, output: Iterable[int], exact_cap: int = 30) -> RatioReport:
    """Validate ``output`` as a k-hop dominating set and bracket its ratio."""
    g, k = instance.graph, instance.k
    out = set(output)
    if not is_k_dominating(g, out, k):
        raise AssertionError(f"{alg} output of size {len(out)} is not a {k}-hop dominating set")
    if g.n <= exact_cap:
        opt = len(exact_mds(g, k, limit=exact_cap))
        lo = hi = opt
        exact = True
    else:
        lo = len(packing_lower_bound(g, k))
        hi = len(instance.planted_ds) if instance.planted_ds else len(greedy_dominating_set(g, k))
        exact = lo == hi
    bound = theorem_bound(alg, k, instance.fk_upper)
    bound_ok = None if bound is None else len(out) <= bound * hi
    certified = None if bound is None else len(out) <= bound * lo
    return RatioReport(
        family=instance.family, n=g.n, delta=g.max_degree, k=k, girth_lb=instance.girth_lb,
        fk_upper=None if instance.fk_upper is None else Fraction(instance.fk_upper),
        alg=alg, out_size=len(out), opt_lo=lo, opt_hi=hi, ratio_lo=Fraction(len(out), hi),
        bound=bound, bound_ok=bound_ok, opt_exact=exact, bound_certified=certified,
        instance=getattr(instance, "name", ""),
    )
