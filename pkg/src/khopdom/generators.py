"""Graph families: lower-bound gadgets, pseudoforests, alternating cycles,
planted high-girth regular graphs and their symmetric double covers."""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

from .graph_core import (
    INF,
    GraphError,
    PortGraph,
    bipartite_double_cover,
    edge_color_regular_bipartite,
    girth,
    ports_from_coloring,
)

__all__ = [
    "Instance",
    "ConstructionError",
    "validate_instance",
    "colored_tree",
    "gen_kroundlower_pair",
    "gen_pseudoforest_H",
    "gen_alternating_cycle",
    "gen_planted_regular",
    "gen_symmetric_regular",
    "gen_random_connected",
    "planted_tree_size",
    "min_planted_m",
    "regular_fk_upper",
    "FAMILIES",
]


class ConstructionError(RuntimeError):
    def __init__(self, message: str, deficient: int = 0):
        super().__init__(message)
        self.deficient = deficient


@dataclass
class Instance:
    graph: PortGraph
    k: int
    delta: int
    girth_lb: float
    planted_ds: frozenset[int] | None = None
    fk_upper: Fraction | None = None
    family: str = ""
    seed: int = 0
    meta: dict[str, Any] = field(default_factory=dict)

    @property
    def name(self) -> str:
        bits = [self.family, f"n{self.graph.n}", f"d{self.delta}", f"k{self.k}"]
        if self.seed:
            bits.append(f"s{self.seed}")
        return "-".join(bits)

    def metadata(self) -> dict[str, Any]:
        return {
            "family": self.family,
            "n": self.graph.n,
            "m": self.graph.m,
            "k": self.k,
            "delta": self.delta,
            "girth_lb": "inf" if self.girth_lb == INF else self.girth_lb,
            "planted_ds": None if self.planted_ds is None else sorted(self.planted_ds),
            "fk_upper": None if self.fk_upper is None else str(self.fk_upper),
            "seed": self.seed,
            "meta": self.meta,
        }

    @classmethod
    def from_metadata(cls, graph: PortGraph, data: dict[str, Any]) -> "Instance":
        g_lb = data.get("girth_lb", 3)
        planted = data.get("planted_ds")
        fk = data.get("fk_upper")
        return cls(
            graph=graph,
            k=int(data["k"]),
            delta=int(data.get("delta", graph.max_degree)),
            girth_lb=INF if g_lb == "inf" else g_lb,
            planted_ds=None if planted is None else frozenset(planted),
            fk_upper=None if fk is None else Fraction(fk),
            family=data.get("family", ""),
            seed=int(data.get("seed", 0)),
            meta=data.get("meta", {}),
        )


def regular_fk_upper(delta: int, k: int) -> Fraction:
    """Expansion cap delta (delta-1)^k / 2 for max-degree-delta graphs."""
    return Fraction(delta * (delta - 1) ** k, 2)


def validate_instance(inst: Instance, regular: bool = False) -> None:
    """Raise if the instance breaks its own certificate."""
    from .verify import is_k_dominating

    g = inst.graph
    if girth(g) < inst.girth_lb:
        raise ConstructionError(f"girth {girth(g)} below claimed {inst.girth_lb}")
    if inst.planted_ds is not None and not is_k_dominating(g, inst.planted_ds, inst.k):
        raise ConstructionError("planted set does not dominate")
    if regular and not g.is_regular(inst.delta):
        raise ConstructionError(f"graph is not {inst.delta}-regular")


# colored trees -----------------------------------------------------------

def colored_tree(delta: int, depth: int, root_colors: list[int]) -> tuple[list[tuple[int, int, int]], list[int]]:
    """Tree whose root has one child per color in ``root_colors`` and every
    other inner node has delta-1 children, colored so that edge colors at a
    node are distinct (the child edge colors avoid the parent edge color).

    Nodes are numbered in BFS order from 0 (the root).  Returns
    ``(edges, depth_of)`` with edges ``(parent, child, color)``.
    """
    edges: list[tuple[int, int, int]] = []
    depth_of = [0]
    parent_color = {0: None}
    frontier = [0]
    for d in range(1, depth + 1):
        nxt = []
        for u in frontier:
            if u == 0:
                colors = list(root_colors)
            else:
                colors = [c for c in range(1, delta + 1) if c != parent_color[u]]
            for c in colors:
                v = len(depth_of)
                depth_of.append(d)
                parent_color[v] = c
                edges.append((u, v, c))
                nxt.append(v)
        frontier = nxt
    return edges, depth_of


def _ports_by_color(n: int, colored_edges: list[tuple[int, int, int]]) -> PortGraph:
    """Port = rank of the edge color among the node's incident colors.

    Nodes carrying every color 1..delta get port == color; lower-degree nodes
    get the same relative order compressed to 1..deg.
    """
    incident: list[list[int]] = [[] for _ in range(n)]
    for u, v, c in colored_edges:
        incident[u].append(c)
        incident[v].append(c)
    rank = [{c: i + 1 for i, c in enumerate(sorted(cs))} for cs in incident]
    for v, cs in enumerate(incident):
        if len(set(cs)) != len(cs):
            raise GraphError(f"edge coloring is not proper at node {v}")
    return PortGraph.from_port_edges(n, [(u, rank[u][c], v, rank[v][c]) for u, v, c in colored_edges])


def gen_kroundlower_pair(delta: int, k: int) -> tuple[list[Instance], Instance]:
    """Trees that fool every (k-1)-round algorithm.

    For each color i, ``T_i`` is the (delta-1)-ary tree of depth k-1 whose
    root misses color i.  Returns the delta "double" graphs (two copies of
    T_i joined at the roots by a color-i edge) and the star graph (one copy
    of each T_i hung by a color-i edge from a fresh root).  ``meta["copies"]``
    lists the node ids of each T_i copy in a common order so that nodes can
    be matched across graphs.
    """
    if delta < 2 or k < 1:
        raise ValueError("need delta >= 2 and k >= 1")
    trees = {}
    for i in range(1, delta + 1):
        edges, depth_of = colored_tree(delta, k - 1, [c for c in range(1, delta + 1) if c != i])
        trees[i] = (edges, len(depth_of))

    pairs = []
    for i in range(1, delta + 1):
        edges, size = trees[i]
        colored = list(edges) + [(u + size, v + size, c) for u, v, c in edges]
        colored.append((0, size, i))
        g = _ports_by_color(2 * size, colored)
        inst = Instance(g, k, g.max_degree, INF, frozenset({0}), Fraction(2 * size - 1, 2 * size),
                        family="kroundlower-pair", meta={"color": i, "copies": [list(range(size)),
                                                                             list(range(size, 2 * size))]})
        pairs.append(inst)

    colored = []
    copies = {}
    offset = 1
    for i in range(1, delta + 1):
        edges, size = trees[i]
        colored += [(u + offset, v + offset, c) for u, v, c in edges]
        colored.append((0, offset, i))
        copies[i] = list(range(offset, offset + size))
        offset += size
    g = _ports_by_color(offset, colored)
    star = Instance(g, k, g.max_degree, INF, frozenset({0}), Fraction(offset - 1, offset),
                    family="kroundlower-star", meta={"copies": copies})
    return pairs, star


def tree_size(delta: int, depth: int) -> int:
    """Nodes in a depth-``depth`` tree with uniform inner degree delta."""
    return 1 + sum(delta * (delta - 1) ** (i - 1) for i in range(1, depth + 1))


planted_tree_size = tree_size


def gen_pseudoforest_H(delta: int, k: int, g: int) -> Instance:
    """g properly colored depth-k trees whose designated leaves form a g-cycle."""
    if g < 3:
        raise ValueError("cycle length g must be at least 3")
    if delta < 3 or k < 2:
        raise ValueError("need delta >= 3 and k >= 2")
    edges, depth_of = colored_tree(delta, k, list(range(1, delta + 1)))
    size = len(depth_of)
    # leftmost leaf: follow the smallest child color at every level
    children: dict[int, list[tuple[int, int]]] = {}
    for u, v, c in edges:
        children.setdefault(u, []).append((c, v))
    leaf = 0
    while leaf in children:
        leaf = min(children[leaf])[1]
    colored = []
    for t in range(g):
        colored += [(u + t * size, v + t * size, c) for u, v, c in edges]
    base = _ports_by_color(g * size, colored)
    records = list(base.port_edges())
    nxt = [base.degree(v) + 1 for v in range(base.n)]
    for t in range(g):
        a, b = t * size + leaf, ((t + 1) % g) * size + leaf
        records.append((a, nxt[a], b, nxt[b]))
        nxt[a] += 1
        nxt[b] += 1
    graph = PortGraph.from_port_edges(g * size, records)
    roots = frozenset(t * size for t in range(g))
    return Instance(graph, k, graph.max_degree, g, roots, Fraction(1), family="pseudoforest",
                    meta={"tree_size": size, "cycle_leaf": leaf, "cycle_length": g,
                          "leaf_choice": "leftmost; the analysis picks per-subtree leaves far from it"})


def gen_alternating_cycle(n: int, k: int = 1) -> Instance:
    """n-cycle with ports alternating (1,1) and (2,2) along its edges."""
    if n < 4 or n % 2:
        raise ValueError("alternating port numbering needs an even cycle length >= 4")
    records = []
    for i in range(n):
        j = (i + 1) % n
        c = 1 if i % 2 == 0 else 2
        records.append((i, c, j, c))
    graph = PortGraph.from_port_edges(n, records)
    step = 2 * k + 1
    planted = frozenset(range(0, n, step)) if n % step == 0 else None
    return Instance(graph, k, 2, n, planted, Fraction(1), family="altcycle")


# planted high-girth regular graphs ------------------------------------------

def min_planted_m(delta: int, k: int) -> int:
    """Smallest even m with m * leaves >= 2 * (radius 4k ball bound)."""
    leaves = delta * (delta - 1) ** (k - 1)
    ball = 1 + sum(delta * (delta - 1) ** (i - 1) for i in range(1, 4 * k + 1))
    m = -(-2 * ball // leaves)
    return m + (m % 2)


class _LeafGraph:
    """Mutable adjacency for the leaf-augmentation phase."""

    def __init__(self, n, edges):
        self.nbr: list[list[int]] = [[] for _ in range(n)]
        for u, v in edges:
            self.nbr[u].append(v)
            self.nbr[v].append(u)

    def add(self, u, v):
        self.nbr[u].append(v)
        self.nbr[v].append(u)

    def remove(self, u, v):
        self.nbr[u].remove(v)
        self.nbr[v].remove(u)

    def ball(self, sources, radius, skip_edge=None) -> dict[int, int]:
        dist = {s: 0 for s in sources}
        queue = deque(sources)
        while queue:
            u = queue.popleft()
            if dist[u] >= radius:
                continue
            for w in self.nbr[u]:
                if skip_edge and {u, w} == skip_edge:
                    continue
                if w not in dist:
                    dist[w] = dist[u] + 1
                    queue.append(w)
        return dist


def gen_planted_regular(delta: int, k: int, m: int, seed: int = 0, budget_factor: int = 100) -> Instance:
    """Delta-regular graph of girth >= 4k+3 containing m planted depth-k trees.

    Starts from m disjoint trees (inner degree delta) and raises the leaf
    degrees one level at a time by leaf-leaf edges.  A deficient leaf is
    joined to a random deficient leaf at distance >= g-1; when none exists,
    a leaf-leaf edge {x, y} far from two deficient leaves v, w is replaced by
    {v, x} and {w, y}.  The roots stay a k-hop dominating set throughout.
    """
    if delta < 3 or k < 1:
        raise ValueError("need delta >= 3 and k >= 1")
    if m % 2 or m < min_planted_m(delta, k):
        raise ValueError(f"m must be even and >= {min_planted_m(delta, k)} for delta={delta}, k={k}")
    rng = random.Random(seed)
    g_min = 4 * k + 3
    edges, depth_of = colored_tree(delta, k, list(range(1, delta + 1)))
    size = len(depth_of)
    tree_edges = []
    for t in range(m):
        tree_edges += [(u + t * size, v + t * size) for u, v, _ in edges]
    n = m * size
    leaves = [t * size + v for t in range(m) for v in range(size) if depth_of[v] == k]
    G = _LeafGraph(n, tree_edges)
    added: list[tuple[int, int]] = []  # leaf-leaf edges in insertion order
    added_set: set[frozenset[int]] = set()
    budget = budget_factor * n
    moves = 0

    for level in range(2, delta + 1):
        deficient = set(leaves)
        while deficient:
            moves += 1
            if moves > budget:
                raise ConstructionError(
                    f"iteration budget {budget} exhausted with {len(deficient)} deficient leaves; "
                    "retry with a larger m or another seed", deficient=len(deficient))
            order = sorted(deficient)
            u = rng.choice(order)
            near = G.ball([u], g_min - 2)
            options = [x for x in order if x != u and x not in near]
            if options:
                x = rng.choice(options)
                G.add(u, x)
                added.append((u, x))
                added_set.add(frozenset((u, x)))
                deficient -= {u, x}
                continue
            # swap move: v = u, w another deficient leaf
            w = rng.choice([x for x in order if x != u])
            near = G.ball([u, w], g_min - 2)
            swaps = [e for e in added if e[0] not in near and e[1] not in near]
            if not swaps:
                continue
            x, y = rng.choice(swaps)
            if rng.random() < 0.5:
                x, y = y, x
            G.remove(x, y)
            G.add(u, x)
            G.add(w, y)
            if _closes_short_cycle(G, [(u, x), (w, y)], g_min):
                G.remove(u, x)
                G.remove(w, y)
                G.add(x, y)
                continue
            idx = added.index((x, y)) if (x, y) in added else added.index((y, x))
            added.pop(idx)
            added_set.discard(frozenset((x, y)))
            for e in ((u, x), (w, y)):
                added.append(e)
                added_set.add(frozenset(e))
            deficient -= {u, w}

    # ports: tree edges by color, then leaf-leaf edges in insertion order
    colored = []
    for t in range(m):
        colored += [(u + t * size, v + t * size, c) for u, v, c in edges]
    base = _ports_by_color(n, colored)
    records = list(base.port_edges())
    nxt = [base.degree(v) + 1 for v in range(n)]
    for a, b in added:
        records.append((a, nxt[a], b, nxt[b]))
        nxt[a] += 1
        nxt[b] += 1
    graph = PortGraph.from_port_edges(n, records)
    roots = frozenset(t * size for t in range(m))
    inst = Instance(graph, k, delta, g_min, roots, regular_fk_upper(delta, k), family="planted",
                    seed=seed, meta={"m": m, "tree_size": size, "moves": moves})
    validate_instance(inst, regular=True)
    return inst


def _closes_short_cycle(G: _LeafGraph, new_edges, g_min: int) -> bool:
    for a, b in new_edges:
        dist = G.ball([a], g_min - 2, skip_edge={a, b})
        if b in dist:
            return True
    return False


def gen_symmetric_regular(delta: int, k: int, m: int, seed: int = 0) -> Instance:
    """Planted graph -> bipartite double cover -> ports from a delta-edge-coloring.

    Every node then has the same view at every depth.
    """
    base = gen_planted_regular(delta, k, m, seed)
    cover = bipartite_double_cover(base.graph)
    coloring = edge_color_regular_bipartite(cover, delta)
    graph = ports_from_coloring(cover, coloring)
    n = base.graph.n
    planted = frozenset(base.planted_ds) | frozenset(v + n for v in base.planted_ds)
    inst = Instance(graph, k, delta, base.girth_lb, planted, base.fk_upper, family="symmetric",
                    seed=seed, meta={"m": m, "base_n": n})
    validate_instance(inst, regular=True)
    return inst


def gen_random_connected(n: int, edge_budget: int, seed: int = 0) -> Instance:
    """Random connected simple graph with exactly ``edge_budget`` edges and
    shuffled ports."""
    if n < 1:
        raise ValueError("n must be positive")
    if edge_budget < n - 1:
        raise ValueError("edge budget below n-1 cannot connect the graph")
    if edge_budget > n * (n - 1) // 2:
        raise ValueError(f"edge budget {edge_budget} exceeds n(n-1)/2 = {n * (n - 1) // 2}")
    rng = random.Random(seed)
    order = list(range(n))
    rng.shuffle(order)
    edges = set()
    for i in range(1, n):
        u, v = order[i], order[rng.randrange(i)]
        edges.add((min(u, v), max(u, v)))
    if edge_budget - len(edges) > (n * (n - 1) // 2) // 2:
        pool = [(u, v) for u in range(n) for v in range(u + 1, n) if (u, v) not in edges]
        edges.update(rng.sample(pool, edge_budget - len(edges)))
    while len(edges) < edge_budget:
        u, v = rng.sample(range(n), 2)
        edges.add((min(u, v), max(u, v)))
    incident: list[list[int]] = [[] for _ in range(n)]
    for u, v in sorted(edges):
        incident[u].append(v)
        incident[v].append(u)
    port = {}
    for v in range(n):
        nbrs = incident[v][:]
        rng.shuffle(nbrs)
        for p, w in enumerate(nbrs, start=1):
            port[v, w] = p
    records = [(u, port[u, v], v, port[v, u]) for u, v in sorted(edges)]
    graph = PortGraph.from_port_edges(n, records)
    return Instance(graph, 1, graph.max_degree, girth(graph), None, None, family="fuzz", seed=seed,
                    meta={"edge_budget": edge_budget})


FAMILIES = ("kroundlower", "pseudoforest", "altcycle", "planted", "symmetric", "fuzz")
