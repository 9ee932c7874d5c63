"""Port-numbered undirected graphs and the classical algorithms built on them.

Ports are 1-based everywhere in the public API: port ``p`` of node ``v`` is
``g.adj[v][p - 1]``, a ``(neighbor, reverse_port)`` pair.  Node ids are the
contiguous integers ``0..n-1``.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from typing import Iterable, Sequence

__all__ = [
    "GraphError",
    "PortGraph",
    "INF",
    "bfs_distances",
    "multi_source_distances",
    "girth",
    "is_connected",
    "bipartition",
    "bipartite_double_cover",
    "edge_color_regular_bipartite",
    "ports_from_coloring",
    "induced_subgraph",
    "read_graph",
    "write_graph",
    "parse_graph",
    "format_graph",
]

INF = math.inf


class GraphError(ValueError):
    """Invalid graph, invalid node id, or a violated precondition."""


@dataclass(frozen=True)
class PortGraph:
    """Immutable port-labeled simple graph.

    ``adj[v]`` lists ``(w, q)`` in port order: the entry at index ``p - 1``
    says port ``p`` of ``v`` leads to ``w``, arriving on ``w``'s port ``q``.
    """

    adj: tuple[tuple[tuple[int, int], ...], ...]

    def __post_init__(self):
        _check_ports(self.adj)

    # construction -----------------------------------------------------

    @classmethod
    def from_port_edges(cls, n: int, edges: Iterable[tuple[int, int, int, int]]) -> "PortGraph":
        """Build from ``(u, p, v, q)`` records: edge {u,v}, port p at u, port q at v."""
        slots: list[dict[int, tuple[int, int]]] = [{} for _ in range(n)]
        for u, p, v, q in edges:
            for node in (u, v):
                if not 0 <= node < n:
                    raise GraphError(f"node id {node} out of range 0..{n - 1}")
            if u == v:
                raise GraphError(f"self-loop at node {u}")
            if p in slots[u]:
                raise GraphError(f"port {p} used twice at node {u}")
            if q in slots[v]:
                raise GraphError(f"port {q} used twice at node {v}")
            slots[u][p] = (v, q)
            slots[v][q] = (u, p)
        adj = []
        for v, ports in enumerate(slots):
            if sorted(ports) != list(range(1, len(ports) + 1)):
                raise GraphError(f"ports at node {v} are {sorted(ports)}, not 1..{len(ports)}")
            adj.append(tuple(ports[p] for p in range(1, len(ports) + 1)))
        return cls(tuple(adj))

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]]) -> "PortGraph":
        """Build from plain edges; ports are assigned in insertion order."""
        nxt = [1] * n
        records = []
        for u, v in edges:
            if not (0 <= u < n and 0 <= v < n):
                raise GraphError(f"edge ({u}, {v}) out of range for n={n}")
            records.append((u, nxt[u], v, nxt[v]))
            nxt[u] += 1
            nxt[v] += 1
        return cls.from_port_edges(n, records)

    # queries ----------------------------------------------------------

    @property
    def n(self) -> int:
        return len(self.adj)

    @property
    def m(self) -> int:
        return sum(len(a) for a in self.adj) // 2

    def degree(self, v: int) -> int:
        return len(self.adj[v])

    def degrees(self) -> list[int]:
        return [len(a) for a in self.adj]

    @property
    def max_degree(self) -> int:
        return max((len(a) for a in self.adj), default=0)

    def neighbors(self, v: int) -> list[int]:
        return [w for w, _ in self.adj[v]]

    def port_target(self, v: int, p: int) -> tuple[int, int]:
        return self.adj[v][p - 1]

    def port_to(self, v: int, w: int) -> int:
        for i, (x, _) in enumerate(self.adj[v]):
            if x == w:
                return i + 1
        raise GraphError(f"{v} and {w} are not adjacent")

    def has_edge(self, u: int, v: int) -> bool:
        return any(x == v for x, _ in self.adj[u])

    def port_edges(self) -> list[tuple[int, int, int, int]]:
        """Each edge once as ``(u, p, v, q)`` with ``u < v``, sorted."""
        out = []
        for u, ports in enumerate(self.adj):
            for i, (v, q) in enumerate(ports):
                if u < v:
                    out.append((u, i + 1, v, q))
        return sorted(out)

    def edges(self) -> list[tuple[int, int]]:
        return [(u, v) for u, _, v, _ in self.port_edges()]

    def check_node(self, v: int) -> None:
        if not isinstance(v, int) or not 0 <= v < self.n:
            raise GraphError(f"invalid node id {v!r} for graph with {self.n} nodes")

    def is_regular(self, delta: int | None = None) -> bool:
        degs = set(self.degrees())
        if delta is None:
            return len(degs) <= 1
        return degs <= {delta}


def _check_ports(adj) -> None:
    n = len(adj)
    for v, ports in enumerate(adj):
        seen = set()
        for p, (w, q) in enumerate(ports, start=1):
            if not 0 <= w < n:
                raise GraphError(f"port {p} of node {v} leads to invalid node {w}")
            if w == v:
                raise GraphError(f"self-loop at node {v}")
            if w in seen:
                raise GraphError(f"parallel edge {v}-{w}")
            seen.add(w)
            if not 1 <= q <= len(adj[w]) or adj[w][q - 1] != (v, p):
                raise GraphError(f"asymmetric ports on edge {v}:{p} -> {w}:{q}")


# distances -------------------------------------------------------------

def bfs_distances(g: PortGraph, source: int) -> list[float]:
    """Hop distances from ``source``; unreachable nodes get ``INF``."""
    g.check_node(source)
    return multi_source_distances(g, [source])


def multi_source_distances(g: PortGraph, sources: Iterable[int], limit: float = INF) -> list[float]:
    dist: list[float] = [INF] * g.n
    queue = deque()
    for s in sources:
        g.check_node(s)
        if dist[s] != 0:
            dist[s] = 0
            queue.append(s)
    while queue:
        u = queue.popleft()
        du = dist[u]
        if du >= limit:
            continue
        for w, _ in g.adj[u]:
            if dist[w] == INF:
                dist[w] = du + 1
                queue.append(w)
    return dist


def is_connected(g: PortGraph) -> bool:
    if g.n == 0:
        return True
    return all(d != INF for d in bfs_distances(g, 0))


def girth(g: PortGraph) -> float:
    """Length of a shortest cycle, ``INF`` for forests.

    BFS from every node; the first non-tree edge {u, w} seen from root s
    closes a walk of length dist[u] + dist[w] + 1, and the minimum over all
    roots is exactly the girth.
    """
    best = INF
    n = g.n
    for s in range(n):
        dist = [-1] * n
        parent = [-1] * n
        dist[s] = 0
        queue = deque([s])
        while queue:
            u = queue.popleft()
            if 2 * dist[u] >= best:
                break
            for w, _ in g.adj[u]:
                if dist[w] < 0:
                    dist[w] = dist[u] + 1
                    parent[w] = u
                    queue.append(w)
                elif parent[u] != w:
                    best = min(best, dist[u] + dist[w] + 1)
    return best


def bipartition(g: PortGraph) -> list[int] | None:
    """Side (0/1) per node, or None if the graph has an odd cycle."""
    side = [-1] * g.n
    for s in range(g.n):
        if side[s] >= 0:
            continue
        side[s] = 0
        queue = deque([s])
        while queue:
            u = queue.popleft()
            for w, _ in g.adj[u]:
                if side[w] < 0:
                    side[w] = 1 - side[u]
                    queue.append(w)
                elif side[w] == side[u]:
                    return None
    return side


def induced_subgraph(g: PortGraph, nodes: Iterable[int]) -> tuple[PortGraph, list[int]]:
    """Subgraph induced by ``nodes``, renumbered; returns (graph, new->old ids).

    Ports are compressed: surviving ports of each node keep their relative order.
    """
    keep = sorted(set(nodes))
    index = {v: i for i, v in enumerate(keep)}
    rank = {}
    for v in keep:
        r = 0
        for p, (w, _) in enumerate(g.adj[v], start=1):
            if w in index:
                r += 1
                rank[v, p] = r
    records = []
    for v in keep:
        for p, (w, q) in enumerate(g.adj[v], start=1):
            if w in index and v < w:
                records.append((index[v], rank[v, p], index[w], rank[w, q]))
    return PortGraph.from_port_edges(len(keep), records), keep


# lifts and colorings -----------------------------------------------------

def bipartite_double_cover(g: PortGraph) -> PortGraph:
    """Two-copy lift: node v becomes v (copy 1) and v + n (copy 2).

    Edge {v, w} with ports (p, q) becomes {v1, w2} and {v2, w1}, both keeping
    ports (p, q), so every node keeps its original port layout.
    """
    n = g.n
    records = []
    for v, p, w, q in g.port_edges():
        records.append((v, p, w + n, q))
        records.append((v + n, p, w, q))
    return PortGraph.from_port_edges(2 * n, records)


def _perfect_matching(left: Sequence[int], nbrs: dict[int, list[int]]) -> dict[int, int]:
    """Kuhn's augmenting-path matching, scanning ids in ascending order.

    Returns a map left -> right; raises RuntimeError if it is not perfect.
    """
    match_right: dict[int, int] = {}

    def augment(root: int) -> bool:
        visited = set()
        stack = [(root, iter(nbrs[root]))]
        path: list[int] = []  # path[i] is the right node taken from stack[i]
        while stack:
            _, it = stack[-1]
            for r in it:
                if r in visited:
                    continue
                visited.add(r)
                path.append(r)
                if r not in match_right:
                    for (u, _), rr in zip(stack, path):
                        match_right[rr] = u
                    return True
                stack.append((match_right[r], iter(nbrs[match_right[r]])))
                break
            else:
                stack.pop()
                if path:
                    path.pop()
        return False

    for root in left:
        if not augment(root):
            raise RuntimeError(f"no augmenting path from node {root}; matching is not perfect")
    return {u: r for r, u in match_right.items()}


def edge_color_regular_bipartite(g: PortGraph, delta: int) -> dict[tuple[int, int], int]:
    """Proper edge coloring of a delta-regular bipartite graph with colors 1..delta.

    Peels off one perfect matching per color.  Keys are edges ``(u, v)`` with
    ``u < v``.
    """
    side = bipartition(g)
    if side is None:
        raise GraphError("graph is not bipartite")
    if not g.is_regular(delta):
        raise GraphError(f"graph is not {delta}-regular")
    left = [v for v in range(g.n) if side[v] == 0]
    remaining = {v: sorted(g.neighbors(v)) for v in left}
    coloring: dict[tuple[int, int], int] = {}
    for color in range(1, delta + 1):
        matching = _perfect_matching(left, remaining)
        for u, r in matching.items():
            coloring[min(u, r), max(u, r)] = color
            remaining[u].remove(r)
    return coloring


def ports_from_coloring(g: PortGraph, coloring: dict[tuple[int, int], int]) -> PortGraph:
    """Renumber ports so that both endpoints of each edge use the edge's color."""
    if not g.is_regular():
        raise GraphError("port-by-color numbering needs a regular graph")
    delta = g.max_degree
    records = []
    for u, v in g.edges():
        c = coloring.get((u, v), coloring.get((v, u)))
        if c is None or not 1 <= c <= delta:
            raise GraphError(f"edge ({u}, {v}) has no color in 1..{delta}")
        records.append((u, c, v, c))
    return PortGraph.from_port_edges(g.n, records)


# file format -----------------------------------------------------------

def format_graph(g: PortGraph) -> str:
    lines = [f"{g.n} {g.m}"]
    lines += [f"{u} {p} {v} {q}" for u, p, v, q in g.port_edges()]
    return "\n".join(lines) + "\n"


def parse_graph(text: str) -> PortGraph:
    rows = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            rows.append(line.split())
    if not rows or len(rows[0]) != 2:
        raise GraphError("graph file must start with a line 'n m'")
    n, m = map(int, rows[0])
    body = rows[1:]
    if len(body) != m:
        raise GraphError(f"header announces {m} edges, found {len(body)}")
    records = []
    for row in body:
        if len(row) != 4:
            raise GraphError(f"bad edge line {' '.join(row)!r}; expected 'u p v q'")
        records.append(tuple(map(int, row)))
    return PortGraph.from_port_edges(n, records)


def read_graph(path) -> PortGraph:
    with open(path) as fh:
        return parse_graph(fh.read())


def write_graph(g: PortGraph, path) -> None:
    with open(path, "w") as fh:
        fh.write(format_graph(g))
