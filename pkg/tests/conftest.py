import networkx as nx
import pytest

from khopdom.graph_core import PortGraph

ACCEPTANCE_LINES: list[str] = []


def to_port_graph(G: nx.Graph) -> PortGraph:
    """networkx graph -> PortGraph, ports in sorted-neighbor order."""
    G = nx.convert_node_labels_to_integers(G, ordering="sorted")
    return PortGraph.from_edges(G.number_of_nodes(), sorted(tuple(sorted(e)) for e in G.edges()))


def to_nx(g: PortGraph) -> nx.Graph:
    G = nx.Graph()
    G.add_nodes_from(range(g.n))
    G.add_edges_from(g.edges())
    return G


def path(n: int) -> PortGraph:
    return PortGraph.from_edges(n, [(i, i + 1) for i in range(n - 1)])


def cycle(n: int) -> PortGraph:
    return PortGraph.from_edges(n, [(i, (i + 1) % n) for i in range(n)])


def cycle_with_pendant() -> PortGraph:
    """7-cycle 0..6 plus leaf 7 hanging off node 0."""
    return PortGraph.from_edges(8, [(i, (i + 1) % 7) for i in range(7)] + [(0, 7)])


@pytest.fixture
def record_acceptance():
    def record(number: int, title: str, ok: bool, detail: str = ""):
        line = f"acceptance {number}: {'PASS' if ok else 'FAIL'}  {title}" + (f"  [{detail}]" if detail else "")
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
