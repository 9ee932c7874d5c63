import io
import json

import networkx as nx
import pytest

from khopdom.algorithms import alg1_prune
from khopdom.generators import gen_alternating_cycle, gen_kroundlower_pair, gen_random_connected
from khopdom.graph_core import PortGraph, edge_color_regular_bipartite, ports_from_coloring
from khopdom.simulator import (
    NodeProgram,
    SimulationError,
    assert_symmetric_run,
    degree_bits,
    run,
    view,
    view_classes,
    write_trace,
)

from conftest import cycle, path, to_port_graph
from programs import RandomProgram, ViewGather


class Silent(NodeProgram):
    def init(self, degree, local_input=None):
        return degree


class Echo(NodeProgram):
    """Round 1 sends a byte on every port; later rounds bounce the inbox back."""

    def init(self, degree, local_input=None):
        return {"degree": degree, "inbox": {}}

    def send(self, state, rnd):
        if rnd == 1:
            return state, {p: bytes([p]) for p in range(1, state["degree"] + 1)}
        return state, dict(state["inbox"])

    def receive(self, state, rnd, inbox):
        return {"degree": state["degree"], "inbox": dict(inbox)}

    def finalize(self, state):
        return sorted(state["inbox"].items())


class BadPort(NodeProgram):
    def init(self, degree, local_input=None):
        return degree

    def send(self, state, rnd):
        return state, {state + 1: b"x"}


class Counter(NodeProgram):
    """Records how many messages had arrived when each outbox was built."""

    def init(self, degree, local_input=None):
        return {"degree": degree, "got": 0, "seen_at_send": []}

    def send(self, state, rnd):
        state["seen_at_send"].append(state["got"])
        return state, {p: b"" for p in range(1, state["degree"] + 1)}

    def receive(self, state, rnd, inbox):
        state["got"] += len(inbox)
        return state

    def finalize(self, state):
        return state["seen_at_send"]


def test_silent_program():
    result = run(cycle(6), Silent(), 5)
    assert result.total_messages == 0
    assert result.max_message_bits == 0
    assert result.rounds_executed == 5
    assert len(result.message_log) == 5


def test_echo_on_three_path():
    result = run(path(3), Echo(), 2)
    assert result.message_log[0] == [(0, 1, b"\x01"), (1, 1, b"\x01"), (1, 2, b"\x02"), (2, 1, b"\x01")]
    # round 2 bounces each received payload back on the port it came in on
    assert result.message_log[1] == [(0, 1, b"\x01"), (1, 1, b"\x01"), (1, 2, b"\x01"), (2, 1, b"\x02")]
    assert result.outputs[0] == [(1, b"\x01")]
    assert result.outputs[1] == [(1, b"\x01"), (2, b"\x02")]
    assert result.max_message_bits == 8


def test_alg1_on_five_path():
    result = run(path(5), alg1_prune(2), 1)
    assert result.selected() == {2}


def test_bad_port_identifies_node_and_round():
    with pytest.raises(SimulationError) as info:
        run(path(2), BadPort(), 1)
    assert info.value.node == 0 and info.value.round == 1


def test_negative_rounds_rejected():
    with pytest.raises(ValueError):
        run(path(2), Silent(), -1)


def test_lockstep_causality():
    result = run(cycle(5), Counter(), 3)
    for out in result.outputs.values():
        assert out == [0, 2, 4]


def test_message_arrives_on_reverse_port():
    g = PortGraph.from_port_edges(3, [(0, 1, 1, 2), (1, 1, 2, 1)])

    class Tag(NodeProgram):
        def init(self, degree, local_input=None):
            return {}

        def send(self, state, rnd):
            return state, ({1: b"a"} if state == {} and rnd == 1 else {})

        def receive(self, state, rnd, inbox):
            return dict(inbox) if rnd == 1 else state

        def finalize(self, state):
            return state

    out = run(g, Tag(), 1).outputs
    assert out[1] == {2: b"a", 1: b"a"}
    assert out[2] == {1: b"a"}


def test_determinism():
    inst = gen_random_connected(25, 40, seed=3)
    a = run(inst.graph, RandomProgram(7), 4)
    b = run(inst.graph, RandomProgram(7), 4)
    assert a == b


def test_inputs_are_passed_to_init():
    class Echoed(Silent):
        def init(self, degree, local_input=None):
            return local_input

        def finalize(self, state):
            return state

    assert run(path(2), Echoed(), 0, inputs={1: "x"}).outputs == {0: None, 1: "x"}


def test_messages_per_direction():
    counts = run(path(3), Echo(), 2).messages_per_direction()
    assert counts == {(0, 1): 2, (1, 1): 2, (1, 2): 2, (2, 1): 2}


def test_degree_bits():
    assert [degree_bits(d) for d in (0, 1, 2, 3, 4, 7, 8)] == [1, 1, 2, 2, 3, 3, 4]


# views ------------------------------------------------------------------

def test_depth_zero_view_is_degree():
    assert view(path(3), 1, 0) == (2, ())


def test_alternating_four_cycle_views_equal():
    g = gen_alternating_cycle(4).graph
    assert len({view(g, v, 3) for v in range(4)}) == 1
    assert len(set(view_classes(g, 3))) == 1


def test_view_classes_match_views():
    inst = gen_random_connected(15, 20, seed=1)
    g = inst.graph
    classes = view_classes(g, 3)
    views = [view(g, v, 3) for v in range(g.n)]
    for u in range(g.n):
        for v in range(g.n):
            assert (classes[u] == classes[v]) == (views[u] == views[v])


def test_shared_table_compares_across_graphs():
    pairs, star = gen_kroundlower_pair(3, 2)
    table: dict = {}
    star_cls = view_classes(star.graph, 1, table)
    for inst in pairs:
        pair_cls = view_classes(inst.graph, 1, table)
        copy = inst.meta["copies"][0]
        for a, b in zip(copy, star.meta["copies"][inst.meta["color"]]):
            assert pair_cls[a] == star_cls[b]
            assert view(inst.graph, a, 1) == view(star.graph, b, 1)


def test_view_gather_equals_view():
    for seed in range(5):
        g = gen_random_connected(12, 16, seed=seed).graph
        for depth in range(4):
            outs = run(g, ViewGather(), depth).outputs
            assert all(outs[v] == view(g, v, depth) for v in range(g.n))


def test_symmetric_run_examples():
    g = to_port_graph(nx.complete_bipartite_graph(3, 3))
    colored = ports_from_coloring(g, edge_color_regular_bipartite(g, 3))
    assert assert_symmetric_run(colored, RandomProgram(1), 4)
    assert not assert_symmetric_run(path(3), alg1_prune(2), 1)
    assert assert_symmetric_run(PortGraph.from_edges(1, []), RandomProgram(2), 3)


# traces -------------------------------------------------------------------

def test_trace_format():
    result = run(path(3), Echo(), 2)
    buf = io.StringIO()
    write_trace(result, buf)
    records = [json.loads(line) for line in buf.getvalue().splitlines()]
    assert [r.get("round") for r in records[:2]] == [1, 2]
    assert records[0]["messages"][0] == [0, 1, "01"]
    assert set(records[-1]["outputs"]) == {"0", "1", "2"}
