"""Synchronous round simulator for the anonymous port-numbering model.

A node program never sees node ids.  Each round every node first computes
its outbox from its current state (``send``), then all messages are
delivered at once and every node folds its inbox into its state
(``receive``).  ``finalize`` runs once after the round budget.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Mapping

from .graph_core import PortGraph

__all__ = [
    "NodeProgram",
    "RunResult",
    "SimulationError",
    "run",
    "view",
    "view_classes",
    "assert_symmetric_run",
    "write_trace",
    "degree_bits",
]


class SimulationError(RuntimeError):
    def __init__(self, message: str, node: int | None = None, round: int | None = None):
        super().__init__(message)
        self.node = node
        self.round = round


class NodeProgram:
    """Base class for node programs.

    Subclasses override ``init``, ``send``, ``receive`` and ``finalize``.
    ``local_input`` is whatever the harness hands a node before round 1
    (for instance the output of a previous algorithm); it never carries ids.
    Inbox and outbox map 1-based ports to ``bytes``.  An empty ``bytes``
    object is a present zero-length message.
    """

    name = "program"

    def init(self, degree: int, local_input: Any = None) -> Any:
        return None

    def send(self, state: Any, rnd: int) -> tuple[Any, dict[int, bytes]]:
        return state, {}

    def receive(self, state: Any, rnd: int, inbox: dict[int, bytes]) -> Any:
        return state

    def finalize(self, state: Any) -> Any:
        return state

    def payload_bits(self, payload: bytes, max_degree: int) -> int:
        return 8 * len(payload)


def degree_bits(max_degree: int) -> int:
    """Bits needed for a value in 0..max_degree."""
    return max(1, math.ceil(math.log2(max_degree + 1)))


@dataclass
class RunResult:
    outputs: dict[int, Any]
    rounds_executed: int
    message_log: list[list[tuple[int, int, bytes]]]
    max_message_bits: int
    total_messages: int
    final_states: list[Any] | None = field(default=None, repr=False)

    def selected(self) -> set[int]:
        """Nodes whose output is exactly ``True``."""
        return {v for v, out in self.outputs.items() if out is True}

    def messages_per_direction(self) -> dict[tuple[int, int], int]:
        counts: dict[tuple[int, int], int] = {}
        for entries in self.message_log:
            for sender, port, _ in entries:
                counts[sender, port] = counts.get((sender, port), 0) + 1
        return counts


def run(
    g: PortGraph,
    prog: NodeProgram,
    rounds: int,
    inputs: Mapping[int, Any] | None = None,
    observer: Callable[[int, list[Any]], None] | None = None,
    keep_states: bool = False,
) -> RunResult:
    """Run ``prog`` on every node of ``g`` for exactly ``rounds`` rounds.

    ``observer(r, states)`` is called after round r completes (and with r=0
    after init).
    """
    if rounds < 0:
        raise ValueError("rounds must be nonnegative")
    n = g.n
    inputs = inputs or {}
    states = [prog.init(g.degree(v), inputs.get(v)) for v in range(n)]
    if observer is not None:
        observer(0, states)
    log: list[list[tuple[int, int, bytes]]] = []
    max_bits = 0
    total = 0
    delta = g.max_degree
    for rnd in range(1, rounds + 1):
        outboxes = []
        for v in range(n):
            states[v], out = prog.send(states[v], rnd)
            for p in out:
                if not (isinstance(p, int) and 1 <= p <= g.degree(v)):
                    raise SimulationError(
                        f"node {v} sent on nonexistent port {p} in round {rnd}", node=v, round=rnd
                    )
            outboxes.append(out)
        inboxes: list[dict[int, bytes]] = [{} for _ in range(n)]
        entries = []
        for v, out in enumerate(outboxes):
            for p in sorted(out):
                payload = bytes(out[p])
                w, q = g.adj[v][p - 1]
                inboxes[w][q] = payload
                entries.append((v, p, payload))
                max_bits = max(max_bits, prog.payload_bits(payload, delta))
        total += len(entries)
        log.append(entries)
        for v in range(n):
            states[v] = prog.receive(states[v], rnd, inboxes[v])
        if observer is not None:
            observer(rnd, states)
    outputs = {v: prog.finalize(states[v]) for v in range(n)}
    return RunResult(
        outputs=outputs,
        rounds_executed=rounds,
        message_log=log,
        max_message_bits=max_bits,
        total_messages=total,
        final_states=list(states) if keep_states else None,
    )


def assert_symmetric_run(
    g: PortGraph, prog: NodeProgram, rounds: int, inputs: Mapping[int, Any] | None = None
) -> bool:
    """True iff all node states coincide after init and after every round."""
    symmetric = True

    def check(_rnd, states):
        nonlocal symmetric
        if states and any(s != states[0] for s in states[1:]):
            symmetric = False

    run(g, prog, rounds, inputs=inputs, observer=check)
    return symmetric


# views -----------------------------------------------------------------

def view(g: PortGraph, v: int, depth: int):
    """Depth-``depth`` port-labeled unfolding of ``g`` at ``v``.

    A view is ``(degree, children)`` where children is a tuple of
    ``(local_port, remote_port, subview)`` in local-port order.  Two views
    are equal iff the unfoldings are isomorphic as port-labeled rooted trees.
    """
    g.check_node(v)
    memo: dict[tuple[int, int], tuple] = {}

    def unfold(u: int, d: int):
        key = (u, d)
        if key not in memo:
            if d == 0:
                memo[key] = (g.degree(u), ())
            else:
                memo[key] = (
                    g.degree(u),
                    tuple((p, q, unfold(w, d - 1)) for p, (w, q) in enumerate(g.adj[u], start=1)),
                )
        return memo[key]

    return unfold(v, depth)


def view_classes(g: PortGraph, depth: int, table: dict | None = None) -> list[int]:
    """Per-node integer id of the depth-``depth`` view.

    Ids are hash-consed through ``table``; passing the same table for several
    graphs makes ids comparable across them.  Equal ids iff equal views.
    """
    if table is None:
        table = {}

    def intern(key):
        if key not in table:
            table[key] = len(table)
        return table[key]

    cls = [intern((g.degree(v), ())) for v in range(g.n)]
    for _ in range(depth):
        cls = [
            intern((g.degree(v), tuple((p, q, cls[w]) for p, (w, q) in enumerate(g.adj[v], start=1))))
            for v in range(g.n)
        ]
    return cls


# trace dump ------------------------------------------------------------

def _jsonable(value):
    if isinstance(value, (bool, int, float, str)) or value is None:
        return value
    return repr(value)


def write_trace(result: RunResult, fh) -> None:
    """JSON lines: one record per round, then one record with the outputs."""
    for rnd, entries in enumerate(result.message_log, start=1):
        record = {"round": rnd, "messages": [[s, p, payload.hex()] for s, p, payload in entries]}
        fh.write(json.dumps(record) + "\n")
    outputs = {str(v): _jsonable(out) for v, out in sorted(result.outputs.items())}
    fh.write(json.dumps({"outputs": outputs}) + "\n")
