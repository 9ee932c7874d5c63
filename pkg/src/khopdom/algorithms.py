"""Node programs for pruning-based k-hop domination.

Every program here runs unchanged under :func:`khopdom.simulator.run`.
Pruning messages ("del") are present zero-length payloads.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .simulator import NodeProgram, degree_bits

__all__ = [
    "PruneState",
    "DistanceAwareState",
    "SelectState",
    "PipelineState",
    "Alg1Prune",
    "Alg2PruneWithFallback",
    "Alg3DistanceAware",
    "Alg4Select",
    "Pipeline3k",
    "alg1_prune",
    "alg2_prune_with_fallback",
    "alg3_distance_aware",
    "alg4_select",
    "pipeline_3k",
    "handoff",
    "ALGORITHMS",
    "round_budget",
]

DEL = b""


def encode_value(x: int) -> bytes:
    return x.to_bytes(max(1, (x.bit_length() + 7) // 8), "big")


def decode_value(payload: bytes) -> int:
    return int.from_bytes(payload, "big")


@dataclass
class PruneState:
    degree: int
    received: dict[int, int] = field(default_factory=dict)  # port -> round "del" arrived
    sent_round: int | None = None
    sent_port: int | None = None

    def live_ports(self) -> list[int]:
        return [p for p in range(1, self.degree + 1) if p not in self.received]

    @property
    def sent(self) -> bool:
        return self.sent_round is not None

    def mutual(self) -> bool:
        """Sent "del" and received one in that same round."""
        return self.sent and self.sent_round in self.received.values()


@dataclass
class DistanceAwareState(PruneState):
    r: int = 0


@dataclass
class PruneWithFallbackState(PruneState):
    alg1_true: bool | None = None


def _prune_send(state: PruneState, rnd: int) -> dict[int, bytes]:
    if state.sent:
        return {}
    live = state.live_ports()
    if len(live) != 1:
        return {}
    state.sent_round = rnd
    state.sent_port = live[0]
    return {live[0]: DEL}


def _alg1_verdict(state: PruneState) -> bool:
    return not (state.sent or len(state.live_ports()) == 1)


class _PruneBase(NodeProgram):
    state_cls = PruneState

    def __init__(self, k: int):
        if k < 1:
            raise ValueError("k must be a positive integer")
        self.k = k

    def __repr__(self):
        return f"{type(self).__name__}(k={self.k})"

    def __eq__(self, other):
        return type(self) is type(other) and self.k == other.k

    def __hash__(self):
        return hash((type(self).__name__, self.k))

    def init(self, degree, local_input=None):
        return self.state_cls(degree)

    def send(self, state, rnd):
        return state, _prune_send(state, rnd)

    def receive(self, state, rnd, inbox):
        for p in inbox:
            state.received[p] = rnd
        return state


class Alg1Prune(_PruneBase):
    """k-1 rounds of degree-1 deletion; True on the pruned node set."""

    name = "alg1"

    @property
    def rounds(self) -> int:
        return self.k - 1

    def finalize(self, state):
        return _alg1_verdict(state)


class Alg2PruneWithFallback(_PruneBase):
    """Pruning plus one extra round that re-adds the last deleted pair on trees."""

    name = "alg2"
    state_cls = PruneWithFallbackState

    @property
    def rounds(self) -> int:
        return self.k

    def send(self, state, rnd):
        if rnd == self.k:
            state.alg1_true = _alg1_verdict(state)
            # in the last round only nodes whose pruning verdict is false and
            # that never sent "del" may send; that is the same degree-1 rule
        return state, _prune_send(state, rnd)

    def finalize(self, state):
        return bool(state.alg1_true) or state.mutual()


class Alg3DistanceAware(_PruneBase):
    """k pruning rounds; outputs None for deleted nodes, else r_v in 0..k."""

    name = "alg3"
    state_cls = DistanceAwareState

    @property
    def rounds(self) -> int:
        return self.k

    def receive(self, state, rnd, inbox):
        state = super().receive(state, rnd, inbox)
        if inbox:
            state.r = rnd
        return state

    def finalize(self, state):
        if state.sent and not state.mutual():
            return None
        return state.r


def handoff(state: DistanceAwareState) -> tuple[int, frozenset[int]] | None:
    """Local input for the selection phase: (r_v, ports that delivered "del")."""
    if state.sent and not state.mutual():
        return None
    return state.r, frozenset(state.received)


@dataclass
class SelectState:
    degree: int
    active: bool
    r: int = 0
    levels: list[int] = field(default_factory=list)  # levels[j] = max degree within j hops
    ports: list[int] = field(default_factory=lambda: [0])  # ports[j] = port that raised level j
    token: int | None = None
    self_token: int | None = None


class Alg4Select(NodeProgram):
    """2k-round selection: flood max degrees, then route tokens toward them.

    Local input per node is ``(r_v, del_ports)`` from :func:`handoff`, or
    None for nodes that do not participate.  Port 0 denotes the node itself.
    """

    name = "alg4"

    def __init__(self, k: int):
        if k < 1:
            raise ValueError("k must be a positive integer")
        self.k = k

    def __repr__(self):
        return f"Alg4Select(k={self.k})"

    def __eq__(self, other):
        return type(self) is type(other) and self.k == other.k

    def __hash__(self):
        return hash(("alg4", self.k))

    @property
    def rounds(self) -> int:
        return 2 * self.k

    def init(self, degree, local_input=None):
        if local_input is None:
            return SelectState(degree, active=False)
        r, del_ports = local_input
        live = sum(1 for p in range(1, degree + 1) if p not in del_ports)
        return SelectState(degree, active=True, r=r, levels=[live])

    def send(self, state, rnd):
        if not state.active:
            return state, {}
        k = self.k
        if rnd <= k:
            msg = encode_value(state.levels[rnd - 1])
            return state, {p: msg for p in range(1, state.degree + 1)}
        j = 2 * k - rnd
        if state.token is not None and state.token > state.levels[j]:
            port = state.ports[j + 1]
            value, state.token = state.token, None
            if port == 0:
                state.self_token = value
                return state, {}
            return state, {port: encode_value(value)}
        return state, {}

    def receive(self, state, rnd, inbox):
        if not state.active:
            return state
        k = self.k
        if rnd <= k:
            prev = state.levels[-1]
            values = {p: decode_value(m) for p, m in inbox.items()}
            best = max([prev, *values.values()])
            state.levels.append(best)
            if best > prev:
                state.ports.append(min(p for p, x in values.items() if x == best))
            else:
                state.ports.append(0)
            if rnd == k:
                state.token = state.levels[k - state.r]
            return state
        arrived = [decode_value(m) for m in inbox.values()]
        if state.self_token is not None:
            arrived.append(state.self_token)
            state.self_token = None
        if arrived:
            # tokens meeting at one node: the smallest value survives
            if state.token is not None:
                arrived.append(state.token)
            state.token = min(arrived)
        return state

    def finalize(self, state):
        return state.active and state.token is not None

    def payload_bits(self, payload, max_degree):
        return degree_bits(max_degree) if payload else 0


@dataclass
class PipelineState:
    prune: DistanceAwareState
    select: SelectState | None = None


class Pipeline3k(NodeProgram):
    """Distance-aware pruning for k rounds, then selection for 2k rounds."""

    name = "pipeline3k"

    def __init__(self, k: int):
        self.k = k
        self.alg3 = Alg3DistanceAware(k)
        self.alg4 = Alg4Select(k)

    def __repr__(self):
        return f"Pipeline3k(k={self.k})"

    def __eq__(self, other):
        return type(self) is type(other) and self.k == other.k

    def __hash__(self):
        return hash(("pipeline3k", self.k))

    @property
    def rounds(self) -> int:
        return 3 * self.k

    def init(self, degree, local_input=None):
        return PipelineState(self.alg3.init(degree))

    def send(self, state, rnd):
        if rnd <= self.k:
            state.prune, out = self.alg3.send(state.prune, rnd)
            return state, out
        state.select, out = self.alg4.send(state.select, rnd - self.k)
        return state, out

    def receive(self, state, rnd, inbox):
        if rnd <= self.k:
            state.prune = self.alg3.receive(state.prune, rnd, inbox)
            if rnd == self.k:
                state.select = self.alg4.init(state.prune.degree, handoff(state.prune))
            return state
        state.select = self.alg4.receive(state.select, rnd - self.k, inbox)
        return state

    def finalize(self, state):
        if state.select is None:  # only when run for fewer than k rounds
            return False
        return self.alg4.finalize(state.select)

    def payload_bits(self, payload, max_degree):
        return self.alg4.payload_bits(payload, max_degree)


def alg1_prune(k: int) -> Alg1Prune:
    return Alg1Prune(k)


def alg2_prune_with_fallback(k: int) -> Alg2PruneWithFallback:
    return Alg2PruneWithFallback(k)


def alg3_distance_aware(k: int) -> Alg3DistanceAware:
    return Alg3DistanceAware(k)


def alg4_select(k: int) -> Alg4Select:
    return Alg4Select(k)


def pipeline_3k(k: int) -> Pipeline3k:
    return Pipeline3k(k)


ALGORITHMS = {
    "alg1": alg1_prune,
    "alg2": alg2_prune_with_fallback,
    "alg3": alg3_distance_aware,
    "pipeline3k": pipeline_3k,
}


def round_budget(name: str, k: int) -> int:
    return {"alg1": k - 1, "alg2": k, "alg3": k, "alg4": 2 * k, "pipeline3k": 3 * k}[name]
