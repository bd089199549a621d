"""Layered per-commodity flow networks and circuit-induced flows.

Layer ``d`` holds the states before gate ``d`` is applied, so a network for
``m`` gates has layers ``1..m+1``. Arc ids are 1-based and follow a fixed
order: source arcs, sink arcs, then for each gate and each state the keep
arc followed by the ``n`` flip arcs. That order is what the model's
``x_k_a`` names refer to.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Optional

from .circuit import Circuit
from .simulator import apply_gate
from .spec_io import Commodity, state_to_bits

SOURCE_ARC, SINK_ARC, FLIP_ARC, KEEP_ARC = "source", "sink", "flip", "keep"


class Vertex(NamedTuple):
    kind: str  # "S", "T" or "L" (state layer)
    state: int = -1
    layer: int = 0

    @classmethod
    def at(cls, state: int, layer: int) -> Vertex:
        return cls("L", state, layer)

    def __str__(self) -> str:
        return self.kind if self.kind != "L" else f"({self.state},{self.layer})"


SOURCE = Vertex("S")
SINK = Vertex("T")


class Arc(NamedTuple):
    id: int
    kind: str
    tail: Vertex
    head: Vertex
    state: int  # state the arc leaves from; the endpoint state for source/sink arcs
    gate: Optional[int] = None  # d(a), flip/keep only
    qubit: Optional[int] = None  # q(a), flip only


class NoFeasibleFlow(Exception):
    """A circuit sends some input of a commodity outside its permitted outputs."""

    def __init__(self, commodity: int, state: int, reached: int, n: int):
        self.commodity = commodity
        self.state = state
        self.reached = reached
        super().__init__(
            f"commodity {commodity}: input {state_to_bits(state, n)} ends in "
            f"{state_to_bits(reached, n)}, which its pattern does not allow"
        )


@dataclass
class CommodityNetwork:
    n: int
    m: int
    commodity: Commodity
    arcs: list[Arc]
    _out: dict[Vertex, list[Arc]] = field(default_factory=dict, repr=False)
    _in: dict[Vertex, list[Arc]] = field(default_factory=dict, repr=False)

    def __post_init__(self):
        for v in self.vertices:
            self._out[v] = []
            self._in[v] = []
        for a in self.arcs:
            self._out[a.tail].append(a)
            self._in[a.head].append(a)
        self._source = {a.state: a for a in self._out[SOURCE]}
        self._sink = {a.state: a for a in self._in[SINK]}

    @property
    def k(self) -> int:
        return self.commodity.index

    @property
    def demand(self) -> int:
        return self.commodity.demand

    @property
    def vertices(self) -> list[Vertex]:
        layers = [
            Vertex.at(s, d) for d in range(1, self.m + 2) for s in range(1 << self.n)
        ]
        return [SOURCE, SINK, *layers]

    def out_arcs(self, v: Vertex) -> list[Arc]:
        try:
            return self._out[v]
        except KeyError:
            raise KeyError(f"vertex {v} is not in the network") from None

    def in_arcs(self, v: Vertex) -> list[Arc]:
        try:
            return self._in[v]
        except KeyError:
            raise KeyError(f"vertex {v} is not in the network") from None

    # Direct id lookups, derived from the fixed arc order.
    def _layer_base(self, state: int, d: int) -> int:
        offset = len(self.commodity.in_states) + len(self.commodity.out_states)
        return offset + ((d - 1) * (1 << self.n) + state) * (self.n + 1)

    def keep_arc(self, state: int, d: int) -> Arc:
        return self.arcs[self._layer_base(state, d)]

    def flip_arc(self, state: int, d: int, q: int) -> Arc:
        return self.arcs[self._layer_base(state, d) + q]

    def source_arc(self, state: int) -> Arc:
        return self._source[state]

    def sink_arc(self, state: int) -> Arc:
        return self._sink[state]

    def dump(self) -> str:
        """Line-oriented debug listing; not a stable format."""
        lines = []
        for a in self.arcs:
            d = a.gate
            if a.kind == SOURCE_ARC:
                d = 1
            elif a.kind == SINK_ARC:
                d = self.m + 1
            line = f"ARC {a.id} {a.kind} {state_to_bits(a.state, self.n)} {d}"
            if a.qubit is not None:
                line += f" {a.qubit}"
            lines.append(line)
        return "\n".join(lines) + "\n"


def build_network(n: int, m: int, commodity: Commodity) -> CommodityNetwork:
    if n < 1 or m < 0:
        raise ValueError("need n >= 1 and m >= 0")
    arcs: list[Arc] = []

    def add(kind, tail, head, state, gate=None, qubit=None):
        arcs.append(Arc(len(arcs) + 1, kind, tail, head, state, gate, qubit))

    for s in commodity.in_states:
        add(SOURCE_ARC, SOURCE, Vertex.at(s, 1), s)
    for s in commodity.out_states:
        add(SINK_ARC, Vertex.at(s, m + 1), SINK, s)
    for d in range(1, m + 1):
        for s in range(1 << n):
            v = Vertex.at(s, d)
            add(KEEP_ARC, v, Vertex.at(s, d + 1), s, d)
            for q in range(1, n + 1):
                add(FLIP_ARC, v, Vertex.at(s ^ (1 << (n - q)), d + 1), s, d, q)
    return CommodityNetwork(n, m, commodity, arcs)


def induced_flow(circuit: Circuit, network: CommodityNetwork) -> dict[int, int]:
    """0/1 value for every arc id when each input follows the circuit.

    Raises NoFeasibleFlow for the first input whose final state is not a
    permitted output of the commodity.
    """
    if circuit.n != network.n or circuit.m != network.m:
        raise ValueError(
            f"circuit is {circuit.n}x{circuit.m}, network is {network.n}x{network.m}"
        )
    n = network.n
    flow = dict.fromkeys((a.id for a in network.arcs), 0)
    allowed = set(network.commodity.out_states)
    for s in network.commodity.in_states:
        used = [network.source_arc(s).id]
        state = s
        for d, g in enumerate(circuit.slots, 1):
            nxt = apply_gate(g, state, n)
            if nxt == state:
                used.append(network.keep_arc(state, d).id)
            else:
                used.append(network.flip_arc(state, d, g.target).id)
            state = nxt
        if state not in allowed:
            raise NoFeasibleFlow(network.k, s, state, n)
        used.append(network.sink_arc(state).id)
        for a in used:
            flow[a] = 1
    return flow
