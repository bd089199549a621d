"""MCT gates and circuits, quantum costs, and swap canonicalization."""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Mapping, Optional

from .spec_io import MAX_QUBITS


class CircuitError(ValueError):
    """Raised for malformed circuits or circuit text."""


@dataclass(frozen=True)
class Gate:
    """One MCT gate: flips ``target`` when every qubit in ``controls`` is 1."""

    target: int
    controls: frozenset[int] = field(default_factory=frozenset)

    def __post_init__(self):
        object.__setattr__(self, "controls", frozenset(self.controls))
        if self.target in self.controls:
            raise CircuitError(f"qubit {self.target} is both target and control")

    @property
    def size(self) -> int:
        """Qubits touched: target plus controls."""
        return 1 + len(self.controls)

    def __str__(self) -> str:
        return " ".join([f"T{self.target}"] + [f"C{c}" for c in sorted(self.controls)])


Slot = Optional[Gate]


@dataclass(frozen=True)
class Circuit:
    """``m`` ordered slots over ``n`` qubits; ``None`` marks an empty slot."""

    n: int
    slots: tuple[Slot, ...]

    def __post_init__(self):
        object.__setattr__(self, "slots", tuple(self.slots))
        if not 1 <= self.n <= MAX_QUBITS:
            raise CircuitError(f"qubit count {self.n} outside [1, {MAX_QUBITS}]")
        for g in self.gates:
            qubits = {g.target, *g.controls}
            if min(qubits) < 1 or max(qubits) > self.n:
                raise CircuitError(f"gate {g} uses a qubit outside 1..{self.n}")

    @classmethod
    def empty(cls, n: int, m: int) -> Circuit:
        return cls(n, (None,) * m)

    @property
    def m(self) -> int:
        return len(self.slots)

    @property
    def gates(self) -> list[Gate]:
        return [g for g in self.slots if g is not None]

    def reversed(self) -> Circuit:
        return Circuit(self.n, self.slots[::-1])

    def to_text(self) -> str:
        lines = [f".n {self.n} .m {self.m}"]
        lines += ["E" if g is None else str(g) for g in self.slots]
        return "\n".join(lines) + "\n"

    def __str__(self) -> str:
        return " / ".join("E" if g is None else str(g) for g in self.slots)


def parse_gate(text: str) -> Gate:
    target = None
    controls = []
    for tok in text.split():
        kind, num = tok[:1], tok[1:]
        if kind not in "TC" or not num.isdigit():
            raise CircuitError(f"bad gate token {tok!r}")
        if kind == "T":
            if target is not None:
                raise CircuitError(f"gate {text!r} has two targets")
            target = int(num)
        else:
            if int(num) in controls:
                raise CircuitError(f"duplicate control in {text!r}")
            controls.append(int(num))
    if target is None:
        raise CircuitError(f"gate {text!r} has no target")
    return Gate(target, frozenset(controls))


def parse_circuit(text: str) -> Circuit:
    """Parse ``.n <n> .m <m>`` followed by exactly ``m`` slot lines."""
    n = m = None
    slots: list[Slot] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            if n is None:
                fields = line.split()
                if len(fields) != 4 or fields[0] != ".n" or fields[2] != ".m":
                    raise CircuitError(f"expected '.n <int> .m <int>', got {line!r}")
                n, m = int(fields[1]), int(fields[3])
                if m < 0:
                    raise CircuitError("negative gate count")
            elif line == "E":
                slots.append(None)
            else:
                slots.append(parse_gate(line))
        except ValueError as exc:
            raise CircuitError(f"line {lineno}: {exc}") from None
    if n is None:
        raise CircuitError("missing '.n <int> .m <int>' header")
    if len(slots) != m:
        raise CircuitError(f"header declares m={m} but {len(slots)} slots given")
    return Circuit(n, tuple(slots))


def read_circuit(path) -> Circuit:
    with open(path, encoding="utf-8") as f:
        return parse_circuit(f.read())


# Best-known costs with explicit cells only; a missing cell repeats the one
# above it, and the last row (4 slack) covers any larger slack.
_DEFAULT_CELLS = {
    (0, 0): 1, (1, 0): 1, (2, 0): 5, (3, 0): 13, (4, 0): 29, (5, 0): 62, (6, 0): 125,
    (5, 1): 52, (6, 1): 80,
    (4, 2): 26,
    (5, 3): 38,
    (6, 4): 50,
}


class CostTable:
    """Quantum cost of an MCT gate by control count and slack.

    Columns without explicit cells (7+ controls by default) cost
    ``2^(p+1) - 3`` regardless of slack.
    """

    def __init__(self, cells: Mapping[tuple[int, int], int] | None = None):
        self.cells = dict(_DEFAULT_CELLS if cells is None else cells)
        self._columns: dict[int, list[tuple[int, int]]] = {}
        for (p, s), cost in sorted(self.cells.items()):
            if p < 0 or s < 0 or cost <= 0:
                raise ValueError(f"invalid cost cell {(p, s, cost)}")
            self._columns.setdefault(p, []).append((s, cost))
        for p, col in self._columns.items():
            costs = [c for _, c in col]
            if costs != sorted(costs, reverse=True):
                raise ValueError(f"costs for {p} controls increase with slack")
            if col[0][0] != 0:
                raise ValueError(f"column for {p} controls lacks a zero-slack cell")

    def with_overrides(self, cells: Mapping[tuple[int, int], int]) -> CostTable:
        return CostTable({**self.cells, **cells})

    def __call__(self, p: int, s: int) -> int:
        if p < 0 or s < 0:
            raise ValueError("control and slack counts must be non-negative")
        col = self._columns.get(p)
        if col is None:
            return 2 ** (p + 1) - 3
        cost = col[0][1]
        for slack, c in col:
            if slack > s:
                break
            cost = c
        return cost

    def __eq__(self, other) -> bool:
        return isinstance(other, CostTable) and self.cells == other.cells


DEFAULT_COSTS = CostTable()


def parse_cost_table(text: str, base: CostTable = DEFAULT_COSTS) -> CostTable:
    """Read ``<p> <s> <cost>`` override lines on top of ``base``."""
    cells = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            p, s, cost = (int(x) for x in line.split())
        except ValueError:
            raise ValueError(f"line {lineno}: expected '<p> <s> <cost>', got {line!r}") from None
        cells[p, s] = cost
    return base.with_overrides(cells)


def gate_cost(p: int, s: int, table: CostTable = DEFAULT_COSTS) -> int:
    """Cost of a gate with ``p`` controls and ``s`` slack qubits."""
    return table(p, s)


def slot_cost(gate: Slot, n: int, table: CostTable = DEFAULT_COSTS) -> int:
    if gate is None:
        return 0
    p = len(gate.controls)
    return table(p, n - 1 - p)


def circuit_cost(circuit: Circuit, table: CostTable = DEFAULT_COSTS) -> int:
    return sum(slot_cost(g, circuit.n, table) for g in circuit.slots)


def zero_qubits(state: int, n: int) -> set[int]:
    """Qubits (1-based) that are 0 in ``state``."""
    return {q for q in range(1, n + 1) if not state >> (n - q) & 1}


# --- swaps ---------------------------------------------------------------

def swap1_applies(first: Slot, second: Slot) -> bool:
    return first is None and second is not None


def swap2_applies(first: Slot, second: Slot) -> bool:
    if first is None or second is None:
        return False
    q, r = first.target, second.target
    return q > r and q not in second.controls and r not in first.controls


def swap3_applies(first: Slot, second: Slot) -> bool:
    if first is None or second is None:
        return False
    return first.target == second.target and len(first.controls) < len(second.controls)


def pair_swappable(first: Slot, second: Slot) -> bool:
    return (
        swap1_applies(first, second)
        or swap2_applies(first, second)
        or swap3_applies(first, second)
    )


def is_canonical(circuit: Circuit) -> bool:
    """True iff no adjacent pair admits any of the three swaps."""
    s = circuit.slots
    return not any(pair_swappable(s[d], s[d + 1]) for d in range(len(s) - 1))


def _exhaust(slots: list[Slot], rule) -> bool:
    """Apply ``rule`` at the leftmost eligible pair until none is left."""
    changed = False
    d = 0
    while d < len(slots) - 1:
        if rule(slots[d], slots[d + 1]):
            slots[d], slots[d + 1] = slots[d + 1], slots[d]
            changed = True
            d = max(d - 1, 0)
        else:
            d += 1
    return changed


def canonicalize(circuit: Circuit) -> Circuit:
    """Swap adjacent gates until the circuit is unswappable.

    Empty slots are pushed to the end first. After that, Swap 2 passes
    (each strictly lowers the target vector lexicographically) alternate
    with Swap 3 passes (which leave the target vector alone) until neither
    changes anything, so the loop terminates.
    """
    slots = list(circuit.slots)
    _exhaust(slots, swap1_applies)
    while True:
        changed = _exhaust(slots, swap2_applies)
        changed |= _exhaust(slots, swap3_applies)
        if not changed:
            break
    return Circuit(circuit.n, tuple(slots))


def all_gates(n: int) -> list[Gate]:
    """Every MCT gate on ``n`` qubits: targets ascending, then controls by size and lexicographically."""
    gates = []
    for t in range(1, n + 1):
        others = [q for q in range(1, n + 1) if q != t]
        for k in range(n):
            gates.extend(Gate(t, frozenset(c)) for c in combinations(others, k))
    return gates
