"""Basis-state simulation of MCT circuits."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .circuit import Circuit, Slot
from .spec_io import Specification


def gate_masks(gate: Slot, n: int) -> tuple[int, int]:
    """(control mask, target mask) of a slot; an empty slot flips nothing."""
    if gate is None:
        return 0, 0
    ctrl = 0
    for c in gate.controls:
        ctrl |= 1 << (n - c)
    return ctrl, 1 << (n - gate.target)


def apply_gate(gate: Slot, state: int, n: int) -> int:
    ctrl, tgt = gate_masks(gate, n)
    return state ^ tgt if state & ctrl == ctrl else state


def run_circuit(circuit: Circuit, state: int) -> int:
    for g in circuit.slots:
        state = apply_gate(g, state, circuit.n)
    return state


def trace(circuit: Circuit, state: int) -> list[int]:
    """States before the first gate and after each slot (length m + 1)."""
    path = [state]
    for g in circuit.slots:
        state = apply_gate(g, state, circuit.n)
        path.append(state)
    return path


@dataclass(frozen=True)
class Permutation:
    n: int
    images: tuple[int, ...]

    def __post_init__(self):
        if len(self.images) != 1 << self.n or len(set(self.images)) != len(self.images):
            raise AssertionError("images do not form a permutation")

    @classmethod
    def identity(cls, n: int) -> Permutation:
        return cls(n, tuple(range(1 << n)))

    def __getitem__(self, state: int) -> int:
        return self.images[state]

    def inverse(self) -> Permutation:
        inv = [0] * len(self.images)
        for s, t in enumerate(self.images):
            inv[t] = s
        return Permutation(self.n, tuple(inv))

    def then(self, other: Permutation) -> Permutation:
        """Apply ``self`` first, then ``other``."""
        return Permutation(self.n, tuple(other.images[t] for t in self.images))


def induced_permutation(circuit: Circuit) -> Permutation:
    states = np.arange(1 << circuit.n, dtype=np.int64)
    for g in circuit.slots:
        ctrl, tgt = gate_masks(g, circuit.n)
        if tgt:
            states ^= np.where(states & ctrl == ctrl, tgt, 0)
    return Permutation(circuit.n, tuple(states.tolist()))


def violations(circuit: Circuit, spec: Specification) -> list[int]:
    """Inputs whose output misses their pattern, ascending."""
    if circuit.n != spec.n:
        raise ValueError(f"circuit has {circuit.n} qubits, spec has {spec.n}")
    images = induced_permutation(circuit).images
    return [s for s, p in spec if not p.matches(images[s])]


def first_violation(circuit: Circuit, spec: Specification) -> int | None:
    bad = violations(circuit, spec)
    return bad[0] if bad else None


def satisfies(circuit: Circuit, spec: Specification) -> bool:
    return first_violation(circuit, spec) is None
