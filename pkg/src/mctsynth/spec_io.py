"""Truth-table specifications for reversible functions.

Basis states are plain ints: the bit string is read big-endian, so qubit 1
is the leftmost character and the most significant bit (``"110"`` is 6).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_flow

MAX_QUBITS = 16


class SpecError(ValueError):
    """Raised for malformed specification text."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


def qubit_mask(q: int, n: int) -> int:
    """Bit mask of qubit ``q`` (1-based, leftmost) in an ``n``-qubit state."""
    return 1 << (n - q)


def state_from_bits(bits: str) -> int:
    if not bits or any(c not in "01" for c in bits):
        raise ValueError(f"not a bit string: {bits!r}")
    return int(bits, 2)


def state_to_bits(state: int, n: int) -> str:
    return format(state, f"0{n}b")


@dataclass(frozen=True)
class OutputPattern:
    """Output over {0, 1, -}; ``care`` marks specified bits, ``value`` holds them."""

    n: int
    care: int
    value: int

    @classmethod
    def parse(cls, text: str) -> OutputPattern:
        if not text or any(c not in "01-" for c in text):
            raise ValueError(f"not an output pattern: {text!r}")
        n = len(text)
        care = value = 0
        for i, c in enumerate(text):
            bit = 1 << (n - 1 - i)
            if c != "-":
                care |= bit
                if c == "1":
                    value |= bit
        return cls(n, care, value)

    @classmethod
    def dont_care(cls, n: int) -> OutputPattern:
        return cls(n, 0, 0)

    @classmethod
    def exact(cls, state: int, n: int) -> OutputPattern:
        return cls(n, (1 << n) - 1, state)

    @property
    def dont_cares(self) -> int:
        return self.n - bin(self.care).count("1")

    @property
    def complete(self) -> bool:
        return self.dont_cares == 0

    def matches(self, state: int) -> bool:
        return state & self.care == self.value

    def match_set(self) -> list[int]:
        """All matching states, ascending."""
        return [s for s in range(1 << self.n) if s & self.care == self.value]

    def __str__(self) -> str:
        out = []
        for i in range(self.n):
            bit = 1 << (self.n - 1 - i)
            out.append("-" if not self.care & bit else "1" if self.value & bit else "0")
        return "".join(out)


@dataclass(frozen=True)
class Specification:
    """Total map from each of the 2^n input states to an output pattern."""

    n: int
    rows: tuple[OutputPattern, ...]

    def __post_init__(self):
        if not 1 <= self.n <= MAX_QUBITS:
            raise SpecError(f"qubit count {self.n} outside [1, {MAX_QUBITS}]")
        if len(self.rows) != 1 << self.n:
            raise SpecError(f"expected {1 << self.n} rows, got {len(self.rows)}")
        if any(p.n != self.n for p in self.rows):
            raise SpecError("pattern width does not match qubit count")

    @classmethod
    def from_rows(cls, n: int, rows: dict[int, OutputPattern | str]) -> Specification:
        """Build from a partial row map; missing inputs become all don't-care."""
        full = []
        for s in range(1 << n):
            p = rows.get(s)
            if p is None:
                p = OutputPattern.dont_care(n)
            elif isinstance(p, str):
                p = OutputPattern.parse(p)
            full.append(p)
        return cls(n, tuple(full))

    @classmethod
    def from_permutation(cls, images: Iterable[int], n: int) -> Specification:
        return cls(n, tuple(OutputPattern.exact(s, n) for s in images))

    def __iter__(self) -> Iterator[tuple[int, OutputPattern]]:
        return iter(enumerate(self.rows))

    def to_text(self) -> str:
        lines = [f".n {self.n}"]
        lines += [f"{state_to_bits(s, self.n)} {p}" for s, p in self]
        return "\n".join(lines) + "\n"


def parse_spec(text: str) -> Specification:
    """Parse the line-oriented spec format (``.n`` header, ``<in> <pattern>`` rows)."""
    n = None
    rows: dict[int, OutputPattern] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        if fields[0] == ".n":
            if n is not None or rows:
                raise SpecError("header must come first and appear once", lineno)
            if len(fields) != 2 or not fields[1].isdigit():
                raise SpecError(f"malformed header {line!r}", lineno)
            n = int(fields[1])
            if not 1 <= n <= MAX_QUBITS:
                raise SpecError(f"qubit count {n} outside [1, {MAX_QUBITS}]", lineno)
            continue
        if len(fields) != 2:
            raise SpecError(f"expected '<input> <output>', got {line!r}", lineno)
        bits, pattern = fields
        try:
            state = state_from_bits(bits)
            out = OutputPattern.parse(pattern)
        except ValueError as exc:
            raise SpecError(str(exc), lineno) from None
        if n is None:
            n = len(bits)
            if not 1 <= n <= MAX_QUBITS:
                raise SpecError(f"qubit count {n} outside [1, {MAX_QUBITS}]", lineno)
        if len(bits) != n or out.n != n:
            raise SpecError(f"bit-string length differs from n={n}", lineno)
        if state in rows:
            raise SpecError(f"duplicate input row {bits}", lineno)
        rows[state] = out
    if n is None:
        raise SpecError("empty specification without '.n' header")
    return Specification.from_rows(n, rows)


def read_spec(path) -> Specification:
    with open(path, encoding="utf-8") as f:
        return parse_spec(f.read())


def validate_realizable(spec: Specification) -> bool:
    """True iff some permutation of the states meets every row's pattern.

    This is a bipartite matching of inputs onto outputs (input ``s`` may take
    any state its pattern matches). Inputs sharing a pattern are merged into
    one node of capacity ``|group|`` so the edge count stays manageable when
    rows carry many don't-cares.
    """
    size = 1 << spec.n
    commodities = build_commodities(spec)
    nk = len(commodities)
    # nodes: 0 source, 1..nk commodities, nk+1.. outputs, last sink
    sink = nk + size + 1
    heads, tails, caps = [], [], []
    for c in commodities:
        tails.append(0)
        heads.append(c.index)
        caps.append(c.demand)
        tails.extend([c.index] * len(c.out_states))
        heads.extend(nk + 1 + s for s in c.out_states)
        caps.extend([1] * len(c.out_states))
    tails.extend(nk + 1 + s for s in range(size))
    heads.extend([sink] * size)
    caps.extend([1] * size)
    graph = csr_matrix(
        (np.array(caps, dtype=np.int32), (np.array(tails), np.array(heads))),
        shape=(sink + 1, sink + 1),
    )
    return maximum_flow(graph, 0, sink).flow_value == size


@dataclass(frozen=True)
class Commodity:
    index: int  # 1-based, as in the model's variable names
    pattern: OutputPattern
    in_states: tuple[int, ...]
    out_states: tuple[int, ...]

    @property
    def demand(self) -> int:
        return len(self.in_states)


def build_commodities(spec: Specification) -> list[Commodity]:
    """Group inputs with identical output patterns.

    Ordered by smallest member input, which falls out of scanning inputs in
    ascending order.
    """
    groups: dict[OutputPattern, list[int]] = {}
    for s, p in spec:
        groups.setdefault(p, []).append(s)
    return [
        Commodity(k, p, tuple(ins), tuple(p.match_set()))
        for k, (p, ins) in enumerate(groups.items(), 1)
    ]
