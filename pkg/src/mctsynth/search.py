"""Exact minimum-cost synthesis by depth-first branch-and-bound.

Slots are filled left to right. A slot is either one of the MCT gates on
``n`` qubits or Empty; choosing Empty closes the circuit (the remaining
slots stay empty), which is harmless because empty gates can always be
moved to the end. With symmetry pruning on, a gate that would let its left
neighbour be swapped past it is never placed, so only unswappable circuits
are enumerated. Every circuit can be swapped into such a form at equal
cost, so the optimum is unaffected.
"""
from __future__ import annotations

import enum
import multiprocessing as mp
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from itertools import combinations, product
from typing import Optional

from .circuit import (
    DEFAULT_COSTS,
    Circuit,
    CostTable,
    Gate,
    all_gates,
    canonicalize,
    circuit_cost,
    pair_swappable,
    slot_cost,
)
from .simulator import satisfies
from .spec_io import Specification, validate_realizable

THREADS_ENV = "MCTSYNTH_THREADS"

EXHAUSTIVE = "exhaustive over canonical circuits with <= {m} slots"


class Status(str, enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    TIMED_OUT = "timeout"
    # a witness exists but minimality was not the question
    FEASIBLE = "feasible"


@dataclass
class Outcome:
    status: Status
    circuit: Optional[Circuit] = None
    cost: Optional[int] = None
    nodes_explored: int = 0
    elapsed: float = 0.0
    proof: Optional[str] = None

    @property
    def best(self) -> Optional[tuple[Circuit, int]]:
        return None if self.circuit is None else (self.circuit, self.cost)


@dataclass(frozen=True)
class SearchOptions:
    time_limit: Optional[float] = None  # seconds
    symmetry_pruning: bool = True
    initial_upper_bound: Optional[int] = None  # only circuits costing at most this are sought
    forward_check: bool = False
    workers: Optional[int] = None  # None reads MCTSYNTH_THREADS, default 1


def default_workers() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


class _Timeout(Exception):
    pass


class _Found(Exception):
    pass


_INF = float("inf")


class _Search:
    """Search state shared by the serial and per-worker runs."""

    def __init__(self, spec: Specification, m: int, opts: SearchOptions,
                 costs: CostTable, deadline: Optional[float], first_only: bool = False):
        self.n = n = spec.n
        self.m = m
        self.opts = opts
        self.deadline = deadline
        self.first_only = first_only
        self.gates = all_gates(n)
        masks = []
        for g in self.gates:
            ctrl = 0
            for c in g.controls:
                ctrl |= 1 << (n - c)
            masks.append((ctrl, 1 << (n - g.target)))
        self.masks = masks
        self.costs = [slot_cost(g, n, costs) for g in self.gates]
        self.min_cost = min(self.costs)
        # only rows with specified bits need checking
        self.rows = [(s, p.care, p.value) for s, p in spec if p.care]
        if opts.symmetry_pruning:
            self.successors = [
                [j for j, h in enumerate(self.gates) if not pair_swappable(g, h)]
                for g in self.gates
            ]
        else:
            self.successors = [list(range(len(self.gates)))] * len(self.gates)
        self.first = list(range(len(self.gates)))
        self.best = _INF
        if opts.initial_upper_bound is not None:
            self.best = opts.initial_upper_bound + 1
        self.best_slots: Optional[list[int]] = None
        self.nodes = 0
        self.shared = None  # cross-process incumbent when running in a pool

    def satisfied(self, images: list[int]) -> bool:
        return all(images[s] & care == value for s, care, value in self.rows)

    def flips_needed(self, images: list[int]) -> int:
        """Most specified bits any single input still has wrong."""
        worst = 0
        for s, care, value in self.rows:
            wrong = bin((images[s] ^ value) & care).count("1")
            if wrong > worst:
                worst = wrong
        return worst

    def _tick(self):
        self.nodes += 1
        if self.nodes & 255 == 0:
            if self.deadline is not None and time.monotonic() > self.deadline:
                raise _Timeout
            if self.shared is not None and self.shared.value < self.best:
                self.best = self.shared.value

    def _record(self, cost: int, slots: list[int]):
        self.best = cost
        self.best_slots = list(slots)
        if self.shared is not None:
            with self.shared.get_lock():
                if cost < self.shared.value:
                    self.shared.value = cost
        if self.first_only:
            raise _Found

    def dfs(self, depth: int, images: list[int], cost: int, prev: int, slots: list[int]):
        self._tick()
        remaining = self.m - depth
        if self.opts.forward_check:
            need = self.flips_needed(images)
            if need > remaining or cost + need * self.min_cost >= self.best:
                return
        if remaining:
            branches = self.first if prev < 0 else self.successors[prev]
            for j in branches:
                c = cost + self.costs[j]
                if c >= self.best:
                    continue
                ctrl, tgt = self.masks[j]
                nxt = [v ^ tgt if v & ctrl == ctrl else v for v in images]
                slots.append(j)
                self.dfs(depth + 1, nxt, c, j, slots)
                slots.pop()
        # Empty: the circuit ends here
        if cost < self.best and self.satisfied(images):
            self._record(cost, slots)

    def circuit(self) -> Optional[Circuit]:
        if self.best_slots is None:
            return None
        slots = [self.gates[j] for j in self.best_slots]
        return Circuit(self.n, tuple(slots) + (None,) * (self.m - len(slots)))


def _finish(search: _Search, timed_out: bool, start: float, m: int) -> Outcome:
    circuit = search.circuit()
    cost = None
    if circuit is not None:
        cost = search.best
        circuit = canonicalize(circuit)
    if timed_out:
        status, proof = Status.TIMED_OUT, None
    else:
        status = Status.INFEASIBLE if circuit is None else Status.OPTIMAL
        proof = EXHAUSTIVE.format(m=m)
    return Outcome(status, circuit, cost, search.nodes, time.monotonic() - start, proof)


def synthesize(
    spec: Specification,
    m: int,
    options: SearchOptions = SearchOptions(),
    costs: CostTable = DEFAULT_COSTS,
) -> Outcome:
    """Minimum-cost circuit with at most ``m`` gates meeting ``spec``."""
    if m < 0:
        raise ValueError("gate count must be non-negative")
    start = time.monotonic()
    if not validate_realizable(spec):
        return Outcome(Status.INFEASIBLE, elapsed=time.monotonic() - start,
                       proof="no permutation meets the specification")
    deadline = None if options.time_limit is None else start + options.time_limit
    workers = options.workers if options.workers is not None else default_workers()
    if workers > 1 and m > 1:
        return _synthesize_parallel(spec, m, options, costs, start, deadline, workers)

    search = _Search(spec, m, options, costs, deadline)
    try:
        search.dfs(0, list(range(1 << spec.n)), 0, -1, [])
        timed_out = False
    except _Timeout:
        timed_out = True
    return _finish(search, timed_out, start, m)


# --- worker pool -------------------------------------------------------------

_shared_bound = None


def _init_worker(bound):
    global _shared_bound
    _shared_bound = bound


def _run_branch(spec, m, options, costs, deadline, first):
    search = _Search(spec, m, options, costs, deadline)
    search.shared = _shared_bound
    search.best = min(search.best, _shared_bound.value)
    ctrl, tgt = search.masks[first]
    images = [v ^ tgt if v & ctrl == ctrl else v for v in range(1 << spec.n)]
    timed_out = False
    if search.costs[first] < search.best:
        try:
            search.dfs(1, images, search.costs[first], first, [first])
        except _Timeout:
            timed_out = True
    found = None
    if search.best_slots is not None:
        found = (search.best, search.best_slots)
    return found, search.nodes, timed_out


def _synthesize_parallel(spec, m, options, costs, start, deadline, workers) -> Outcome:
    search = _Search(spec, m, options, costs, deadline)
    # the all-empty circuit is the one root branch not handed to a worker
    search.nodes = 1
    if search.satisfied(list(range(1 << spec.n))) and 0 < search.best:
        search.best, search.best_slots = 0, []
    init = search.best if search.best != _INF else 2**62
    bound = mp.Value("q", int(init))
    timed_out = False
    with ProcessPoolExecutor(workers, initializer=_init_worker, initargs=(bound,)) as pool:
        futures = [
            pool.submit(_run_branch, spec, m, options, costs, deadline, j)
            for j in range(len(search.gates))
        ]
        for fut in futures:
            found, nodes, t_out = fut.result()
            search.nodes += nodes
            timed_out |= t_out
            if found is not None and found[0] < search.best:
                search.best, search.best_slots = found
    return _finish(search, timed_out, start, m)


def prove_gate_infeasibility(
    spec: Specification,
    m: int,
    time_limit: Optional[float] = None,
    symmetry_pruning: bool = True,
) -> Outcome:
    """Decide whether any circuit with at most ``m`` gates meets ``spec``.

    Stops at the first witness (status FEASIBLE); INFEASIBLE only after the
    canonical circuits are exhausted.
    """
    start = time.monotonic()
    if not validate_realizable(spec):
        return Outcome(Status.INFEASIBLE, elapsed=time.monotonic() - start,
                       proof="no permutation meets the specification")
    deadline = None if time_limit is None else start + time_limit
    opts = SearchOptions(symmetry_pruning=symmetry_pruning, forward_check=True)
    search = _Search(spec, m, opts, DEFAULT_COSTS, deadline, first_only=True)
    try:
        search.dfs(0, list(range(1 << spec.n)), 0, -1, [])
        status = Status.INFEASIBLE
    except _Found:
        status = Status.FEASIBLE
    except _Timeout:
        status = Status.TIMED_OUT
    circuit = search.circuit()
    return Outcome(
        status,
        circuit,
        None if circuit is None else circuit_cost(circuit),
        search.nodes,
        time.monotonic() - start,
        EXHAUSTIVE.format(m=m) if status is Status.INFEASIBLE else None,
    )


# --- oracle --------------------------------------------------------------------

BRUTE_FORCE_LIMIT = (3, 3)  # (n, m)


def brute_force_min_cost(spec: Specification, m: int, costs: CostTable = DEFAULT_COSTS) -> Outcome:
    """Try every assignment of gates (or Empty) to the ``m`` slots.

    No pruning of any kind; meant as a reference for small instances only.
    """
    max_n, max_m = BRUTE_FORCE_LIMIT
    if spec.n > max_n or m > max_m:
        raise ValueError(f"brute force is limited to n <= {max_n}, m <= {max_m}")
    start = time.monotonic()
    n = spec.n
    choices: list[Optional[Gate]] = [None]
    for target in range(1, n + 1):
        others = [q for q in range(1, n + 1) if q != target]
        for size in range(len(others) + 1):
            for ctrl in combinations(others, size):
                choices.append(Gate(target, frozenset(ctrl)))
    best = None
    count = 0
    for slots in product(choices, repeat=m):
        count += 1
        circuit = Circuit(n, slots)
        if satisfies(circuit, spec):
            c = circuit_cost(circuit, costs)
            if best is None or c < best[1]:
                best = (circuit, c)
    elapsed = time.monotonic() - start
    proof = f"exhaustive over all {count} circuits with {m} slots"
    if best is None:
        return Outcome(Status.INFEASIBLE, nodes_explored=count, elapsed=elapsed, proof=proof)
    return Outcome(Status.OPTIMAL, canonicalize(best[0]), best[1], count, elapsed, proof)
