"""Solver-neutral flow model for minimum-cost MCT circuit design.

Design variables per qubit ``q`` and gate ``d``:

* ``t_q_d`` -- qubit ``q`` is the target of gate ``d``
* ``w_q_d`` -- qubit ``q`` is a control of gate ``d``
* ``y_q_d`` -- gate ``d`` touches exactly ``q`` qubits (target plus controls)

and one flow variable ``x_k_a`` per arc ``a`` of commodity ``k``'s network.
The implications that close flip and keep arcs are emitted in linearized
form only, so the exports need nothing beyond plain linear constraints.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .circuit import Circuit, CostTable, DEFAULT_COSTS, Gate
from .flownet import FLIP_ARC, KEEP_ARC, SINK, SOURCE, CommodityNetwork, build_network, induced_flow
from .spec_io import Commodity, Specification, build_commodities, state_to_bits, validate_realizable

BINARY = "binary"
UNIT = "unit"  # continuous in [0, 1]

LE, EQ, GE = "<=", "=", ">="

JSON_FORMAT = "mctsynth-model"
JSON_VERSION = 1
TOL = 1e-9


class UnrealizableSpec(ValueError):
    """No permutation meets the specification, whatever the gate count."""


@dataclass(frozen=True)
class VarRef:
    name: str
    kind: str  # "t", "w", "y" or "x"
    index: tuple[int, int]  # (q, d) for design variables, (k, arc id) for x
    domain: str


@dataclass(frozen=True)
class LinearConstraint:
    name: str
    tag: str
    terms: tuple[tuple[int, str], ...]
    sense: str
    rhs: int

    def lhs(self, values: Mapping[str, float]) -> float:
        return sum(c * values[v] for c, v in self.terms)

    def holds(self, values: Mapping[str, float]) -> bool:
        lhs = self.lhs(values)
        if self.sense == LE:
            return lhs <= self.rhs + TOL
        if self.sense == GE:
            return lhs >= self.rhs - TOL
        return abs(lhs - self.rhs) <= TOL


@dataclass(frozen=True)
class ModelOptions:
    symmetry: bool = True
    relax_x: bool = True


@dataclass
class Model:
    spec: Specification
    m: int
    commodities: list[Commodity]
    options: ModelOptions
    costs: CostTable = DEFAULT_COSTS
    variables: list[VarRef] = field(default_factory=list)
    objective: list[tuple[int, str]] = field(default_factory=list)
    constraints: list[LinearConstraint] = field(default_factory=list)

    @property
    def n(self) -> int:
        return self.spec.n

    @property
    def binaries(self) -> list[VarRef]:
        return [v for v in self.variables if v.domain == BINARY]

    def network(self, k: int) -> CommodityNetwork:
        """Commodity ``k``'s network, rebuilt on demand (1-based ``k``)."""
        return build_network(self.n, self.m, self.commodities[k - 1])

    def objective_value(self, values: Mapping[str, float]) -> float:
        return sum(c * values[v] for c, v in self.objective)


def t(q, d):
    return f"t_{q}_{d}"


def w(q, d):
    return f"w_{q}_{d}"


def y(q, d):
    return f"y_{q}_{d}"


def x(k, a):
    return f"x_{k}_{a}"


class _Builder:
    def __init__(self, model: Model):
        self.model = model
        self.names: set[str] = set()

    def var(self, kind, index, name, domain):
        self.names.add(name)
        self.model.variables.append(VarRef(name, kind, index, domain))

    def add(self, name, tag, terms, sense, rhs):
        terms = tuple(terms)
        seen = set()
        for _, v in terms:
            if v in seen or v not in self.names:
                raise AssertionError(f"bad term {v} in {name}")
            seen.add(v)
        self.model.constraints.append(LinearConstraint(name, tag, terms, sense, rhs))


def build_model(
    spec: Specification,
    m: int,
    options: ModelOptions = ModelOptions(),
    costs: CostTable = DEFAULT_COSTS,
) -> Model:
    if m < 1:
        raise ValueError("the model needs at least one gate")
    if not validate_realizable(spec):
        raise UnrealizableSpec("no permutation meets the specification")
    n = spec.n
    Q = range(1, n + 1)
    D = range(1, m + 1)
    commodities = build_commodities(spec)
    model = Model(spec, m, commodities, options, costs)
    b = _Builder(model)

    for kind, fn in (("t", t), ("w", w), ("y", y)):
        for d in D:
            for q in Q:
                b.var(kind, (q, d), fn(q, d), BINARY)
    model.objective = [(costs(q - 1, n - q), y(q, d)) for d in D for q in Q]

    for d in D:
        for q in Q:
            b.add(f"target_or_control_q{q}_d{d}", "target_or_control",
                  [(1, t(q, d)), (1, w(q, d))], LE, 1)
        b.add(f"one_target_d{d}", "one_target", [(1, t(q, d)) for q in Q], LE, 1)
        for q in Q:
            b.add(f"control_needs_target_q{q}_d{d}", "control_needs_target",
                  [(1, w(q, d))] + [(-1, t(r, d)) for r in Q], LE, 0)
        b.add(f"gate_size_d{d}", "gate_size",
              [(q, y(q, d)) for q in Q] + [(-1, t(q, d)) for q in Q] + [(-1, w(q, d)) for q in Q],
              EQ, 0)
        b.add(f"one_size_d{d}", "one_size", [(1, y(q, d)) for q in Q], LE, 1)

    x_domain = UNIT if options.relax_x else BINARY
    for c in commodities:
        net = build_network(n, m, c)
        k = c.index
        for a in net.arcs:
            b.var("x", (k, a.id), x(k, a.id), x_domain)
        for v in net.vertices:
            terms = [(1, x(k, a.id)) for a in net.out_arcs(v)]
            terms += [(-1, x(k, a.id)) for a in net.in_arcs(v)]
            rhs = c.demand if v == SOURCE else -c.demand if v == SINK else 0
            label = v.kind if v.kind != "L" else f"{state_to_bits(v.state, n)}_{v.layer}"
            b.add(f"flow_balance_k{k}_{label}", "flow_balance", terms, EQ, rhs)
        for a in net.arcs:
            d = a.gate
            if a.kind == FLIP_ARC:
                b.add(f"flip_target_k{k}_a{a.id}", "flip_target",
                      [(1, x(k, a.id)), (-1, t(a.qubit, d))], LE, 0)
                for q0 in _zero_qubits(a.state, n):
                    b.add(f"flip_control_k{k}_a{a.id}_q{q0}", "flip_control",
                          [(1, x(k, a.id)), (1, w(q0, d))], LE, 1)
            elif a.kind == KEEP_ARC:
                b.add(f"keep_closed_k{k}_a{a.id}", "keep_closed",
                      [(1, x(k, a.id))] + [(1, t(q, d)) for q in Q]
                      + [(-1, w(q0, d)) for q0 in _zero_qubits(a.state, n)],
                      LE, 1)

    if options.symmetry:
        for d in range(1, m):
            e = d + 1
            b.add(f"sym_empty_last_d{d}", "sym_empty_last",
                  [(1, t(q, d)) for q in Q] + [(-1, t(q, e)) for q in Q], GE, 0)
            for q in Q:
                for r in range(1, q):
                    b.add(f"sym_diff_target_d{d}_q{q}_r{r}", "sym_diff_target",
                          [(1, t(q, d)), (1, t(r, e)), (-1, w(q, e)), (-1, w(r, d))], LE, 1)
            for q in Q:
                b.add(f"sym_same_target_d{d}_q{q}", "sym_same_target",
                      [(1, w(r, d)) for r in Q] + [(-1, w(r, e)) for r in Q]
                      + [(-(n - 1), t(q, d)), (-(n - 1), t(q, e))],
                      GE, -2 * (n - 1))
    return model


def _zero_qubits(state: int, n: int) -> list[int]:
    return [q for q in range(1, n + 1) if not state >> (n - q) & 1]


# --- export ----------------------------------------------------------------

def _expr(terms: Iterable[tuple[int, str]], width: int = 200) -> list[str]:
    """LP-format linear expression, split into lines of bounded width."""
    lines, cur = [], ""
    for i, (c, v) in enumerate(terms):
        sign = "-" if c < 0 else "+"
        mag = abs(c)
        tok = v if mag == 1 else f"{mag} {v}"
        if i == 0:
            tok = tok if sign == "+" else f"- {tok}"
        else:
            tok = f"{sign} {tok}"
        if cur and len(cur) + len(tok) + 1 > width:
            lines.append(cur)
            cur = tok
        else:
            cur = f"{cur} {tok}" if cur else tok
    lines.append(cur or "0")
    return lines


def export_lp(model: Model) -> str:
    opts = model.options
    out = [
        f"\\ MCT circuit design model: n={model.n} m={model.m} "
        f"commodities={len(model.commodities)} symmetry={'on' if opts.symmetry else 'off'} "
        f"x={'continuous' if opts.relax_x else 'binary'}",
        "Minimize",
    ]
    expr = _expr(model.objective)
    out.append(f" cost: {expr[0]}")
    out += [f"   {line}" for line in expr[1:]]
    out.append("Subject To")
    for con in model.constraints:
        expr = _expr(con.terms)
        if len(expr) == 1:
            out.append(f" {con.name}: {expr[0]} {con.sense} {con.rhs}")
        else:
            out.append(f" {con.name}: {expr[0]}")
            out += [f"   {line}" for line in expr[1:-1]]
            out.append(f"   {expr[-1]} {con.sense} {con.rhs}")
    out.append("Bounds")
    out += [f" 0 <= {v.name} <= 1" for v in model.variables if v.domain == UNIT]
    out.append("Binaries")
    out += [f" {v.name}" for v in model.binaries]
    out.append("End")
    return "\n".join(out) + "\n"


def model_to_dict(model: Model) -> dict:
    return {
        "format": JSON_FORMAT,
        "version": JSON_VERSION,
        "n": model.n,
        "m": model.m,
        "options": {"symmetry": model.options.symmetry, "relax_x": model.options.relax_x},
        "commodities": [
            {
                "k": c.index,
                "pattern": str(c.pattern),
                "in_states": [state_to_bits(s, model.n) for s in c.in_states],
                "out_states": [state_to_bits(s, model.n) for s in c.out_states],
            }
            for c in model.commodities
        ],
        "variables": [
            {"name": v.name, "kind": v.kind, "index": list(v.index), "domain": v.domain}
            for v in model.variables
        ],
        "objective": [{"coef": c, "var": v} for c, v in model.objective],
        "constraints": [
            {
                "name": con.name,
                "tag": con.tag,
                "terms": [{"coef": c, "var": v} for c, v in con.terms],
                "sense": con.sense,
                "rhs": con.rhs,
            }
            for con in model.constraints
        ],
    }


def export_json(model: Model) -> str:
    return json.dumps(model_to_dict(model), indent=1) + "\n"


# --- solutions -------------------------------------------------------------

def design_values(circuit: Circuit) -> dict[str, int]:
    """t, w and y values describing ``circuit``'s gates."""
    n = circuit.n
    values = {}
    for d, g in enumerate(circuit.slots, 1):
        for q in range(1, n + 1):
            values[t(q, d)] = int(g is not None and g.target == q)
            values[w(q, d)] = int(g is not None and q in g.controls)
            values[y(q, d)] = int(g is not None and g.size == q)
    return values


def embed_solution(circuit: Circuit, model: Model) -> dict[str, int]:
    """Full variable assignment that encodes ``circuit`` in ``model``.

    Raises NoFeasibleFlow naming the first commodity and input state the
    circuit sends to a forbidden output.
    """
    if circuit.n != model.n or circuit.m != model.m:
        raise ValueError(
            f"circuit is {circuit.n}x{circuit.m}, model is {model.n}x{model.m}"
        )
    values = design_values(circuit)
    for c in model.commodities:
        flow = induced_flow(circuit, model.network(c.index))
        for a, val in flow.items():
            values[x(c.index, a)] = val
    return values


@dataclass(frozen=True)
class CheckReport:
    passed: bool
    objective: float
    violated: str | None = None  # constraint name
    tag: str | None = None

    def __bool__(self) -> bool:
        return self.passed


def check_assignment(model: Model, values: Mapping[str, float]) -> CheckReport:
    """Evaluate every constraint (in build order), then variable domains."""
    missing = [v.name for v in model.variables if v.name not in values]
    if missing:
        raise ValueError(f"assignment is missing {len(missing)} variables, e.g. {missing[0]}")
    obj = model.objective_value(values)
    for con in model.constraints:
        if not con.holds(values):
            return CheckReport(False, obj, con.name, con.tag)
    for v in model.variables:
        val = values[v.name]
        if not -TOL <= val <= 1 + TOL or (
            v.domain == BINARY and min(abs(val), abs(val - 1)) > TOL
        ):
            return CheckReport(False, obj, v.name, "domain")
    return CheckReport(True, obj)


def decode_circuit(model: Model, values: Mapping[str, float]) -> Circuit:
    """Read the gates back out of the design variables of a solution."""
    slots = []
    for d in range(1, model.m + 1):
        targets = [q for q in range(1, model.n + 1) if values[t(q, d)] > 0.5]
        if len(targets) > 1:
            raise ValueError(f"gate {d} has {len(targets)} targets")
        if not targets:
            slots.append(None)
            continue
        controls = frozenset(q for q in range(1, model.n + 1) if values[w(q, d)] > 0.5)
        slots.append(Gate(targets[0], controls))
    return Circuit(model.n, tuple(slots))


def parse_solution(text: str) -> dict[str, float]:
    """Read ``<name> <value>`` lines, the common denominator of solver output."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        if len(fields) != 2:
            raise ValueError(f"line {lineno}: expected '<name> <value>', got {line!r}")
        values[fields[0]] = float(fields[1])
    return values
