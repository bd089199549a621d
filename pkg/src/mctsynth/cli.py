"""Command-line front end.

Exit codes are the machine contract: 0 success, 1 parse or dimension error,
2 unrealizable specification, 3 infeasible / not satisfied, 4 timed out.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict, dataclass, field
from typing import Optional

from .circuit import DEFAULT_COSTS, canonicalize, circuit_cost, is_canonical, parse_cost_table, read_circuit
from .model import ModelOptions, build_model, export_json, export_lp
from .search import SearchOptions, Status, default_workers, synthesize
from .simulator import run_circuit, violations
from .spec_io import read_spec, state_to_bits, validate_realizable

EXIT_OK = 0
EXIT_PARSE = 1
EXIT_UNREALIZABLE = 2
EXIT_INFEASIBLE = 3
EXIT_TIMEOUT = 4

DEFAULT_TIME_LIMIT = 3600.0

_STATUS_EXIT = {
    Status.OPTIMAL: EXIT_OK,
    Status.INFEASIBLE: EXIT_INFEASIBLE,
    Status.TIMED_OUT: EXIT_TIMEOUT,
}


@dataclass
class RunReport:
    command: list[str]
    spec: Optional[str] = None
    n: Optional[int] = None
    m: Optional[int] = None
    status: Optional[str] = None
    cost: Optional[int] = None
    runtime_seconds: Optional[float] = None
    nodes_explored: Optional[int] = None
    outputs: list[str] = field(default_factory=list)
    circuit: Optional[str] = None

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)


def _load_costs(path):
    if path is None:
        return DEFAULT_COSTS
    with open(path, encoding="utf-8") as f:
        return parse_cost_table(f.read())


def _write(path, text):
    with open(path, "w", encoding="utf-8") as f:
        f.write(text)


def _fail(msg: str, code: int) -> int:
    print(f"error: {msg}", file=sys.stderr)
    return code


def cmd_synth(args) -> int:
    report = RunReport(command=args.argv, spec=args.spec, m=args.gates)
    try:
        spec = read_spec(args.spec)
        costs = _load_costs(args.cost_table)
    except (OSError, ValueError) as exc:
        return _fail(str(exc), EXIT_PARSE)
    report.n = spec.n
    if not validate_realizable(spec):
        report.status = "unrealizable"
        if args.json:
            print(report.to_json())
        return _fail("specification is not realizable by any permutation", EXIT_UNREALIZABLE)
    opts = SearchOptions(
        time_limit=args.time_limit,
        symmetry_pruning=not args.no_symmetry,
        workers=args.threads,
    )
    outcome = synthesize(spec, args.gates, opts, costs)
    report.status = outcome.status.value
    report.cost = outcome.cost
    report.runtime_seconds = round(outcome.elapsed, 6)
    report.nodes_explored = outcome.nodes_explored
    if outcome.circuit is not None:
        text = outcome.circuit.to_text()
        report.circuit = text
        if args.out:
            _write(args.out, text)
            report.outputs.append(args.out)
    if args.json:
        print(report.to_json())
    else:
        print(f"status: {outcome.status.value}")
        if outcome.circuit is not None:
            print(f"cost: {outcome.cost}")
            if not args.out:
                print(outcome.circuit.to_text(), end="")
        print(f"nodes: {outcome.nodes_explored}  time: {outcome.elapsed:.3f}s")
    return _STATUS_EXIT[outcome.status]


def cmd_verify(args) -> int:
    try:
        circuit = read_circuit(args.circuit)
        spec = read_spec(args.spec)
    except (OSError, ValueError) as exc:
        return _fail(str(exc), EXIT_PARSE)
    if circuit.n != spec.n:
        return _fail(f"circuit has {circuit.n} qubits, spec has {spec.n}", EXIT_PARSE)
    bad = violations(circuit, spec)
    if not bad:
        print("ok: circuit meets the specification")
        return EXIT_OK
    # the first line is the first violated row; the rest follow in input order
    for s in bad:
        got = run_circuit(circuit, s)
        print(
            f"violation: input {state_to_bits(s, spec.n)} -> {state_to_bits(got, spec.n)}, "
            f"expected {spec.rows[s]}"
        )
    return EXIT_INFEASIBLE


def cmd_cost(args) -> int:
    try:
        circuit = read_circuit(args.circuit)
        costs = _load_costs(args.cost_table)
    except (OSError, ValueError) as exc:
        return _fail(str(exc), EXIT_PARSE)
    print(circuit_cost(circuit, costs))
    return EXIT_OK


def cmd_export(args) -> int:
    try:
        spec = read_spec(args.spec)
        costs = _load_costs(args.cost_table)
    except (OSError, ValueError) as exc:
        return _fail(str(exc), EXIT_PARSE)
    if not validate_realizable(spec):
        return _fail("specification is not realizable by any permutation", EXIT_UNREALIZABLE)
    if args.gates < 1:
        return _fail("the model needs --gates >= 1", EXIT_PARSE)
    opts = ModelOptions(symmetry=not args.no_symmetry, relax_x=not args.binary_x)
    model = build_model(spec, args.gates, opts, costs)
    text = export_lp(model) if args.format == "lp" else export_json(model)
    if args.out:
        _write(args.out, text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_canonicalize(args) -> int:
    try:
        circuit = read_circuit(args.circuit)
    except (OSError, ValueError) as exc:
        return _fail(str(exc), EXIT_PARSE)
    already = is_canonical(circuit)
    text = canonicalize(circuit).to_text()
    if args.out:
        _write(args.out, text)
    else:
        sys.stdout.write(text)
    note = "input was already canonical" if already else "input was swapped into canonical form"
    # keep stdout clean when the circuit itself goes there
    print(note, file=sys.stdout if args.out else sys.stderr)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mctsynth", description="Exact minimum quantum-cost MCT circuit synthesis."
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="synthesize a minimum-cost circuit")
    p.add_argument("spec")
    p.add_argument("--gates", "-m", type=int, required=True)
    p.add_argument("--time-limit", type=float, default=DEFAULT_TIME_LIMIT, help="seconds (default 3600)")
    p.add_argument("--no-symmetry", action="store_true", help="search swappable circuits too")
    p.add_argument("--out", help="write the circuit here")
    p.add_argument("--json", action="store_true", help="print a JSON run report")
    p.add_argument("--threads", type=int, default=None,
                   help="worker processes (default: $MCTSYNTH_THREADS, else 1)")
    p.add_argument("--cost-table", help="'<p> <s> <cost>' override file")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("verify", help="check a circuit against a specification")
    p.add_argument("circuit")
    p.add_argument("spec")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("cost", help="print a circuit's quantum cost")
    p.add_argument("circuit")
    p.add_argument("--cost-table")
    p.set_defaults(func=cmd_cost)

    p = sub.add_parser("export", help="write the optimization model")
    p.add_argument("spec")
    p.add_argument("--gates", "-m", type=int, required=True)
    p.add_argument("--format", choices=("lp", "json"), default="lp")
    p.add_argument("--no-symmetry", action="store_true")
    p.add_argument("--binary-x", action="store_true", help="declare flow variables binary")
    p.add_argument("--out")
    p.add_argument("--cost-table")
    p.set_defaults(func=cmd_export)

    p = sub.add_parser("canonicalize", help="swap gates into canonical order")
    p.add_argument("circuit")
    p.add_argument("--out")
    p.set_defaults(func=cmd_canonicalize)
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors; 2 means "unrealizable" here
        return EXIT_PARSE if exc.code else EXIT_OK
    args.argv = ["mctsynth", *argv]
    if args.command == "synth" and args.threads is None:
        args.threads = default_workers()
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
