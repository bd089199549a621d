"""Exact synthesis of minimum quantum-cost MCT circuits."""
from .circuit import (
    DEFAULT_COSTS,
    Circuit,
    CircuitError,
    CostTable,
    Gate,
    canonicalize,
    circuit_cost,
    gate_cost,
    is_canonical,
    parse_circuit,
    read_circuit,
    zero_qubits,
)
from .flownet import NoFeasibleFlow, build_network, induced_flow
from .model import (
    ModelOptions,
    UnrealizableSpec,
    build_model,
    check_assignment,
    embed_solution,
    export_json,
    export_lp,
)
from .search import Outcome, SearchOptions, Status, brute_force_min_cost, prove_gate_infeasibility, synthesize
from .simulator import Permutation, apply_gate, induced_permutation, run_circuit, satisfies
from .spec_io import (
    OutputPattern,
    SpecError,
    Specification,
    build_commodities,
    parse_spec,
    read_spec,
    validate_realizable,
)

__version__ = "0.1.0"
