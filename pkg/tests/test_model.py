import json
import random
from collections import Counter

import pytest
from hypothesis import given, settings

from mctsynth.circuit import Circuit, Gate, circuit_cost, is_canonical
from mctsynth.flownet import NoFeasibleFlow
from mctsynth.model import (
    BINARY,
    UNIT,
    ModelOptions,
    UnrealizableSpec,
    build_model,
    check_assignment,
    decode_circuit,
    design_values,
    embed_solution,
    export_json,
    export_lp,
    model_to_dict,
    parse_solution,
)
from mctsynth.simulator import satisfies
from mctsynth.spec_io import parse_spec, read_spec

from conftest import FIXTURES, circuits, random_circuit, random_spec
from oracles import lp_flow_feasible

DONT_CARE3 = parse_spec(".n 3\n")


@pytest.fixture(scope="module")
def ex2_model():
    return build_model(read_spec(FIXTURES / "example2.spec"), 2)


def test_variable_layout(ex2_model):
    names = [v.name for v in ex2_model.variables]
    assert names[:4] == ["t_1_1", "t_2_1", "t_3_1", "t_1_2"]
    assert names[6:8] == ["w_1_1", "w_2_1"]
    assert names[18] == "x_1_1"
    assert len(ex2_model.binaries) == 18
    assert all(v.domain == UNIT for v in ex2_model.variables if v.kind == "x")


def test_constraint_counts(ex2_model):
    tags = Counter(c.tag for c in ex2_model.constraints)
    # 7 commodities, 2 gates, 8 states, 3 flips each
    assert tags["flip_target"] == 7 * 2 * 8 * 3
    assert tags["keep_closed"] == 7 * 2 * 8
    assert tags["flow_balance"] == 7 * (2 + 3 * 8)
    assert tags["one_target"] == 2
    assert tags["sym_empty_last"] == 1
    assert tags["sym_diff_target"] == 3
    assert tags["sym_same_target"] == 3
    names = [c.name for c in ex2_model.constraints]
    assert len(set(names)) == len(names)


def test_objective_uses_gate_costs(ex2_model):
    coef = dict((v, c) for c, v in ex2_model.objective)
    assert [coef[f"y_{q}_1"] for q in (1, 2, 3)] == [1, 1, 5]


def test_binary_x_option():
    model = build_model(read_spec(FIXTURES / "example2.spec"), 1, ModelOptions(relax_x=False))
    assert all(v.domain == BINARY for v in model.variables)


def test_no_symmetry_option():
    model = build_model(DONT_CARE3, 3, ModelOptions(symmetry=False))
    assert not any(c.tag.startswith("sym_") for c in model.constraints)


def test_bad_inputs():
    with pytest.raises(ValueError):
        build_model(DONT_CARE3, 0)
    with pytest.raises(UnrealizableSpec):
        build_model(read_spec(FIXTURES / "unrealizable.spec"), 2)


def test_embed_example2(ex2_model, ex2_circuit):
    values = embed_solution(ex2_circuit, ex2_model)
    report = check_assignment(ex2_model, values)
    assert report.passed and report.objective == 2
    assert decode_circuit(ex2_model, values) == ex2_circuit


def test_embed_rejects_wrong_circuit(ex2_model):
    with pytest.raises(NoFeasibleFlow) as info:
        embed_solution(Circuit.empty(3, 2), ex2_model)
    assert info.value.commodity == 2
    with pytest.raises(ValueError):
        embed_solution(Circuit.empty(3, 3), ex2_model)


def test_check_reports_first_violation(ex2_model, ex2_circuit):
    values = embed_solution(ex2_circuit, ex2_model)
    values["t_2_1"] = 1  # second target on gate 1
    report = check_assignment(ex2_model, values)
    assert not report
    assert report.violated == "target_or_control_q2_d1"
    del values["x_1_1"]
    with pytest.raises(ValueError):
        check_assignment(ex2_model, values)


def test_domain_check():
    # half a NOT on each of two qubits: every linear row holds, only integrality fails
    model = build_model(parse_spec(".n 2\n"), 1, ModelOptions(symmetry=False))
    values = {v.name: 0.0 for v in model.variables}
    values.update({"t_1_1": 0.5, "t_2_1": 0.5, "y_1_1": 1.0})
    for a in model.network(1).arcs:
        if a.kind in ("source", "sink"):
            values[f"x_1_{a.id}"] = 1.0
        elif a.kind == "flip":
            values[f"x_1_{a.id}"] = 0.5
    report = check_assignment(model, values)
    assert not report
    assert (report.tag, report.violated) == ("domain", "t_1_1")


@settings(max_examples=120, deadline=None)
@given(circuits(max_n=3, max_m=3))
def test_symmetry_constraints_match_canonical_form(c):
    if c.n != 3 or c.m == 0:
        return
    model = build_model(DONT_CARE3, c.m)
    report = check_assignment(model, embed_solution(c, model))
    assert report.passed == is_canonical(c)
    if not report.passed:
        assert report.tag.startswith("sym_")


def test_model_agrees_with_simulator_and_lp_oracle():
    rng = random.Random(11)
    checked = 0
    while checked < 40:
        spec = random_spec(rng, 2)
        try:
            model = build_model(spec, 2, ModelOptions(symmetry=False))
        except UnrealizableSpec:
            continue
        c = random_circuit(rng, 2, 2)
        ok = satisfies(c, spec)
        try:
            values = embed_solution(c, model)
            passed = check_assignment(model, values)
        except NoFeasibleFlow:
            passed = False
        assert bool(passed) == ok
        if ok:
            assert passed.objective == circuit_cost(c)
        assert lp_flow_feasible(model, design_values(c)) == ok
        checked += 1


def test_lp_export_layout(ex2_model):
    text = export_lp(ex2_model)
    lines = text.splitlines()
    heads = [ln for ln in lines if ln in ("Minimize", "Subject To", "Bounds", "Binaries", "End")]
    assert heads == ["Minimize", "Subject To", "Bounds", "Binaries", "End"]
    assert lines[2].startswith(" cost: y_1_1 + y_2_1 + 5 y_3_1")
    binaries = lines[lines.index("Binaries") + 1:lines.index("End")]
    assert len(binaries) == 18
    bounds = lines[lines.index("Bounds") + 1:lines.index("Binaries")]
    assert all(b.startswith(" 0 <= x_") for b in bounds)
    assert " one_target_d1: t_1_1 + t_2_1 + t_3_1 <= 1" in lines
    assert max(len(ln) for ln in lines) <= 260


def test_json_export(ex2_model):
    data = json.loads(export_json(ex2_model))
    assert data["format"] == "mctsynth-model" and data["version"] == 1
    assert (data["n"], data["m"]) == (3, 2)
    assert data["commodities"][1] == {
        "k": 2, "pattern": "11-", "in_states": ["010"], "out_states": ["110", "111"],
    }
    assert len(data["constraints"]) == len(ex2_model.constraints)
    assert data == model_to_dict(ex2_model)


def test_parse_solution(ex2_model, ex2_circuit):
    values = embed_solution(ex2_circuit, ex2_model)
    text = "# solver output\n" + "".join(f"{k} {v}\n" for k, v in values.items())
    parsed = parse_solution(text)
    assert decode_circuit(ex2_model, parsed) == ex2_circuit
    with pytest.raises(ValueError):
        parse_solution("t_1_1\n")


def test_decode_multiple_targets(ex2_model, ex2_circuit):
    values = design_values(ex2_circuit)
    values["t_2_1"] = 1
    with pytest.raises(ValueError):
        decode_circuit(ex2_model, values)


def test_design_values_size():
    c = Circuit(3, (Gate(3, frozenset({1, 2})), None))
    v = design_values(c)
    assert v["y_3_1"] == 1 and v["y_1_2"] == 0 and sum(v.values()) == 1 + 2 + 1
