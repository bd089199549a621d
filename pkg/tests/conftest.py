import random
from pathlib import Path

import pytest
from hypothesis import strategies as st

from mctsynth.circuit import Circuit, Gate, read_circuit
from mctsynth.spec_io import OutputPattern, Specification, read_spec

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture
def fixture_path():
    return lambda name: FIXTURES / name


@pytest.fixture
def ex1_spec():
    return read_spec(FIXTURES / "example1.spec")


@pytest.fixture
def ex2_spec():
    return read_spec(FIXTURES / "example2.spec")


@pytest.fixture
def ex1_circuit():
    return read_circuit(FIXTURES / "example1.circuit")


@pytest.fixture
def ex2_circuit():
    return read_circuit(FIXTURES / "example2.circuit")


def random_gate(rng: random.Random, n: int) -> Gate:
    target = rng.randint(1, n)
    controls = frozenset(q for q in range(1, n + 1) if q != target and rng.random() < 0.4)
    return Gate(target, controls)


def random_circuit(rng: random.Random, n: int, m: int, p_empty: float = 0.2) -> Circuit:
    return Circuit(n, tuple(None if rng.random() < p_empty else random_gate(rng, n) for _ in range(m)))


def blur(rng: random.Random, images, n: int, p_dc: float) -> Specification:
    """Spec whose rows keep each output bit of ``images`` with probability 1 - p_dc."""
    rows = []
    for s in range(1 << n):
        care = 0
        for b in range(n):
            if rng.random() >= p_dc:
                care |= 1 << b
        rows.append(OutputPattern(n, care, images[s] & care))
    return Specification(n, tuple(rows))


def random_spec(rng: random.Random, n: int) -> Specification:
    """Mix of reachable, arbitrary-permutation and arbitrary-pattern specs."""
    from mctsynth.simulator import induced_permutation

    kind = rng.random()
    if kind < 0.5:
        c = random_circuit(rng, n, rng.randint(0, 3))
        return blur(rng, induced_permutation(c).images, n, rng.choice([0.0, 0.2, 0.5]))
    if kind < 0.8:
        images = list(range(1 << n))
        rng.shuffle(images)
        return blur(rng, images, n, rng.choice([0.0, 0.3, 0.6]))
    rows = []
    for _ in range(1 << n):
        rows.append(OutputPattern.parse("".join(rng.choice("01--") for _ in range(n))))
    return Specification(n, tuple(rows))


@st.composite
def gates(draw, n):
    target = draw(st.integers(1, n))
    controls = draw(st.frozensets(st.sampled_from([q for q in range(1, n + 1) if q != target]))) if n > 1 else frozenset()
    return Gate(target, controls)


@st.composite
def circuits(draw, max_n=4, max_m=6):
    n = draw(st.integers(1, max_n))
    m = draw(st.integers(0, max_m))
    slots = draw(st.lists(st.one_of(st.none(), gates(n)), min_size=m, max_size=m))
    return Circuit(n, tuple(slots))


@st.composite
def specs(draw, max_n=3):
    n = draw(st.integers(1, max_n))
    pats = draw(st.lists(st.text("01-", min_size=n, max_size=n), min_size=1 << n, max_size=1 << n))
    return Specification(n, tuple(OutputPattern.parse(p) for p in pats))


# --- acceptance summary ------------------------------------------------------

_acceptance = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py" in report.nodeid and "::test_criterion_" in report.nodeid:
        if report.when == "call" or report.outcome != "passed":
            prev = _acceptance.get(report.nodeid)
            if prev is None or prev[0] == "passed":
                _acceptance[report.nodeid] = (report.outcome, report.duration)


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for nodeid, (outcome, duration) in sorted(_acceptance.items()):
        name = nodeid.split("::test_", 1)[1]
        verdict = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"{verdict}  {name}  ({duration:.2f}s)")
