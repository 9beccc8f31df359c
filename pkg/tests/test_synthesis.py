"""Tests for stream derivatives, the minimal machine, the state order and synthesis"""
from itertools import product
from random import Random

import pytest
from hypothesis import assume, given, settings
from hypothesis.strategies import integers

from models.mealy_models import MealyMachine
from models.synthesis_models import PrefixPeriodicSpec, SpecRequest
from services.errors import DerivativeBudgetExceeded, FileFormatError, SynthesisError
from services.fuzz_service import random_circuit, random_waveform
from services.library_service import constant_bottom_spec, delay_spec, example_stream_spec, fig4_machine
from services.mealy_service import bisimilar, circuit_to_mealy, load_machine, minimize, output_stream, to_opaque
from services.semantics_service import simulate
from services.signature_service import belnap
from services.synthesis_service import (
    SynthesisService, blackbox_spec, check_circuit_function, functional_derivative, initial_output,
    load_spec, machine_to_circuit, minimal_mealy, normalize, parse_spec, spec_to_circuit, state_assignment,
    state_order, synthesize
)

NOT_MONOTONE = "spec m=1 n=1 window=1\nperiod:\ntable\n  t -> t\n  T -> f\n"

###################################################################################################
# Derivatives and the minimal machine
###################################################################################################


def test_initial_output_and_derivative(interp):
    spec = example_stream_spec(interp)
    t, bot = interp.element("t"), interp.lattice.bottom
    assert initial_output(spec, (t,)) == (t, bot)
    after = functional_derivative(spec, (t,))
    assert initial_output(after, (bot,)) == (bot, t)
    assert initial_output(functional_derivative(after, (bot,)), (t,)) == (bot, interp.element("f"))


def test_normalize_shortens_the_period(interp):
    spec = delay_spec(interp)
    doubled = PrefixPeriodicSpec(spec.lattice, 1, 1, 2, (spec.period[0],), spec.period * 2)
    normal = normalize(doubled)
    assert normal.prefix == ()
    assert len(normal.period) == 1


@pytest.mark.parametrize("make, states", [
    (example_stream_spec, 6),
    (delay_spec, 4),
    (constant_bottom_spec, 1),
])
def test_minimal_state_counts(interp, make, states):
    assert len(minimal_mealy(make(interp)).states) == states


def test_minimal_machine_of_example(interp):
    machine = minimal_mealy(example_stream_spec(interp))
    expected = fig4_machine(interp)
    assert machine.states == expected.states
    for s in machine.states:
        for a in product(range(interp.lattice.size), repeat=1):
            assert machine.step(s, a) == expected.step(s, a)


def test_derivative_budget(interp):
    with pytest.raises(DerivativeBudgetExceeded):
        minimal_mealy(example_stream_spec(interp), budget=3)


ALTERNATING_PAIRS = (
    "spec m=2 n=1 window=4\nperiod:\ntable\n  * | * | * | * -> t\ntable\n  * | * | * | * -> f\n"
)
NEWEST_SECOND_WIRE = (
    "spec m=2 n=1 window=4\nperiod:\ntable\n"
    "  * | * | * | *,t -> t\n  * | * | * | *,f -> f\n  * | * | * | *,T -> T\n"
)


def test_unread_history_does_not_split_residuals(interp):
    spec = parse_spec(ALTERNATING_PAIRS, interp)
    assert len(minimal_mealy(spec, budget=4).states) == 2
    verdict = check_circuit_function(spec, interp)
    assert verdict.accepted
    assert (verdict.states, verdict.prefix, verdict.period) == (2, 0, 2)


def test_only_the_newest_tick_is_read(interp):
    machine = minimal_mealy(parse_spec(NEWEST_SECOND_WIRE, interp), budget=2)
    assert len(machine.states) == 1
    t, f = interp.element("t"), interp.element("f")
    assert machine.step("s0", (t, f)) == ("s0", (f,))


###################################################################################################
# State order and assignment
###################################################################################################


def test_example_state_order(interp):
    order = state_order(fig4_machine(interp))
    strict = {(s, t) for s, t in order.pairs if s != t}
    assert strict == {("s1", "s2"), ("s1", "s3"), ("s2", "s4"), ("s3", "s4"), ("s1", "s4")}


def test_state_assignment_embeds_the_order(interp):
    order = state_order(fig4_machine(interp))
    gamma = state_assignment(order)
    assert gamma.width == 6
    lattice = interp.lattice
    for s, code in gamma.codes.items():
        assert set(code) <= {lattice.bottom, lattice.top}
    for s, t in product(gamma.codes, repeat=2):
        below = all(lattice.le(a, b) for a, b in zip(gamma.codes[s], gamma.codes[t]))
        assert below == order.le(s, t)


###################################################################################################
# Circuit functions
###################################################################################################


def test_example_is_a_circuit_function(interp):
    verdict = check_circuit_function(example_stream_spec(interp), interp)
    assert verdict.accepted
    assert (verdict.states, verdict.prefix, verdict.period) == (6, 1, 2)


def test_budget_rejection(interp):
    verdict = check_circuit_function(example_stream_spec(interp), interp, budget=3)
    assert not verdict.accepted
    assert verdict.code == "DerivativeBudgetExceeded"


def test_non_monotone_table_is_rejected(interp):
    spec = parse_spec(NOT_MONOTONE, interp)
    verdict = check_circuit_function(spec, interp)
    assert not verdict.accepted
    assert verdict.code == "NotMonotone"
    with pytest.raises(SynthesisError):
        synthesize(spec, interp)


def test_non_monotone_machine_is_rejected(interp):
    lattice = interp.lattice
    t, f = interp.element("t"), interp.element("f")
    # raising the input from ⊥ to t lowers the output from t to f
    outputs = {lattice.bottom: t, t: f, f: f, lattice.top: lattice.top}
    machine = MealyMachine(lattice, 1, 1, ("q",), "q", {
        ("q", (a,)): ("q", (outputs[a],)) for a in range(lattice.size)
    })
    verdict = check_circuit_function(blackbox_spec(machine), interp)
    assert not verdict.accepted
    assert verdict.code == "NotMonotone"


###################################################################################################
# Synthesis
###################################################################################################


@settings(max_examples=50, deadline=None)
@given(integers(min_value=0, max_value=2 ** 32))
def test_synthesized_machine_meets_the_spec(seed):
    interp = belnap()
    spec = example_stream_spec(interp)
    synthesized = synthesize(spec, interp)
    waveform = random_waveform(Random(seed), interp.lattice, 1, 12)
    assert output_stream(synthesized, waveform, 12) == output_stream(minimal_mealy(spec), waveform, 12)


@settings(max_examples=30, deadline=None)
@given(integers(min_value=0, max_value=2 ** 32))
def test_circuit_round_trips_through_its_stream(seed):
    interp = belnap()
    c = random_circuit(Random(seed), interp, 1, 1, gates=3, delays=1, traces=1)
    machine = to_opaque(circuit_to_mealy(c, interp))
    # the synthesized transition table has |V|^(states + 1) points
    assume(len(minimize(machine).states) <= 6)
    rebuilt = machine_to_circuit(machine, interp)
    assert bisimilar(circuit_to_mealy(rebuilt, interp), circuit_to_mealy(c, interp))


def test_synthesized_example_is_bisimilar(interp):
    spec = example_stream_spec(interp)
    machine = synthesize(spec, interp)
    assert machine.state_width == 6
    assert bisimilar(machine, minimal_mealy(spec))


def test_delay_spec_to_circuit(circuit, interp):
    c = spec_to_circuit(delay_spec(interp), interp)
    assert c.arity == (1, 1)
    rng = Random(5)
    for _ in range(10):
        waveform = random_waveform(rng, interp.lattice, 1, 4)
        assert simulate(c, waveform, 5, interp) == simulate(circuit("delay"), waveform, 5, interp)


def test_opaque_machine_to_circuit(circuit, interp, examples):
    c = machine_to_circuit(load_machine(str(examples / "delay.mealy"), interp), interp)
    rng = Random(9)
    for _ in range(10):
        waveform = random_waveform(rng, interp.lattice, 1, 4)
        assert simulate(c, waveform, 5, interp) == simulate(circuit("delay"), waveform, 5, interp)


###################################################################################################
# Spec files
###################################################################################################


def test_example_spec_file(interp, examples):
    spec = load_spec(str(examples / "example.spec"), interp)
    assert bisimilar(minimal_mealy(spec), fig4_machine(interp))


def test_delay_spec_file(interp, examples):
    assert len(minimal_mealy(load_spec(str(examples / "delay.spec"), interp)).states) == 4


def test_blackbox_spec_file(interp, examples):
    text = "spec m=1 n=1\nblackbox:\n" + (examples / "delay.mealy").read_text()
    assert len(minimal_mealy(parse_spec(text, interp)).states) == 4


@pytest.mark.parametrize("text", [
    "period:\ntable\n  * -> t\n",
    "spec m=1 n=1 window=1\nprefix:\ntable\n  * -> t\n",
    "spec m=1 n=1 window=1\nperiod:\ntable\n  t | t -> t\n",
    "spec m=1 n=1 window=1\nperiod:\ntable\n  t -> *\n",
    "spec m=1 n=1 window=0\nperiod:\ntable\n",
    "spec m=1 n=1 window=1\n  t -> t\n",
])
def test_malformed_specs(interp, text):
    with pytest.raises(FileFormatError):
        parse_spec(text, interp)


###################################################################################################
# Service
###################################################################################################


def test_service(examples):
    service = SynthesisService()
    text = (examples / "example.spec").read_text()
    checked = service.check(SpecRequest(spec=text))
    assert checked.success and checked.accepted
    assert (checked.states, checked.prefix, checked.period) == (6, 1, 2)
    minimal = service.minimal_machine(SpecRequest(spec=text))
    assert minimal.states == 6
    synthesized = service.synthesize(SpecRequest(spec=(examples / "delay.spec").read_text(), emit="circuit"))
    assert synthesized.success
    assert synthesized.output.startswith("trace4(")
    rejected = service.synthesize(SpecRequest(spec=NOT_MONOTONE))
    assert not rejected.success and "NotMonotone" in rejected.error
