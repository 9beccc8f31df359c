"""Tests for the netlist simulator and the bounded equivalence check"""
from random import Random

import pytest
from hypothesis import given, settings
from hypothesis.strategies import integers

from models.circuit_models import Waveform
from models.semantics_models import SimulateRequest
from services.circuit_service import load_circuit, load_waveform, parse_circuit
from services.errors import ArityMismatch, BudgetExceeded, WidthMismatch
from services.fuzz_service import random_circuit, random_waveform
from services.library_service import FEEDBACK_AND, OSCILLATOR
from services.mealy_service import bisimilar, circuit_to_mealy
from services.rewrite_service import from_trace_delay_form, to_trace_delay_form
from services.semantics_service import (
    SemanticsService, advance, compile_circuit, extensional_equiv_bounded, initial_state, simulate
)
from services.signature_service import belnap


def test_delay_example(interp, examples, symbols):
    c = load_circuit(str(examples / "delay.cir"), interp)
    waveform = load_waveform(str(examples / "in.wav"), interp, c.inputs)
    assert symbols(simulate(c, waveform, 3, interp)) == "B t f"


def test_feedback_and_is_bottom(circuit, symbols):
    assert symbols(simulate(circuit(FEEDBACK_AND), Waveform(0, ()), 5, belnap())) == "B B B B B"


def test_feedback_or_with_value(circuit, symbols, interp):
    # y = y OR t is t on tick 0 only: the value emits once
    c = circuit("trace1(seq(par(id1, val(t)), gate(OR), fork))")
    assert symbols(simulate(c, Waveform(0, ()), 3, interp)) == "t B B"


def test_oscillator_stream(circuit, wave, symbols, interp):
    c = circuit(OSCILLATOR)
    assert c.arity == (1, 2)
    out = simulate(c, wave("t t t t"), 5, interp)
    assert symbols(out) == "t,B B,t B,f B,t B,f"


def test_oscillator_on_bottom_input(circuit, symbols, interp):
    out = simulate(circuit(OSCILLATOR), Waveform(1, ()), 4, interp)
    assert symbols(out) == "t,B B,B B,f B,B"


def test_state_is_tracked_per_tick(circuit, interp):
    net = compile_circuit(circuit("seq(delay, delay)"), interp)
    t = interp.element("t")
    state = initial_state(net)
    state, out = advance(net, state, (t,))
    assert out == (interp.lattice.bottom,)
    state, out = advance(net, state, (interp.lattice.bottom,))
    state, out = advance(net, state, (interp.lattice.bottom,))
    assert state.tick == 3
    assert out == (interp.lattice.bottom,)


def test_two_delays_shift_twice(circuit, wave, symbols, interp):
    assert symbols(simulate(circuit("seq(delay, delay)"), wave("t f"), 4, interp)) == "B B t f"


def test_width_mismatch(circuit, wave, interp):
    with pytest.raises(WidthMismatch):
        simulate(circuit("gate(AND)"), wave("t"), 1, interp)


###################################################################################################
# Bounded equivalence
###################################################################################################


def test_equivalent_delays(circuit, interp):
    verdict = extensional_equiv_bounded(circuit("delay"), circuit("seq(fork, join, delay)"), interp)
    assert verdict
    assert verdict.explored > 0


def test_delay_differs_from_identity(circuit, interp):
    verdict = extensional_equiv_bounded(circuit("delay"), circuit("id1"), interp)
    assert not verdict
    assert verdict.counterexample.ticks == ((interp.element("t"),),)
    assert verdict.left_output == (interp.lattice.bottom,)
    assert verdict.right_output == (interp.element("t"),)


def test_late_difference_is_found(circuit, interp):
    # differ only once an input has travelled through both delays
    left = circuit("seq(delay, delay)")
    right = circuit("seq(delay, delay, gate(NOT))")
    verdict = extensional_equiv_bounded(left, right, interp, budget=2 ** 40)
    assert not verdict
    assert len(verdict.counterexample) == 3


def test_arity_must_match(circuit, interp):
    with pytest.raises(ArityMismatch):
        extensional_equiv_bounded(circuit("delay"), circuit("fork"), interp)


def test_budget(circuit, interp):
    with pytest.raises(BudgetExceeded):
        extensional_equiv_bounded(circuit("seq(delay, delay, delay)"), circuit("seq(delay, delay, delay)"),
                                  interp, budget=1000)


@settings(max_examples=50, deadline=None)
@given(integers(min_value=0, max_value=2 ** 32))
def test_circuit_equivalent_to_itself(seed):
    interp = belnap()
    rng = Random(seed)
    c = random_circuit(rng, interp, 1, 1, gates=2, delays=1, traces=1)
    assert extensional_equiv_bounded(c, c, interp)


@settings(max_examples=50, deadline=None)
@given(integers(min_value=0, max_value=2 ** 32))
def test_bounded_check_agrees_with_bisimulation(seed):
    interp = belnap()
    rng = Random(seed)
    c = random_circuit(rng, interp, 1, 1, gates=2, delays=1, traces=1)
    other = random_circuit(rng, interp, 1, 1, gates=2, delays=1, traces=1)
    bisim = bool(bisimilar(circuit_to_mealy(c, interp), circuit_to_mealy(other, interp)))
    assert extensional_equiv_bounded(c, other, interp).equivalent == bisim
    tdf, _ = to_trace_delay_form(c)
    assert extensional_equiv_bounded(c, from_trace_delay_form(tdf), interp).equivalent


@settings(max_examples=100, deadline=None)
@given(integers(min_value=0, max_value=2 ** 32))
def test_outputs_grow_with_inputs(seed):
    # every circuit is monotone: raising one input tick never lowers an output
    interp = belnap()
    rng = Random(seed)
    c = random_circuit(rng, interp, 1, 1)
    lattice = interp.lattice
    low = random_waveform(rng, lattice, 1, 4)
    k = rng.randrange(4)
    raised = list(low.ticks)
    raised[k] = (lattice.join(raised[k][0], rng.randrange(lattice.size)),)
    high = Waveform(1, tuple(raised))
    space = interp.space(1)
    for a, b in zip(simulate(c, low, 6, interp).ticks, simulate(c, high, 6, interp).ticks):
        assert space.le(a, b)


def test_service_simulate():
    response = SemanticsService().simulate(SimulateRequest(circuit="delay", waveform="t\nf\nt", ticks=3))
    assert response.success
    assert response.outputs == [["B"], ["t"], ["f"]]
    assert response.state_slots == 1


def test_service_reports_parse_errors():
    response = SemanticsService().simulate(SimulateRequest(circuit="seq(delay", ticks=3))
    assert not response.success


def test_parse_circuit_default_interpretation():
    assert parse_circuit("gate(NOT)").arity == (1, 1)
