"""Tests for circuit terms, the DSL and wire graphs"""
from itertools import permutations
from random import Random

import pytest
from hypothesis import given, settings
from hypothesis.strategies import integers

from models.circuit_models import Bot, CircuitRequest, Delay, Fork, Gate, Id, Join, Par, Seq, Top, Trace, Value, Waveform
from services.circuit_service import (
    CircuitService, block_permutation, classify, constant, constant_stream, dependencies, diagonal, discard, fanout,
    flatten, format_waveform, has_instant_feedback, node_counts, parse_circuit, parse_locus, parse_waveform,
    permutation, pointwise_join, print_circuit, register, replace_at, subterm_at, to_dot, walk, waveform_circuit
)
from services.errors import (
    ArityMismatch, CircuitSyntaxError, PatternMismatch, UnknownSymbol, UnknownValue, WidthMismatch
)
from services.fuzz_service import random_circuit
from services.library_service import FEEDBACK_AND, OSCILLATOR
from services.semantics_service import simulate
from services.signature_service import belnap

###################################################################################################
# Terms and the DSL
###################################################################################################


def test_arities():
    assert Seq(Fork(), Join()).arity == (1, 1)
    assert Par(Fork(), Id(2)).arity == (3, 4)
    assert Trace(1, Seq(Join(), Fork())).arity == (1, 1)
    assert Gate("AND", 2).arity == (2, 1)


def test_seq_arity_mismatch():
    with pytest.raises(ArityMismatch):
        Seq(Fork(), Delay())


def test_trace_too_wide():
    with pytest.raises(ArityMismatch):
        Trace(2, Delay())


def test_parse_feedback_and(circuit):
    c = circuit(FEEDBACK_AND)
    assert c == Trace(1, Seq(Seq(Fork(), Gate("AND", 2)), Fork()))
    assert c.arity == (0, 1)


def test_parse_register(circuit):
    assert circuit("reg(t)") == Seq(Par(Value("t"), Delay()), Join())
    assert circuit("reg(B)") == Seq(Par(Bot(), Delay()), Join())


@pytest.mark.parametrize("text", [
    FEEDBACK_AND,
    "seq(reg(t), gate(NOT))",
    "par(id2, swap, bot, top)",
    "trace2(seq(par(delay, delay, fork), par(gate(OR), swap)))",
])
def test_print_round_trip(circuit, text):
    c = circuit(text)
    assert parse_circuit(print_circuit(c)) == c


def test_print_is_canonical(circuit):
    assert print_circuit(circuit("seq( fork ,\n gate(AND) )  # comment")) == "seq(fork, gate(AND))"


def test_syntax_error_position():
    with pytest.raises(CircuitSyntaxError) as error:
        parse_circuit("seq(fork,\n  frobnicate)")
    assert error.value.details == {"line": 2, "column": 3}


@pytest.mark.parametrize("text, error", [
    ("seq(fork)", CircuitSyntaxError),
    ("seq(fork, join", CircuitSyntaxError),
    ("fork join", CircuitSyntaxError),
    ("seq(fork, delay)", ArityMismatch),
    ("gate(XOR)", UnknownSymbol),
    ("val(x)", UnknownValue),
])
def test_parse_errors(text, error):
    with pytest.raises(error):
        parse_circuit(text)


def test_oscillator_counts(circuit):
    counts = node_counts(circuit(OSCILLATOR))
    assert counts["traces"] == 2
    assert counts["values"] == 3
    assert counts["delays"] == 3
    assert counts["gates"] == 1


def test_classify(circuit):
    assert str(classify(circuit("gate(AND)"))) == "combinational, open, passive"
    assert str(classify(circuit("reg(t)"))) == "temporal, open, valued"
    assert str(classify(circuit(FEEDBACK_AND))) == "sequential, closed, passive"


###################################################################################################
# Loci
###################################################################################################


def test_walk_and_loci(circuit):
    c = circuit("seq(fork, gate(AND))")
    loci = [locus for locus, _ in walk(c)]
    assert loci == [(), (0,), (1,)]
    assert subterm_at(c, parse_locus("1")) == Gate("AND", 2)
    assert replace_at(c, (1,), Gate("OR", 2)) == Seq(Fork(), Gate("OR", 2))


def test_bad_locus(circuit):
    with pytest.raises(PatternMismatch):
        subterm_at(circuit("fork"), (0,))
    with pytest.raises(PatternMismatch):
        parse_locus("0.x")


def test_replace_checks_arity(circuit):
    with pytest.raises(ArityMismatch):
        replace_at(circuit("seq(fork, gate(AND))"), (1,), Fork())


###################################################################################################
# Wiring helpers
###################################################################################################


def _route(c, interp, inputs):
    """One tick through a wiring term"""
    return simulate(c, Waveform(c.inputs, (inputs,)), 1, interp).ticks[0]


@pytest.mark.parametrize("order", list(permutations(range(4))))
def test_permutation(interp, order):
    c = permutation(order)
    assert c.arity == (4, 4)
    t, f = interp.element("t"), interp.element("f")
    for marked in range(4):
        inputs = tuple(t if i == marked else f for i in range(4))
        outputs = _route(c, interp, inputs)
        assert outputs == tuple(inputs[order[j]] for j in range(4))


def test_block_permutation(interp):
    c = block_permutation([1, 2], [1, 0])
    t, f, bot = interp.element("t"), interp.element("f"), interp.lattice.bottom
    assert _route(c, interp, (t, f, bot)) == (f, bot, t)


def test_fanout_diagonal_and_join(interp):
    t, f, top = interp.element("t"), interp.element("f"), interp.lattice.top
    assert _route(fanout(3), interp, (t,)) == (t, t, t)
    assert _route(diagonal(2), interp, (t, f)) == (t, f, t, f)
    assert _route(pointwise_join(2), interp, (t, f, f, f)) == (top, f)


def test_waveform_circuit(interp, wave):
    replay = wave("t B f")
    c = waveform_circuit(replay, interp)
    assert c.arity == (0, 1)
    out = simulate(c, Waveform(0, ()), 5, interp)
    assert out.ticks == replay.ticks + ((interp.lattice.bottom,),) * 2


def test_constant_stream(interp):
    out = simulate(constant_stream("f", interp), Waveform(0, ()), 4, interp)
    assert out.ticks == ((interp.element("f"),),) * 4


###################################################################################################
# Wire graphs
###################################################################################################


def test_flatten_merges_trace_wires(circuit):
    graph = flatten(circuit(FEEDBACK_AND))
    kinds = [node.kind for node in graph.nodes]
    assert kinds == ["fork", "gate", "fork"]
    first_fork, _, last_fork = graph.nodes
    # the loop closes from the last fork's first output
    assert last_fork.outputs[0] == first_fork.inputs[0]


def test_instant_feedback_detection(circuit):
    assert has_instant_feedback(circuit(FEEDBACK_AND))
    assert not has_instant_feedback(circuit("trace1(seq(join, delay, fork))"))
    assert not has_instant_feedback(circuit("seq(fork, gate(AND))"))


def test_dependencies(circuit):
    c = circuit("par(delay, gate(NOT))")
    assert dependencies(c) == (frozenset(), frozenset({1}))
    assert dependencies(c, through_delays=True) == (frozenset({0}), frozenset({1}))


def test_constants_and_discard(interp):
    assert constant("B") == Bot()
    assert constant("T") == Top()
    assert constant("t", interp) == Value("t")
    with pytest.raises(UnknownValue):
        constant("x", interp)
    assert discard(2).arity == (2, 0)


def test_dot_export(circuit):
    dot = to_dot(circuit("seq(fork, gate(AND))"))
    assert dot.startswith("digraph circuit {")
    assert 'label="AND"' in dot
    assert "in0 ->" in dot


@settings(max_examples=100, deadline=None)
@given(integers(min_value=0, max_value=2 ** 32))
def test_random_circuits_type_check(seed):
    interp = belnap()
    rng = Random(seed)
    inputs, outputs = rng.randint(0, 2), rng.randint(1, 2)
    c = random_circuit(rng, interp, inputs, outputs)
    assert c.arity == (inputs, outputs)
    assert parse_circuit(print_circuit(c)).arity == c.arity


###################################################################################################
# Waveforms
###################################################################################################


def test_waveform_text(interp):
    w = parse_waveform("t, B\n# comment\n\nT, f\n", interp)
    assert w.width == 2
    assert format_waveform(w, interp) == "t,B\nT,f\n"


def test_waveform_width_mismatch(interp):
    with pytest.raises(WidthMismatch):
        parse_waveform("t, B\nf\n", interp)


def test_service_parse_and_grammar():
    service = CircuitService()
    info = service.parse(CircuitRequest(circuit=FEEDBACK_AND))
    assert info.success
    assert info.instant_feedback
    assert info.canonical == "trace1(seq(fork, gate(AND), fork))"
    bad = service.parse(CircuitRequest(circuit="seq(fork"))
    assert not bad.success and "CircuitSyntaxError" in bad.error
    assert "trace<N>" in service.grammar().combinators


def test_service_upload_rejects_binary():
    response = CircuitService().parse_upload(b"\xff\xfe")
    assert not response.success


def test_register_holds_first(interp, wave, symbols):
    assert symbols(simulate(register("t", interp), wave("f f"), 3, interp)) == "t f f"
