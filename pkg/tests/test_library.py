"""Tests for the library circuits"""
from itertools import product

import pytest

from models.circuit_models import Gate, Id, Par, Seq, Value, Waveform
from services.circuit_service import constant, has_instant_feedback, par_all
from services.library_service import cyclic_combinational, feedback_and, multiplexer, oscillator_example
from services.rewrite_service import productivity_step, reduce_stream
from services.semantics_service import simulate


def _tick(c, interp, inputs):
    return simulate(c, Waveform(c.inputs, (inputs,)), 1, interp).ticks[0]


def test_multiplexer_selects(interp):
    mux = multiplexer()
    assert mux.arity == (3, 1)
    t, f = interp.element("t"), interp.element("f")
    for a, b in product(range(interp.lattice.size), repeat=2):
        assert _tick(mux, interp, (f, a, b)) == (a,)
        assert _tick(mux, interp, (t, a, b)) == (b,)


def test_multiplexer_is_bottom_on_unknown_select(interp):
    bot = interp.lattice.bottom
    t, f = interp.element("t"), interp.element("f")
    assert _tick(multiplexer(), interp, (bot, t, f)) == (bot,)


def _or_true():
    return Seq(Par(Id(1), Value("t")), Gate("OR", 2))


@pytest.mark.parametrize("select, expected", [("f", "t"), ("t", "f")])
def test_cyclic_combinational_orders(interp, select, expected):
    # with f = NOT and g = OR t: f;g gives t whatever the input, g;f gives f
    c = cyclic_combinational(Gate("NOT", 1), _or_true())
    assert c.arity == (3, 1)
    x = interp.element("f")
    out = _tick(c, interp, (interp.element(select), x, x))
    assert interp.symbol(out[0]) == expected


def test_cyclic_combinational_with_inverses(interp):
    c = cyclic_combinational(Gate("NOT", 1), Gate("NOT", 1))
    for select in ("t", "f"):
        for x in range(interp.lattice.size):
            assert _tick(c, interp, (interp.element(select), x, x)) == (x,)


def test_cyclic_combinational_has_a_cycle():
    assert has_instant_feedback(cyclic_combinational(Gate("NOT", 1), Gate("NOT", 1)))


def test_library_constructors(interp):
    assert feedback_and(interp).arity == (0, 1)
    assert oscillator_example().arity == (1, 2)


@pytest.mark.parametrize("select", ["t", "f"])
@pytest.mark.parametrize("x", ["t", "f", "T"])
def test_cyclic_combinational_is_productive(interp, select, x):
    g = Seq(Par(Id(1), Value("t")), Gate("AND", 2))
    c = Seq(par_all([Value(select), constant(x), constant(x)]), cyclic_combinational(Gate("NOT", 1), g))
    result = productivity_step(c, interp)
    # NOT then AND t and AND t then NOT agree off ⊥
    expected = interp.gate("NOT")((interp.element(x),))
    assert result.values == (expected,)
    assert result.values != (interp.lattice.bottom,)
    values, _ = reduce_stream(c, 6, interp)
    assert values == simulate(c, Waveform(0, ()), 6, interp)
