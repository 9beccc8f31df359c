"""Circuits, machines and stream specifications used by the examples and the test suites"""
from itertools import product
from typing import Optional

from models.circuit_models import Circuit, Gate, Id
from models.lattice_models import TupleSpace
from models.mealy_models import MealyMachine
from models.signature_models import Interpretation
from models.synthesis_models import PrefixPeriodicSpec
from services.circuit_service import fanout, par_all, parse_circuit, permutation, seq_all, trace
from services.lattice_service import tabulate
from services.signature_service import belnap

FEEDBACK_AND = "trace1(seq(fork, gate(AND), fork))"

# registers A = f ⊔ δB and B = t ⊔ δA; outputs the value t and δ(B ∧ x)
OSCILLATOR = """
trace1(trace1(seq(
    par(swap, id1),
    par(reg(f), reg(t), id1),
    par(id1, fork, id1),
    par(id2, val(t), seq(gate(AND), delay))
)))
"""


def feedback_and(interp: Optional[Interpretation] = None) -> Circuit:
    """Closed loop solving y = y ∧ y on every tick; the least solution is ⊥"""
    return parse_circuit(FEEDBACK_AND, interp or belnap())


def oscillator_example(interp: Optional[Interpretation] = None) -> Circuit:
    return parse_circuit(OSCILLATOR, interp or belnap())


def multiplexer() -> Circuit:
    """(c, a, b) ↦ (¬c ∧ a) ∨ (c ∧ b): a when c is f, b when c is t"""
    return seq_all([
        par_all([fanout(2), Id(2)]),
        permutation([0, 2, 1, 3]),
        par_all([Gate("NOT", 1), Id(3)]),
        par_all([Gate("AND", 2), Gate("AND", 2)]),
        Gate("OR", 2),
    ])


def cyclic_combinational(f: Circuit, g: Circuit) -> Circuit:
    """
    One copy each of f and g shared between two orders of composition: inputs (c, x0, x1),
    f;g applied to x0 when c is f and g;f applied to x1 when c is t. The loop through the
    multiplexers is cyclic but every cycle is cut once c is known.
    """
    mux = multiplexer()
    # wires after fan-out: fo fo go go c c c x0 x1
    return trace(2, seq_all([
        par_all([fanout(2), fanout(2), fanout(3), Id(2)]),
        permutation([4, 7, 2, 5, 0, 8, 6, 3, 1]),
        par_all([mux, mux, mux]),
        par_all([f, g, Id(1)]),
    ]))


# Stream specifications

def example_stream_spec(interp: Optional[Interpretation] = None) -> PrefixPeriodicSpec:
    """(t,⊥) on tick 0, then (⊥, σ(2k)) on tick 2k+1 and (⊥, f) on tick 2k+2"""
    interp = interp or belnap()
    lattice = interp.lattice
    bot, t, f = lattice.bottom, interp.element("t"), interp.element("f")
    window, out = TupleSpace(lattice, 2), TupleSpace(lattice, 2)
    first = tabulate(window, out, lambda p: (t, bot))
    odd = tabulate(window, out, lambda p: (bot, p[0]))
    even = tabulate(window, out, lambda p: (bot, f))
    return PrefixPeriodicSpec(lattice, 1, 2, 2, (first,), (odd, even))


def delay_spec(interp: Optional[Interpretation] = None) -> PrefixPeriodicSpec:
    """Each output is the previous input"""
    lattice = (interp or belnap()).lattice
    table = tabulate(TupleSpace(lattice, 2), TupleSpace(lattice, 1), lambda p: (p[0],))
    return PrefixPeriodicSpec(lattice, 1, 1, 2, (), (table,))


def constant_bottom_spec(interp: Optional[Interpretation] = None) -> PrefixPeriodicSpec:
    lattice = (interp or belnap()).lattice
    table = tabulate(TupleSpace(lattice, 1), TupleSpace(lattice, 1), lambda p: (lattice.bottom,))
    return PrefixPeriodicSpec(lattice, 1, 1, 1, (), (table,))


def fig4_machine(interp: Optional[Interpretation] = None) -> MealyMachine:
    """
    The six-state machine of the example stream: s0 moves to s1..s4 by input ⊥, t, f, ⊤;
    those remember it and all move to s5, which moves back to s1..s4.
    """
    interp = interp or belnap()
    lattice = interp.lattice
    bot, t, f = lattice.bottom, interp.element("t"), interp.element("f")
    inputs = list(product(range(lattice.size), repeat=1))
    remember = {a: f"s{i + 1}" for i, a in enumerate(inputs)}
    transitions = {}
    for a in inputs:
        transitions[("s0", a)] = (remember[a], (t, bot))
        transitions[("s5", a)] = (remember[a], (bot, f))
        for held, state in remember.items():
            transitions[(state, a)] = ("s5", (bot,) + held)
    return MealyMachine(lattice, 1, 2, ("s0", "s1", "s2", "s3", "s4", "s5"), "s0", transitions)
