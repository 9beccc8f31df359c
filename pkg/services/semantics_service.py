import logging
from itertools import product
from typing import Optional

from models.circuit_models import Circuit, Waveform
from models.lattice_models import Point
from models.semantics_models import EquivalenceVerdict, EvalState, Netlist, SimulateRequest, SimulateResponse
from models.signature_models import Interpretation
from services.circuit_service import flatten, node_counts, parse_circuit, parse_waveform, format_waveform
from services.errors import ArityMismatch, BudgetExceeded, LatcircError, NonConvergence, WidthMismatch
from services.signature_service import resolve_interpretation

logger = logging.getLogger(__name__)

# nodes whose output does not depend on the current tick's wires
_SOURCES = ("delay", "value", "top", "bot")


def compile_circuit(c: Circuit, interp: Interpretation) -> Netlist:
    graph = flatten(c)
    lattice = interp.lattice
    driver: dict[int, int] = {}
    for k, node in enumerate(graph.nodes):
        for w in node.outputs:
            driver[w] = k

    slots, initial = [], []
    tables = []
    for k, node in enumerate(graph.nodes):
        tables.append(interp.gate(node.label) if node.kind == "gate" else None)
        if node.kind == "delay":
            slots.append(k)
            initial.append(lattice.bottom)
        elif node.kind == "value":
            slots.append(k)
            initial.append(interp.value(node.label))
        elif node.kind == "top":
            slots.append(k)
            initial.append(lattice.top)

    # Kahn order over the instantaneous nodes; a cycle is broken at its earliest node.
    pending = [k for k, node in enumerate(graph.nodes) if node.kind not in _SOURCES]
    done: set[int] = set()
    order = []

    def ready(k: int) -> bool:
        return all(driver.get(w) is None or driver[w] in done or graph.nodes[driver[w]].kind in _SOURCES
                   for w in graph.nodes[k].inputs)

    while pending:
        chosen = next((k for k in pending if ready(k)), pending[0])
        pending.remove(chosen)
        done.add(chosen)
        order.append(chosen)

    logger.debug("compiled netlist: %d nodes, %d wires, %d state slots",
                 len(graph.nodes), graph.wires, len(slots))
    return Netlist(graph, lattice, tuple(order), tuple(slots), tuple(initial), tuple(tables))


def initial_state(net: Netlist) -> EvalState:
    return EvalState(0, net.initial)


def step(net: Netlist, state: Point, inputs: Point) -> tuple[Point, Point]:
    """One tick: least fixed point of the instantaneous nodes, then advance the state slots"""
    graph = net.graph
    if len(inputs) != net.inputs:
        raise WidthMismatch(f"expected {net.inputs} inputs, got {len(inputs)}",
                            expected=net.inputs, actual=len(inputs))
    lattice = net.lattice
    wires = [lattice.bottom] * graph.wires
    for w, element in zip(graph.inputs, inputs):
        wires[w] = element
    for slot, k in enumerate(net.slots):
        wires[graph.nodes[k].outputs[0]] = state[slot]

    join = lattice.join_table
    cap = graph.wires * lattice.chain_steps + 1
    for _ in range(cap + 1):
        changed = False
        for k in net.order:
            node = graph.nodes[k]
            if node.kind == "gate":
                new = (net.tables[k](tuple(wires[w] for w in node.inputs)),)
            elif node.kind == "fork":
                new = (wires[node.inputs[0]],) * 2
            elif node.kind == "join":
                new = (join[wires[node.inputs[0]]][wires[node.inputs[1]]],)
            else:
                continue
            for w, value in zip(node.outputs, new):
                if wires[w] != value:
                    wires[w] = value
                    changed = True
        if not changed:
            break
    else:
        raise NonConvergence(f"wire values did not settle within {cap} sweeps; a gate table is not monotone",
                             sweeps=cap)

    next_state = tuple(
        wires[graph.nodes[k].inputs[0]] if graph.nodes[k].kind == "delay" else lattice.bottom
        for k in net.slots
    )
    return next_state, tuple(wires[w] for w in graph.outputs)


def advance(net: Netlist, state: EvalState, inputs: Point) -> tuple[EvalState, Point]:
    next_state, outputs = step(net, state.state, inputs)
    return EvalState(state.tick + 1, next_state), outputs


def run(net: Netlist, waveform: Waveform, ticks: int) -> Waveform:
    if waveform.ticks and waveform.width != net.inputs:
        raise WidthMismatch(f"circuit has {net.inputs} inputs but the waveform has width {waveform.width}",
                            expected=net.inputs, actual=waveform.width)
    bottom = net.lattice.bottom
    state = initial_state(net)
    outputs = []
    for k in range(ticks):
        inputs = waveform.ticks[k] if k < len(waveform.ticks) else (bottom,) * net.inputs
        state, out = advance(net, state, inputs)
        outputs.append(out)
    return Waveform(net.outputs, tuple(outputs))


def simulate(c: Circuit, waveform: Waveform, ticks: int, interp: Interpretation) -> Waveform:
    """Output of ⟦c⟧ on the ⊥-padded input prefix, for `ticks` ticks"""
    return run(compile_circuit(c, interp), waveform, ticks)


def extensional_equiv_bounded(c1: Circuit, c2: Circuit, interp: Interpretation,
                              budget: int = 2 ** 20) -> EquivalenceVerdict:
    """
    Compare two circuits on every input word of length |V|^n + 1, n the larger delay count.

    Words are explored breadth-first in lexicographic order over the interned elements, so the
    counterexample returned is the shortest and lexicographically least one. Prefixes reaching
    a pair of states already seen are not extended again.
    """
    if c1.arity != c2.arity:
        raise ArityMismatch(f"cannot compare a {c1.inputs}->{c1.outputs} circuit with a {c2.inputs}->{c2.outputs} one",
                            left=c1.arity, right=c2.arity)
    size = interp.lattice.size
    delays = max(node_counts(c1)["delays"], node_counts(c2)["delays"])
    length = size ** delays + 1
    m = c1.inputs
    exponent = m * length
    # size^exponent >= 2^exponent, so a long exponent is rejected before the power is formed
    if size > 1 and (exponent >= budget.bit_length() or size ** exponent > budget):
        raise BudgetExceeded(
            f"|V|^(m*L) = {size}^({m}*{length}) input words exceed the budget {budget}; "
            "use the bisimulation check instead",
            words_exponent=exponent, budget=budget)

    left, right = compile_circuit(c1, interp), compile_circuit(c2, interp)
    choices = list(product(range(size), repeat=m))
    level: list[tuple[Point, Point, tuple[Point, ...]]] = [(left.initial, right.initial, ())]
    seen = {(left.initial, right.initial)}
    explored = 0
    for tick in range(length):
        following = []
        for s1, s2, word in level:
            for inputs in choices:
                explored += 1
                n1, o1 = step(left, s1, inputs)
                n2, o2 = step(right, s2, inputs)
                if o1 != o2:
                    counterexample = Waveform(m, word + (inputs,))
                    logger.info("bounded check: outputs differ at tick %d after %d words", tick, explored)
                    return EquivalenceVerdict(False, counterexample, o1, o2, explored)
                if (n1, n2) not in seen:
                    seen.add((n1, n2))
                    following.append((n1, n2, word + (inputs,)))
        if not following:
            break
        level = following
    logger.info("bounded check: equivalent on words of length %d (%d steps)", length, explored)
    return EquivalenceVerdict(True, explored=explored)


class SemanticsService:
    """Service class for simulation"""

    def simulate(self, request: SimulateRequest) -> SimulateResponse:
        try:
            interp = resolve_interpretation(request.lattice, request.interpretation)
            c = parse_circuit(request.circuit, interp)
            waveform = parse_waveform(request.waveform, interp, c.inputs if request.waveform.strip() else None)
            net = compile_circuit(c, interp)
            out = run(net, waveform, request.ticks)
            return SimulateResponse(
                success=True,
                outputs=[[interp.symbol(e) for e in tick] for tick in out.ticks],
                waveform=format_waveform(out, interp),
                state_slots=len(net.slots),
            )
        except LatcircError as e:
            return SimulateResponse(success=False, error=str(e))
        except Exception as e:
            return SimulateResponse(success=False, error=f"Unexpected error: {str(e)}")
