"""Seeded random circuits, tables and machines for the property suites and `latcirc fuzz`"""
import logging
from itertools import product
from random import Random
from typing import Optional

from models.circuit_models import Bot, Circuit, Delay, Fork, Gate, Id, Join, Stub, Top, Value, Waveform
from models.lattice_models import FunctionTable, Lattice, SampledFunction, TupleSpace
from models.mealy_models import IMealyMachine, MealyMachine
from models.signature_models import Interpretation
from services.circuit_service import par_all, permutation, seq_all, trace
from services.lattice_service import tabulate

logger = logging.getLogger(__name__)


class _Bus:
    """A term under construction together with its current output width"""

    def __init__(self, rng: Random, width: int):
        self.rng = rng
        self.width = width
        self.stages: list[Circuit] = [Id(width)]

    def _front(self, wires: list[int]):
        rest = [w for w in range(self.width) if w not in wires]
        self.stages.append(permutation(wires + rest))

    def apply(self, head: Circuit, wires: list[int]):
        self._front(wires)
        self.stages.append(par_all([head, Id(self.width - head.inputs)]))
        self.width += head.outputs - head.inputs

    def pick(self, count: int) -> list[int]:
        while self.width < count:
            self.apply(Fork(), [self.rng.randrange(self.width)])
        return self.rng.sample(range(self.width), count)

    def source(self, generator: Circuit):
        self.stages.append(par_all([Id(self.width), generator]))
        self.width += 1

    def term(self) -> Circuit:
        return seq_all(self.stages)


def _constant(rng: Random, interp: Interpretation) -> Circuit:
    choice = rng.randrange(len(interp.signature.values) + 2)
    if choice == 0:
        return Bot()
    if choice == 1:
        return Top()
    return Value(interp.signature.values[choice - 2])


def random_circuit(rng: Random, interp: Interpretation, inputs: int = 1, outputs: int = 1, gates: int = 3,
                   delays: int = 2, traces: int = 1) -> Circuit:
    """A random term of type inputs → outputs with at most the given numbers of gates, delays and traces"""
    if traces and rng.random() < 0.6:
        x = rng.randint(1, 2)
        body = random_circuit(rng, interp, inputs + x, outputs + x, gates, delays, traces - 1)
        return trace(x, body)

    bus = _Bus(rng, inputs)
    arities = list(interp.signature.gates)
    for _ in range(rng.randint(1, 6)):
        action = rng.choice(("gate", "delay", "source", "fork", "join"))
        if action == "gate" and gates and arities and bus.width:
            name, arity = rng.choice(arities)
            bus.apply(Gate(name, arity), bus.pick(arity))
            gates -= 1
        elif action == "delay" and delays and bus.width:
            bus.apply(Delay(), bus.pick(1))
            delays -= 1
        elif action == "source":
            bus.source(_constant(rng, interp))
        elif action == "fork" and bus.width:
            bus.apply(Fork(), bus.pick(1))
        elif action == "join" and bus.width >= 2:
            bus.apply(Join(), bus.pick(2))

    while bus.width < outputs:
        if bus.width:
            bus.apply(Fork(), bus.pick(1))
        else:
            bus.source(_constant(rng, interp))
    while bus.width > outputs:
        if bus.width >= 2 and rng.random() < 0.5:
            bus.apply(Join(), bus.pick(2))
        else:
            bus.apply(Stub(), bus.pick(1))
    return bus.term()


def random_closed_circuit(rng: Random, interp: Interpretation, outputs: int = 1, gates: int = 4, delays: int = 3,
                          traces: int = 2) -> Circuit:
    return random_circuit(rng, interp, 0, outputs, gates, delays, traces)


def random_waveform(rng: Random, lattice: Lattice, width: int, ticks: int) -> Waveform:
    return Waveform(width, tuple(tuple(rng.randrange(lattice.size) for _ in range(width)) for _ in range(ticks)))


def random_monotone_table(rng: Random, domain: TupleSpace, codomain: TupleSpace, samples: int = 4,
                          bottom_preserving: bool = True) -> FunctionTable:
    """The least monotone extension of a few random samples, tabulated"""
    points = list(domain.points())
    if bottom_preserving:
        points.remove(domain.bottom)
    chosen = rng.sample(points, min(samples, len(points)))
    extension = SampledFunction(domain, codomain, tuple(
        (p, tuple(rng.randrange(codomain.base.size) for _ in range(codomain.width))) for p in chosen
    ))
    return tabulate(domain, codomain, extension)


def random_imealy(rng: Random, lattice: Lattice, state_width: int = 1, inputs: int = 1,
                  outputs: int = 1) -> IMealyMachine:
    """A realizable I-Mealy machine: both tables monotone and ⊥-preserving"""
    domain = TupleSpace(lattice, state_width + inputs)
    transition = random_monotone_table(rng, domain, TupleSpace(lattice, state_width))
    output = random_monotone_table(rng, domain, TupleSpace(lattice, outputs))
    initial = tuple(rng.randrange(lattice.size) for _ in range(state_width))
    return IMealyMachine(lattice, state_width, inputs, outputs, initial,
                         lambda p: (transition(p), output(p)), transition, output)


def random_mealy(rng: Random, lattice: Lattice, states: int = 3, inputs: int = 1, outputs: int = 1,
                 values: Optional[int] = None) -> MealyMachine:
    """A random opaque machine; outputs drawn from the first `values` elements when given"""
    labels = tuple(f"q{i}" for i in range(states))
    choices = values or lattice.size
    transitions = {
        (s, a): (rng.choice(labels), tuple(rng.randrange(choices) for _ in range(outputs)))
        for s in labels for a in product(range(lattice.size), repeat=inputs)
    }
    return MealyMachine(lattice, inputs, outputs, labels, labels[0], transitions)


def corpus(seed: int, count: int, interp: Interpretation, closed: bool = True) -> list[Circuit]:
    rng = Random(seed)
    circuits = [
        random_closed_circuit(rng, interp) if closed else random_circuit(rng, interp)
        for _ in range(count)
    ]
    logger.debug("generated %d circuits from seed %d", count, seed)
    return circuits
