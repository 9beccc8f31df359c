import logging
import re
from collections import deque
from itertools import product
from pathlib import Path
from typing import Optional

from models.circuit_models import (
    Bot, Circuit, Delay, Fork, Gate, Id, Join, Par, Seq, Stub, Swap, Top, Trace, Value, Waveform
)
from models.lattice_models import Lattice, Point, TupleSpace
from models.mealy_models import (
    BisimilarRequest, BisimilarResponse, BisimulationVerdict, CircuitTextResponse, IMealyMachine, Machine,
    MealyFromCircuitRequest, MealyMachine, MealyResponse, MealyToCircuitRequest
)
from models.semantics_models import EquivalenceRequest, EquivalenceResponse
from models.signature_models import Interpretation
from services.circuit_service import diagonal, par_all, parse_circuit, print_circuit, registers, seq_all, trace
from services.errors import (
    ArityMismatch, BudgetExceeded, FileFormatError, LatcircError, NonConvergence, WidthMismatch
)
from services.lattice_service import tabulate
from services.realization_service import DEFAULT_VERIFY_LIMIT, monotone_extension, realize_monotone
from services.semantics_service import extensional_equiv_bounded
from services.signature_service import resolve_interpretation

logger = logging.getLogger(__name__)


def _inputs(lattice: Lattice, m: int) -> list[Point]:
    return list(product(range(lattice.size), repeat=m))


# I-Mealy machines and their prop structure

def stateless(lattice: Lattice, m: int, n: int, fn) -> IMealyMachine:
    return IMealyMachine(lattice, 0, m, n, (), lambda point: ((), fn(point)))


def identity_machine(lattice: Lattice, n: int = 1) -> IMealyMachine:
    return stateless(lattice, n, n, lambda point: point)


def copy_machine(lattice: Lattice, n: int) -> IMealyMachine:
    return stateless(lattice, n, 2 * n, lambda point: point + point)


def discard_machine(lattice: Lattice, n: int) -> IMealyMachine:
    return stateless(lattice, n, 0, lambda point: ())


def cascade(a: IMealyMachine, b: IMealyMachine) -> IMealyMachine:
    """Run a, feed its output to b; the state is a's state followed by b's"""
    if a.outputs != b.inputs:
        raise ArityMismatch(f"cannot cascade a machine with {a.outputs} outputs into one with {b.inputs} inputs")
    sa = a.state_width

    def combined(point: Point) -> tuple[Point, Point]:
        state, inputs = point[:a.state_width + b.state_width], point[a.state_width + b.state_width:]
        next_a, middle = a.combined(state[:sa] + inputs)
        next_b, out = b.combined(state[sa:] + middle)
        return next_a + next_b, out

    return IMealyMachine(a.lattice, sa + b.state_width, a.inputs, b.outputs, a.initial + b.initial, combined)


def direct(a: IMealyMachine, b: IMealyMachine) -> IMealyMachine:
    """Run a and b side by side on split inputs"""
    sa, sb = a.state_width, b.state_width

    def combined(point: Point) -> tuple[Point, Point]:
        state, inputs = point[:sa + sb], point[sa + sb:]
        next_a, out_a = a.combined(state[:sa] + inputs[:a.inputs])
        next_b, out_b = b.combined(state[sa:] + inputs[a.inputs:])
        return next_a + next_b, out_a + out_b

    return IMealyMachine(a.lattice, sa + sb, a.inputs + b.inputs, a.outputs + b.outputs,
                         a.initial + b.initial, combined)


def _least_feedback(a: IMealyMachine, width: int, state: Point, inputs: Point,
                    select) -> tuple[Point, Point, Point]:
    """Iterate the fed-back values from ⊥ until they settle; returns (feedback, next state, output)"""
    space = TupleSpace(a.lattice, width)
    feedback = space.bottom
    cap = space.chain_steps + 1
    for _ in range(cap + 1):
        next_state, out = a.combined(state + feedback + inputs)
        updated = select(out)
        if updated == feedback:
            return feedback, next_state, out
        feedback = updated
    raise NonConvergence(f"feedback did not settle within {cap} iterations; the machine is not monotone",
                         width=width)


def trace_machine(x: int, a: IMealyMachine) -> IMealyMachine:
    """Feed the first x outputs of a back into its first x inputs, solved by least fixed point per tick"""
    if a.inputs < x or a.outputs < x:
        raise ArityMismatch(f"cannot trace {x} wires of a machine of type {a.inputs}->{a.outputs}")
    s = a.state_width

    def combined(point: Point) -> tuple[Point, Point]:
        _, next_state, out = _least_feedback(a, x, point[:s], point[s:], lambda out: out[:x])
        return next_state, out[x:]

    return IMealyMachine(a.lattice, s, a.inputs - x, a.outputs - x, a.initial, combined)


def conway(a: IMealyMachine) -> IMealyMachine:
    """For a of type n+m → n, the machine m → n emitting the least fixed point of the outputs"""
    n = a.outputs
    if a.inputs < n:
        raise ArityMismatch(f"conway needs a machine of type n+m -> n, got {a.inputs}->{a.outputs}")
    s = a.state_width

    def combined(point: Point) -> tuple[Point, Point]:
        fix, next_state, _ = _least_feedback(a, n, point[:s], point[s:], lambda out: out)
        return next_state, fix

    return IMealyMachine(a.lattice, s, a.inputs - n, n, a.initial, combined)


def circuit_to_mealy(c: Circuit, interp: Interpretation) -> IMealyMachine:
    """Fold a circuit through the generator machines and the cascade, direct and trace operations"""
    lattice = interp.lattice
    bot = lattice.bottom
    match c:
        case Value() | Top():
            head = interp.value(c.symbol) if isinstance(c, Value) else lattice.top
            return IMealyMachine(lattice, 1, 0, 1, (head,), lambda point: ((bot,), point[:1]))
        case Bot():
            return stateless(lattice, 0, 1, lambda point: (bot,))
        case Delay():
            return IMealyMachine(lattice, 1, 1, 1, (bot,), lambda point: (point[1:], point[:1]))
        case Gate(symbol, width):
            table = interp.gate(symbol)
            return stateless(lattice, width, 1, lambda point: (table(point),))
        case Fork():
            return copy_machine(lattice, 1)
        case Join():
            return stateless(lattice, 2, 1, lambda point: (lattice.join(point[0], point[1]),))
        case Stub():
            return discard_machine(lattice, 1)
        case Id(width):
            return identity_machine(lattice, width)
        case Swap():
            return stateless(lattice, 2, 2, lambda point: (point[1], point[0]))
        case Seq(first, second):
            return cascade(circuit_to_mealy(first, interp), circuit_to_mealy(second, interp))
        case Par(top, bottom):
            return direct(circuit_to_mealy(top, interp), circuit_to_mealy(bottom, interp))
        case Trace(width, body):
            return trace_machine(width, circuit_to_mealy(body, interp))
    raise ArityMismatch(f"unknown circuit node {c!r}")


def transition_table(a: IMealyMachine):
    if a.transition is not None:
        return a.transition
    space = TupleSpace(a.lattice, a.state_width + a.inputs)
    return tabulate(space, TupleSpace(a.lattice, a.state_width), lambda p: a.combined(p)[0])


def output_table(a: IMealyMachine):
    if a.output is not None:
        return a.output
    space = TupleSpace(a.lattice, a.state_width + a.inputs)
    return tabulate(space, TupleSpace(a.lattice, a.outputs), lambda p: a.combined(p)[1])


def mealy_to_circuit(a: IMealyMachine, interp: Interpretation, verify_limit: int = DEFAULT_VERIFY_LIMIT) -> Circuit:
    """The register loop trace_s((registers(s₀) ⊗ id_m) ; Δ ; (⟪T⟫ ⊗ ⟪O⟫))"""
    s, m = a.state_width, a.inputs
    transition = realize_monotone(transition_table(a), interp, verify_limit)
    output = realize_monotone(output_table(a), interp, verify_limit)
    body = seq_all([
        par_all([registers([interp.symbol(e) for e in a.initial], interp), Id(m)]),
        diagonal(s + m),
        par_all([transition, output]),
    ])
    return trace(s, body)


# Machines over opaque states

def output_stream(a: Machine, waveform: Waveform, ticks: int) -> Waveform:
    if waveform.ticks and waveform.width != a.inputs:
        raise WidthMismatch(f"machine has {a.inputs} inputs but the waveform has width {waveform.width}",
                            expected=a.inputs, actual=waveform.width)
    bottom = a.lattice.bottom
    state = a.initial
    outputs = []
    for k in range(ticks):
        state, out = a.step(state, waveform.at(k, bottom) if waveform.ticks else (bottom,) * a.inputs)
        outputs.append(out)
    return Waveform(a.outputs, tuple(outputs))


def to_opaque(a: IMealyMachine, limit: Optional[int] = None) -> MealyMachine:
    """Explore the reachable states breadth-first and label them s0, s1, ... in discovery order"""
    choices = _inputs(a.lattice, a.inputs)
    labels = {a.initial: "s0"}
    queue = deque([a.initial])
    transitions = {}
    while queue:
        state = queue.popleft()
        for inputs in choices:
            next_state, out = a.step(state, inputs)
            if next_state not in labels:
                if limit is not None and len(labels) >= limit:
                    raise BudgetExceeded(f"more than {limit} reachable states", limit=limit)
                labels[next_state] = f"s{len(labels)}"
                queue.append(next_state)
            transitions[(labels[state], inputs)] = (labels[next_state], out)
    logger.debug("explored %d reachable states", len(labels))
    return MealyMachine(a.lattice, a.inputs, a.outputs, tuple(labels.values()), "s0", transitions,
                        {label: state for state, label in labels.items()})


def reachable(a: MealyMachine) -> MealyMachine:
    choices = _inputs(a.lattice, a.inputs)
    seen = {a.initial}
    queue = deque([a.initial])
    while queue:
        state = queue.popleft()
        for inputs in choices:
            target, _ = a.step(state, inputs)
            if target not in seen:
                seen.add(target)
                queue.append(target)
    states = tuple(s for s in a.states if s in seen)
    transitions = {(s, i): v for (s, i), v in a.transitions.items() if s in seen}
    return MealyMachine(a.lattice, a.inputs, a.outputs, states, a.initial, transitions,
                        {s: a.metadata[s] for s in states if s in a.metadata})


def equivalence_classes(a: MealyMachine) -> list[tuple[str, ...]]:
    """Bisimilarity classes by partition refinement, ordered by first member in state order"""
    choices = _inputs(a.lattice, a.inputs)
    block = {s: tuple(a.step(s, i)[1] for i in choices) for s in a.states}
    count = len(set(block.values()))
    while True:
        ids = {}
        for s in a.states:
            ids.setdefault(block[s], len(ids))
        signature = {s: (ids[block[s]],) + tuple(ids[block[a.step(s, i)[0]]] for i in choices) for s in a.states}
        refined = len(set(signature.values()))
        block = signature
        if refined == count:
            break
        count = refined
    classes: dict[tuple, list[str]] = {}
    for s in a.states:
        classes.setdefault(block[s], []).append(s)
    return [tuple(members) for members in classes.values()]


def minimize(a: MealyMachine) -> MealyMachine:
    """Quotient of the reachable part by bisimilarity; each class is named by its first state"""
    live = reachable(a)
    classes = equivalence_classes(live)
    representative = {s: members[0] for members in classes for s in members}
    states = tuple(members[0] for members in classes)
    transitions = {
        (s, i): (representative[target], out)
        for (s, i), (target, out) in live.transitions.items() if s in states
    }
    logger.debug("minimized %d states to %d", len(a.states), len(states))
    return MealyMachine(a.lattice, a.inputs, a.outputs, states, representative[live.initial], transitions,
                        {s: live.metadata[s] for s in states if s in live.metadata})


def relabel(a: MealyMachine) -> MealyMachine:
    """Rename states s0, s1, ... in breadth-first discovery order from the initial state"""
    choices = _inputs(a.lattice, a.inputs)
    names = {a.initial: "s0"}
    queue = deque([a.initial])
    while queue:
        state = queue.popleft()
        for inputs in choices:
            target, _ = a.step(state, inputs)
            if target not in names:
                names[target] = f"s{len(names)}"
                queue.append(target)
    transitions = {(names[s], i): (names[t], out) for (s, i), (t, out) in a.transitions.items() if s in names}
    return MealyMachine(a.lattice, a.inputs, a.outputs, tuple(names.values()), "s0", transitions,
                        {names[s]: v for s, v in a.metadata.items() if s in names})


def bisimilar(a: Machine, b: Machine, limit: Optional[int] = None) -> BisimulationVerdict:
    """Breadth-first search over reachable state pairs; the first disagreement yields the shortest word"""
    if a.inputs != b.inputs or a.outputs != b.outputs:
        raise ArityMismatch(f"cannot compare machines of types {a.inputs}->{a.outputs} and {b.inputs}->{b.outputs}")
    choices = _inputs(a.lattice, a.inputs)
    start = (a.initial, b.initial)
    parent: dict = {start: None}
    queue = deque([start])
    while queue:
        pair = queue.popleft()
        for inputs in choices:
            next_a, out_a = a.step(pair[0], inputs)
            next_b, out_b = b.step(pair[1], inputs)
            if out_a != out_b:
                word = [inputs]
                node = pair
                while parent[node] is not None:
                    node, step_input = parent[node]
                    word.append(step_input)
                logger.info("not bisimilar: outputs differ after %d inputs", len(word))
                return BisimulationVerdict(False, counterexample=Waveform(a.inputs, tuple(reversed(word))),
                                           left_output=out_a, right_output=out_b)
            following = (next_a, next_b)
            if following not in parent:
                if limit is not None and len(parent) >= limit:
                    raise BudgetExceeded(f"more than {limit} related state pairs", limit=limit)
                parent[following] = (pair, inputs)
                queue.append(following)
    logger.info("bisimilar: %d related state pairs", len(parent))
    return BisimulationVerdict(True, relation=frozenset(parent))


def check_equivalence(c1: Circuit, c2: Circuit, interp: Interpretation, method: str = "both",
                      budget: int = 2 ** 20) -> tuple[bool, Optional[Waveform], str]:
    """Extensional equivalence by the bounded check, by bisimulation, or by both cross-checked"""
    verdicts = []
    if method in ("bounded", "both"):
        try:
            verdict = extensional_equiv_bounded(c1, c2, interp, budget)
            verdicts.append(("bounded", verdict.equivalent, verdict.counterexample))
        except BudgetExceeded:
            if method == "bounded":
                raise
            logger.warning("bounded check over budget; using bisimulation only")
    if method in ("bisim", "both"):
        verdict = bisimilar(circuit_to_mealy(c1, interp), circuit_to_mealy(c2, interp), limit=budget)
        verdicts.append(("bisim", verdict.bisimilar, verdict.counterexample))
    if len({equivalent for _, equivalent, _ in verdicts}) > 1:
        raise LatcircError(f"bounded and bisimulation checks disagree: {verdicts}")
    _, equivalent, counterexample = verdicts[-1]
    return equivalent, counterexample, "+".join(v[0] for v in verdicts)


# Text formats

_HEADER = re.compile(r"(i?mealy)((?:\s+\w+=\d+)+)\s*$")
_OPAQUE_ROW = re.compile(r"(\S+)\s+-\((.*?)\)->\s+(\S+)\s*/\s*\((.*?)\)\s*$")


def _symbols(text: str, interp: Interpretation, width: int, number: int) -> Point:
    parts = [s.strip() for s in text.split(",")] if text.strip() else []
    if len(parts) != width:
        raise FileFormatError(f"line {number}: expected {width} symbols, got {len(parts)}", line=number)
    try:
        return tuple(interp.element(s) for s in parts)
    except LatcircError as e:
        raise FileFormatError(f"line {number}: {e.message}", line=number) from None


def _lines(text: str) -> list[tuple[int, str]]:
    result = []
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            result.append((number, line))
    return result


def _header(line: str, number: int) -> tuple[str, dict[str, int]]:
    match = _HEADER.fullmatch(line)
    if not match:
        raise FileFormatError(f"line {number}: expected a 'mealy m=.. n=..' or 'imealy s=.. m=.. n=..' header",
                              line=number)
    fields = dict(item.split("=") for item in match.group(2).split())
    return match.group(1), {k: int(v) for k, v in fields.items()}


def parse_machine(text: str, interp: Interpretation) -> Machine:
    lines = _lines(text)
    if not lines:
        raise FileFormatError("empty machine file")
    number, header = lines[0]
    kind, fields = _header(header, number)
    if kind == "mealy":
        return _parse_opaque(lines[1:], fields, interp)
    return _parse_imealy(lines[1:], fields, interp)


def _parse_opaque(lines: list[tuple[int, str]], fields: dict[str, int], interp: Interpretation) -> MealyMachine:
    m, n = fields.get("m", 0), fields.get("n", 0)
    states: list[str] = []
    initial = None
    transitions = {}
    for number, line in lines:
        if line.startswith("states:"):
            states.extend(line[len("states:"):].split())
        elif line.startswith("initial:"):
            initial = line[len("initial:"):].strip()
        else:
            row = _OPAQUE_ROW.fullmatch(line)
            if not row:
                raise FileFormatError(f"line {number}: expected 's -(inputs)-> s2 / (outputs)'", line=number)
            transitions[(row.group(1), _symbols(row.group(2), interp, m, number))] = (
                row.group(3), _symbols(row.group(4), interp, n, number))
    if initial is None or initial not in states:
        raise FileFormatError("machine needs an 'initial:' state listed in 'states:'")
    for s in states:
        for inputs in _inputs(interp.lattice, m):
            if (s, inputs) not in transitions:
                raise FileFormatError(f"state {s} has no transition on ({interp.format_point(inputs)}); "
                                      "machines must be total over V^m", state=s)
    for (s, _), (t, _) in transitions.items():
        if s not in states or t not in states:
            raise FileFormatError(f"transition mentions undeclared state {s if s not in states else t}")
    return MealyMachine(interp.lattice, m, n, tuple(states), initial, transitions)


def _parse_imealy(lines: list[tuple[int, str]], fields: dict[str, int], interp: Interpretation) -> IMealyMachine:
    s, m, n = fields.get("s", 0), fields.get("m", 0), fields.get("n", 0)
    lattice = interp.lattice
    initial = (lattice.bottom,) * s
    samples: dict[str, list[tuple[Point, Point]]] = {"T": [], "O": []}
    section = None
    for number, line in lines:
        if line.startswith("initial:"):
            initial = _symbols(line[len("initial:"):], interp, s, number)
        elif line in ("T:", "O:"):
            section = line[0]
        elif "->" in line and "|" in line:
            if section is None:
                raise FileFormatError(f"line {number}: sample row outside a T: or O: section", line=number)
            left, _, out = line.partition("->")
            state, _, inputs = left.partition("|")
            point = _symbols(state, interp, s, number) + _symbols(inputs, interp, m, number)
            samples[section].append((point, _symbols(out, interp, s if section == "T" else n, number)))
        else:
            raise FileFormatError(f"line {number}: unrecognised line '{line}'", line=number)
    domain = TupleSpace(lattice, s + m)
    transition = monotone_extension(domain, TupleSpace(lattice, s), samples["T"])
    output = monotone_extension(domain, TupleSpace(lattice, n), samples["O"])
    return IMealyMachine(lattice, s, m, n, initial, lambda p: (transition(p), output(p)), transition, output)


def load_machine(path: str, interp: Interpretation) -> Machine:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise FileFormatError(f"cannot read machine file {path}: {e}") from e
    return parse_machine(text, interp)


def format_mealy(a: MealyMachine, interp: Interpretation) -> str:
    lines = [f"mealy m={a.inputs} n={a.outputs}", f"states: {' '.join(a.states)}", f"initial: {a.initial}"]
    for s in a.states:
        if s in a.metadata:
            lines.append(f"# {s} = ({interp.format_point(a.metadata[s])})")
    for s in a.states:
        for inputs in _inputs(a.lattice, a.inputs):
            target, out = a.step(s, inputs)
            lines.append(f"{s} -({interp.format_point(inputs)})-> {target} / ({interp.format_point(out)})")
    return "\n".join(lines) + "\n"


def format_imealy(a: IMealyMachine, interp: Interpretation) -> str:
    """Sample rows with non-⊥ outputs; their least extension is the machine's table"""
    s = a.state_width
    lines = [f"imealy s={s} m={a.inputs} n={a.outputs}", f"initial: {interp.format_point(a.initial)}"]
    for name, table in (("T", transition_table(a)), ("O", output_table(a))):
        lines.append(f"{name}:")
        rows = table.samples if hasattr(table, "samples") else tuple(table.items())
        bottom = table.codomain.bottom
        for point, out in rows:
            if out != bottom:
                lines.append(f"  {interp.format_point(point[:s])} | {interp.format_point(point[s:])} "
                             f"-> {interp.format_point(out)}")
    return "\n".join(lines) + "\n"


class MealyService:
    """Service class for Mealy machine operations"""

    def from_circuit(self, request: MealyFromCircuitRequest) -> MealyResponse:
        try:
            interp = resolve_interpretation(request.lattice, request.interpretation)
            machine = circuit_to_mealy(parse_circuit(request.circuit, interp), interp)
            opaque = to_opaque(machine)
            if request.minimize:
                opaque = minimize(opaque)
            return MealyResponse(
                success=True,
                machine=format_mealy(opaque, interp),
                states=len(opaque.states),
                state_width=machine.state_width,
            )
        except LatcircError as e:
            return MealyResponse(success=False, error=str(e))
        except Exception as e:
            return MealyResponse(success=False, error=f"Unexpected error: {str(e)}")

    def to_circuit(self, request: MealyToCircuitRequest) -> CircuitTextResponse:
        # synthesis imports this module; opaque machines are synthesized from their output stream
        from services.synthesis_service import machine_to_circuit
        try:
            interp = resolve_interpretation(request.lattice, request.interpretation)
            circuit = machine_to_circuit(parse_machine(request.machine, interp), interp, request.derivative_budget)
            return CircuitTextResponse(success=True, circuit=print_circuit(circuit),
                                       inputs=circuit.inputs, outputs=circuit.outputs)
        except LatcircError as e:
            return CircuitTextResponse(success=False, error=str(e))
        except Exception as e:
            return CircuitTextResponse(success=False, error=f"Unexpected error: {str(e)}")

    def bisimilar(self, request: BisimilarRequest) -> BisimilarResponse:
        try:
            interp = resolve_interpretation(request.lattice, request.interpretation)
            verdict = bisimilar(parse_machine(request.left, interp), parse_machine(request.right, interp))
            return BisimilarResponse(
                success=True,
                bisimilar=verdict.bisimilar,
                related_pairs=len(verdict.relation) if verdict.bisimilar else None,
                counterexample=[[interp.symbol(e) for e in tick] for tick in verdict.counterexample.ticks]
                if verdict.counterexample else [],
            )
        except LatcircError as e:
            return BisimilarResponse(success=False, error=str(e))
        except Exception as e:
            return BisimilarResponse(success=False, error=f"Unexpected error: {str(e)}")


class EquivalenceService:
    """Service class for extensional equivalence of circuits"""

    def check(self, request: EquivalenceRequest) -> EquivalenceResponse:
        try:
            interp = resolve_interpretation(request.lattice, request.interpretation)
            equivalent, counterexample, method = check_equivalence(
                parse_circuit(request.left, interp), parse_circuit(request.right, interp), interp,
                request.method, request.equiv_budget)
            return EquivalenceResponse(
                success=True,
                equivalent=equivalent,
                method=method,
                counterexample=[[interp.symbol(e) for e in tick] for tick in counterexample.ticks]
                if counterexample else [],
            )
        except LatcircError as e:
            return EquivalenceResponse(success=False, error=str(e))
        except Exception as e:
            return EquivalenceResponse(success=False, error=f"Unexpected error: {str(e)}")
