import logging
import re
from collections import deque
from dataclasses import replace
from itertools import product
from pathlib import Path
from typing import Optional

from models.circuit_models import Circuit
from models.lattice_models import FunctionTable, Point, TupleSpace
from models.mealy_models import IMealyMachine, Machine, MealyMachine
from models.signature_models import Interpretation
from models.synthesis_models import (
    BlackBoxSpec, CheckFunctionResponse, CircuitFunctionVerdict, PrefixPeriodicSpec, SpecRequest, StateAssignment,
    StateOrder, StreamSpec, SynthesizeResponse
)
from services.circuit_service import print_circuit
from services.errors import (
    DerivativeBudgetExceeded, FileFormatError, LatcircError, NotAPartialOrder, NotFunctionallyComplete, NotMonotone,
    SynthesisError
)
from services.lattice_service import check_monotone
from services.mealy_service import (
    equivalence_classes, format_imealy, format_mealy, mealy_to_circuit, minimize, parse_machine, relabel, to_opaque
)
from services.realization_service import DEFAULT_VERIFY_LIMIT, discover_gadgets, monotone_extension
from services.signature_service import resolve_interpretation

logger = logging.getLogger(__name__)

DEFAULT_DERIVATIVE_BUDGET = 4096
DEFAULT_WINDOW = 4


# Residuals

def _minimal_period(period: tuple[FunctionTable, ...]) -> tuple[FunctionTable, ...]:
    r = len(period)
    for d in range(1, r + 1):
        if r % d == 0 and all(period[i] == period[i % d] for i in range(r)):
            return period[:d]
    return period


def _canonical_position(tick: int, prefix_length: int, period_length: int) -> int:
    if tick < prefix_length:
        return tick
    return prefix_length + (tick - prefix_length) % period_length


def normalize(spec: PrefixPeriodicSpec) -> PrefixPeriodicSpec:
    """Shortest period, then absorb prefix tables that repeat the period's tail into the period"""
    if not spec.period:
        raise FileFormatError("a prefix-periodic spec needs at least one period table")
    tick = spec.position
    prefix, period = list(spec.prefix), _minimal_period(tuple(spec.period))
    while prefix and prefix[-1] == period[-1]:
        prefix.pop()
        period = (period[-1],) + period[:-1]
    return replace(spec, prefix=tuple(prefix), period=period,
                   position=_canonical_position(tick, len(prefix), len(period)))


def _history(spec: PrefixPeriodicSpec) -> tuple[Point, ...]:
    """The last window-1 inputs, ⊥ before the first tick"""
    if spec.window == 1:
        return ()
    bottom = (spec.lattice.bottom,) * spec.inputs
    return ((bottom,) * (spec.window - 1) + spec.history)[-(spec.window - 1):]


def _window(spec: PrefixPeriodicSpec, a: Point) -> Point:
    return tuple(e for tick in _history(spec) + (a,) for e in tick)


def initial_output(spec: StreamSpec, a: Point) -> Point:
    """The spec's output on the first tick when the first input is a"""
    if isinstance(spec, BlackBoxSpec):
        return spec.machine.step(spec.state, a)[1]
    return spec.table_at(spec.position)(_window(spec, a))


def functional_derivative(spec: StreamSpec, a: Point) -> StreamSpec:
    """The residual stream function once input a has been consumed"""
    if isinstance(spec, BlackBoxSpec):
        return replace(spec, state=spec.machine.step(spec.state, a)[0])
    history = (spec.history + (a,))[-(spec.window - 1):] if spec.window > 1 else ()
    position = _canonical_position(spec.position + 1, spec.prefix_length, len(spec.period))
    return replace(spec, position=position, history=history)


def _read_coordinates(spec: PrefixPeriodicSpec) -> frozenset[tuple[int, int]]:
    """The (window tick, input wire) pairs that some table's output depends on"""
    m = spec.inputs
    read = set()
    for table in _tables(spec):
        for slot, wire in product(range(spec.window), range(m)):
            if (slot, wire) in read:
                continue
            index = slot * m + wire
            seen: dict[Point, Point] = {}
            for point, out in table.items():
                rest = point[:index] + point[index + 1:]
                if seen.setdefault(rest, out) != out:
                    read.add((slot, wire))
                    break
    return frozenset(read)


def _key(spec: StreamSpec, read: frozenset[tuple[int, int]] = frozenset()):
    """Residuals with equal keys are equal stream functions"""
    if isinstance(spec, BlackBoxSpec):
        return spec.blocks[spec.state]
    # history slot i is read later at window slots 0..i only
    bottom = spec.lattice.bottom
    live = tuple(
        tuple(e if any((j, wire) in read for j in range(i + 1)) else bottom for wire, e in enumerate(tick))
        for i, tick in enumerate(_history(spec))
    )
    return spec.position, live


def blackbox_spec(machine: Machine) -> BlackBoxSpec:
    if isinstance(machine, IMealyMachine):
        machine = to_opaque(machine)
    blocks = {s: i for i, members in enumerate(equivalence_classes(machine)) for s in members}
    return BlackBoxSpec(machine, machine.initial, blocks)


# Minimal machine and its state order

def minimal_mealy(spec: StreamSpec, budget: int = DEFAULT_DERIVATIVE_BUDGET) -> MealyMachine:
    """
    The closure of `spec` under functional derivatives as a Mealy machine: T(h)(a) = h_a and
    O(h)(a) = h[a]. Residuals are explored breadth-first with inputs in lexicographic order,
    then the machine is minimized and its states are named s0, s1, ... in discovery order.
    """
    if isinstance(spec, PrefixPeriodicSpec):
        spec = normalize(spec)
    read = _read_coordinates(spec) if isinstance(spec, PrefixPeriodicSpec) else frozenset()
    choices = list(product(range(spec.lattice.size), repeat=spec.inputs))
    names = {_key(spec, read): "s0"}
    residuals = {"s0": spec}
    queue = deque(["s0"])
    transitions = {}
    while queue:
        label = queue.popleft()
        residual = residuals[label]
        for a in choices:
            following = functional_derivative(residual, a)
            key = _key(following, read)
            if key not in names:
                if len(names) >= budget:
                    raise DerivativeBudgetExceeded(
                        f"more than {budget} distinct stream derivatives; the function has no finite machine "
                        "within the budget", budget=budget)
                names[key] = f"s{len(names)}"
                residuals[names[key]] = following
                queue.append(names[key])
            transitions[(label, a)] = (names[key], initial_output(residual, a))
    closure = MealyMachine(spec.lattice, spec.inputs, spec.outputs, tuple(residuals), "s0", transitions)
    machine = relabel(minimize(closure))
    logger.info("derivative closure: %d residuals, %d states after minimization", len(residuals),
                len(machine.states))
    return machine


def state_order(machine: MealyMachine) -> StateOrder:
    """Greatest order-simulation: s ⪯ s' iff outputs are below pointwise and successors stay related"""
    choices = list(product(range(machine.lattice.size), repeat=machine.inputs))
    outputs = TupleSpace(machine.lattice, machine.outputs)
    pairs = {
        (s, t) for s in machine.states for t in machine.states
        if all(outputs.le(machine.step(s, a)[1], machine.step(t, a)[1]) for a in choices)
    }
    changed = True
    while changed:
        changed = False
        for s, t in list(pairs):
            if any((machine.step(s, a)[0], machine.step(t, a)[0]) not in pairs for a in choices):
                pairs.discard((s, t))
                changed = True
    for s, t in pairs:
        if s != t and (t, s) in pairs:
            raise NotAPartialOrder(f"distinct states {s} and {t} are below each other; the machine is not minimal",
                                   witness=(s, t))
    return StateOrder(machine, frozenset(pairs))


def state_assignment(order: StateOrder) -> StateAssignment:
    lattice = order.machine.lattice
    states = order.machine.states
    return StateAssignment(order.machine, {
        s: tuple(lattice.top if order.le(other, s) else lattice.bottom for other in states) for s in states
    })


def _input_monotone(machine: MealyMachine, order: StateOrder):
    inputs = TupleSpace(machine.lattice, machine.inputs)
    outputs = TupleSpace(machine.lattice, machine.outputs)
    for s in machine.states:
        for a in inputs.points():
            next_a, out_a = machine.step(s, a)
            for b in inputs.upper_covers(a):
                next_b, out_b = machine.step(s, b)
                if not outputs.le(out_a, out_b) or not order.le(next_a, next_b):
                    raise NotMonotone(f"state {s} is not monotone in its input between {a} and {b}",
                                      witness=(s, a, b))


def _tables(spec: StreamSpec) -> list[FunctionTable]:
    if isinstance(spec, BlackBoxSpec):
        return []
    return list(dict.fromkeys([*spec.prefix, *spec.period]))


def _ultimate_period(machine: MealyMachine) -> tuple[int, int]:
    """Prefix and period of the state sequence under constant ⊥ input"""
    bottom = (machine.lattice.bottom,) * machine.inputs
    seen: dict[str, int] = {}
    state = machine.initial
    while state not in seen:
        seen[state] = len(seen)
        state = machine.step(state, bottom)[0]
    return seen[state], len(seen) - seen[state]


def _analyse(spec: StreamSpec, interp: Interpretation, budget: int):
    if isinstance(spec, PrefixPeriodicSpec):
        for table in _tables(normalize(spec)):
            verdict = check_monotone(table)
            if not verdict:
                raise NotMonotone(f"output table is not monotone between {verdict.witness[0]} and "
                                  f"{verdict.witness[1]}", witness=verdict.witness)
    machine = minimal_mealy(spec, budget)
    order = state_order(machine)
    _input_monotone(machine, order)
    discover_gadgets(interp)
    return machine, order


def check_circuit_function(spec: StreamSpec, interp: Interpretation,
                           budget: int = DEFAULT_DERIVATIVE_BUDGET) -> CircuitFunctionVerdict:
    """
    Decide whether `spec` is realizable by a circuit: finitely many derivatives, monotone tables
    and machine, and a functionally complete interpretation. Failures become a rejecting verdict.
    """
    try:
        machine, _ = _analyse(spec, interp, budget)
    except (DerivativeBudgetExceeded, NotMonotone, NotAPartialOrder, NotFunctionallyComplete) as e:
        logger.info("not a circuit function: %s", e)
        return CircuitFunctionVerdict(False, reason=e.message, code=e.code, witness=e.details.get("witness"),
                                      error=e)
    prefix, period = _ultimate_period(machine)
    return CircuitFunctionVerdict(True, states=len(machine.states), prefix=prefix, period=period)


def synthesize(spec: StreamSpec, interp: Interpretation, budget: int = DEFAULT_DERIVATIVE_BUDGET) -> IMealyMachine:
    """An I-Mealy machine for `spec`: the minimal machine encoded one ⊤/⊥ bit per state"""
    try:
        machine, order = _analyse(spec, interp, budget)
    except (DerivativeBudgetExceeded, NotMonotone, NotAPartialOrder, NotFunctionallyComplete) as e:
        raise SynthesisError(f"not a circuit function: {e}", cause=e.code) from e
    gamma = state_assignment(order)
    lattice = machine.lattice
    r, m, n = gamma.width, machine.inputs, machine.outputs
    domain = TupleSpace(lattice, r + m)
    transition = monotone_extension(domain, TupleSpace(lattice, r), [
        (gamma.codes[s] + a, gamma.codes[target]) for (s, a), (target, _) in machine.transitions.items()
    ])
    output = monotone_extension(domain, TupleSpace(lattice, n), [
        (gamma.codes[s] + a, out) for (s, a), (_, out) in machine.transitions.items()
    ])
    logger.info("synthesized a %d-state machine into %d registers", len(machine.states), r)
    return IMealyMachine(lattice, r, m, n, gamma.codes[machine.initial],
                         lambda p: (transition(p), output(p)), transition, output)


def spec_to_circuit(spec: StreamSpec, interp: Interpretation, budget: int = DEFAULT_DERIVATIVE_BUDGET,
                    verify_limit: int = DEFAULT_VERIFY_LIMIT) -> Circuit:
    return mealy_to_circuit(synthesize(spec, interp, budget), interp, verify_limit)


def machine_to_circuit(machine: Machine, interp: Interpretation, budget: int = DEFAULT_DERIVATIVE_BUDGET,
                       verify_limit: int = DEFAULT_VERIFY_LIMIT) -> Circuit:
    """I-Mealy machines translate directly; opaque machines go through their output stream"""
    if isinstance(machine, IMealyMachine):
        return mealy_to_circuit(machine, interp, verify_limit)
    return spec_to_circuit(blackbox_spec(machine), interp, budget, verify_limit)


# Spec files

_SPEC_HEADER = re.compile(r"spec((?:\s+\w+=\d+)+)\s*$")


def _pattern(text: str, width: int, interp: Interpretation, number: int) -> list[Optional[int]]:
    parts = [s.strip() for s in text.split(",")]
    if parts == ["*"]:
        return [None] * width
    if len(parts) != width:
        raise FileFormatError(f"line {number}: expected {width} symbols, got {len(parts)}", line=number)
    try:
        return [None if s == "*" else interp.element(s) for s in parts]
    except LatcircError as e:
        raise FileFormatError(f"line {number}: {e.message}", line=number) from None


def _table(rows: list[tuple[int, str]], m: int, n: int, window: int, interp: Interpretation) -> FunctionTable:
    """Unlisted points output ⊥; a later row overrides earlier ones"""
    domain, codomain = TupleSpace(interp.lattice, window * m), TupleSpace(interp.lattice, n)
    outputs = [codomain.bottom] * domain.size
    for number, row in rows:
        left, arrow, right = row.partition("->")
        ticks = left.split("|")
        if not arrow or len(ticks) != window:
            raise FileFormatError(f"line {number}: expected {window} window ticks separated by '|' then '->'",
                                  line=number)
        pattern = [e for tick in ticks for e in _pattern(tick, m, interp, number)]
        out = tuple(_pattern(right, n, interp, number))
        if None in out:
            raise FileFormatError(f"line {number}: outputs cannot be wildcards", line=number)
        for point in domain.points():
            if all(want is None or want == got for want, got in zip(pattern, point)):
                outputs[domain.index(point)] = out
    return FunctionTable(domain, codomain, tuple(outputs))


def parse_spec(text: str, interp: Interpretation, window: int = DEFAULT_WINDOW) -> StreamSpec:
    """
    Parse a spec file:

        spec m=1 n=1 window=2
        period:
        table
          t | * -> t

    or `blackbox:` followed by a machine in the mealy or imealy format.
    """
    lines = [(number, raw.split("#", 1)[0].strip()) for number, raw in enumerate(text.splitlines(), start=1)]
    lines = [(number, line) for number, line in lines if line]
    if not lines or not _SPEC_HEADER.fullmatch(lines[0][1]):
        raise FileFormatError("spec file must start with 'spec m=<int> n=<int> [window=<int>]'", line=1)
    fields = {k: int(v) for k, v in (item.split("=") for item in _SPEC_HEADER.fullmatch(lines[0][1]).group(1).split())}
    m, n, window = fields.get("m", 1), fields.get("n", 1), fields.get("window", window)
    if window < 1:
        raise FileFormatError("window must be at least 1", window=window)

    if len(lines) > 1 and lines[1][1] == "blackbox:":
        start = lines[2][0] if len(lines) > 2 else lines[1][0] + 1
        machine = parse_machine("\n".join(text.splitlines()[start - 1:]), interp)
        if (machine.inputs, machine.outputs) != (m, n):
            raise FileFormatError(f"machine has type {machine.inputs}->{machine.outputs}, header says {m}->{n}")
        return blackbox_spec(machine)

    sections: dict[str, list[list[tuple[int, str]]]] = {"prefix": [], "period": []}
    current = None
    for number, line in lines[1:]:
        if line in ("prefix:", "period:"):
            current = sections[line[:-1]]
        elif line == "table":
            if current is None:
                raise FileFormatError(f"line {number}: table outside a prefix: or period: section", line=number)
            current.append([])
        elif current and "->" in line:
            current[-1].append((number, line))
        else:
            raise FileFormatError(f"line {number}: unrecognised line '{line}'", line=number)
    prefix = tuple(_table(rows, m, n, window, interp) for rows in sections["prefix"])
    period = tuple(_table(rows, m, n, window, interp) for rows in sections["period"])
    if not period:
        raise FileFormatError("spec needs a period: section with at least one table")
    return PrefixPeriodicSpec(interp.lattice, m, n, window, prefix, period)


def load_spec(path: str, interp: Interpretation, window: int = DEFAULT_WINDOW) -> StreamSpec:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise FileFormatError(f"cannot read spec file {path}: {e}") from e
    return parse_spec(text, interp, window)


class SynthesisService:
    """Service class for synthesis from stream specifications"""

    def synthesize(self, request: SpecRequest) -> SynthesizeResponse:
        try:
            interp = resolve_interpretation(request.lattice, request.interpretation)
            spec = parse_spec(request.spec, interp)
            machine = synthesize(spec, interp, request.derivative_budget)
            if request.emit == "circuit":
                output = print_circuit(mealy_to_circuit(machine, interp))
            else:
                output = format_imealy(machine, interp)
            return SynthesizeResponse(success=True, output=output, states=machine.state_width,
                                      state_width=machine.state_width)
        except LatcircError as e:
            return SynthesizeResponse(success=False, error=str(e))
        except Exception as e:
            return SynthesizeResponse(success=False, error=f"Unexpected error: {str(e)}")

    def check(self, request: SpecRequest) -> CheckFunctionResponse:
        try:
            interp = resolve_interpretation(request.lattice, request.interpretation)
            verdict = check_circuit_function(parse_spec(request.spec, interp), interp, request.derivative_budget)
            return CheckFunctionResponse(success=True, accepted=verdict.accepted, reason=verdict.reason,
                                         code=verdict.code, states=verdict.states, prefix=verdict.prefix,
                                         period=verdict.period)
        except LatcircError as e:
            return CheckFunctionResponse(success=False, error=str(e))
        except Exception as e:
            return CheckFunctionResponse(success=False, error=f"Unexpected error: {str(e)}")

    def minimal_machine(self, request: SpecRequest) -> SynthesizeResponse:
        try:
            interp = resolve_interpretation(request.lattice, request.interpretation)
            machine = minimal_mealy(parse_spec(request.spec, interp), request.derivative_budget)
            return SynthesizeResponse(success=True, output=format_mealy(machine, interp), states=len(machine.states))
        except LatcircError as e:
            return SynthesizeResponse(success=False, error=str(e))
        except Exception as e:
            return SynthesizeResponse(success=False, error=f"Unexpected error: {str(e)}")
