import logging
from functools import lru_cache
from itertools import product
from typing import Callable, Iterable, Sequence

from models.circuit_models import Bot, Circuit, Gate, Id, Join, Seq
from models.lattice_models import Point, SampledFunction, TupleSpace
from models.mealy_models import MonotoneMap
from models.signature_models import Interpretation
from models.synthesis_models import Expression, GadgetSet
from services.circuit_service import fanout, par_all, permutation, seq_all
from services.errors import NotFunctionallyComplete, NotRealizable, SamplesNotMonotone, SynthesisError
from services.semantics_service import compile_circuit, step

logger = logging.getLogger(__name__)

MAX_GADGET_DEPTH = 4
DEFAULT_VERIFY_LIMIT = 4096


# Gadget search

def _search(interp: Interpretation, variables: int, points: Sequence[Point],
            wanted: dict[str, tuple[int, ...]]) -> dict[str, Expression]:
    """
    Bottom-up enumeration of expressions over `variables` inputs by depth, deduplicated by
    their values on `points`, until every wanted value vector has an expression.
    """
    lattice = interp.lattice
    found: dict[tuple[int, ...], Expression] = {}
    frontier: list[tuple[int, ...]] = []

    def offer(vector: tuple[int, ...], expr: Expression):
        if vector not in found:
            found[vector] = expr
            frontier.append(vector)

    for i in range(variables):
        offer(tuple(p[i] for p in points), ("var", i))
    offer(tuple(lattice.bottom for _ in points), ("bot",))

    operators: list[tuple[str, int, Callable[[Point], int]]] = [
        (gate.name, gate.arity, gate) for gate in interp.gates if gate.arity <= 2
    ]
    operators.append(("join", 2, lambda args: lattice.join(args[0], args[1])))

    def satisfied() -> bool:
        return all(v in found for v in wanted.values())

    depth = 0
    while not satisfied() and depth < MAX_GADGET_DEPTH and frontier:
        depth += 1
        newest = set(frontier)
        frontier = []
        known = list(found)
        for name, arity, fn in operators:
            for args in product(known, repeat=arity):
                if not any(a in newest for a in args):
                    continue
                vector = tuple(fn(tuple(a[j] for a in args)) for j in range(len(points)))
                if name == "join":
                    offer(vector, ("join", found[args[0]], found[args[1]]))
                else:
                    offer(vector, ("gate", name) + tuple(found[a] for a in args))
        logger.debug("gadget search depth %d: %d distinct functions", depth, len(found))

    missing = [label for label, vector in wanted.items() if vector not in found]
    if missing:
        raise NotFunctionallyComplete(
            f"no gadget for {', '.join(missing)} within depth {MAX_GADGET_DEPTH}", missing=missing)
    return {label: found[vector] for label, vector in wanted.items()}


def _primitives(expr: Expression, into: set[str]):
    kind = expr[0]
    if kind == "bot":
        into.add("bot")
    elif kind == "join":
        into.add("join")
    elif kind == "gate":
        into.add(expr[1])
    for arg in expr[2:] if kind == "gate" else expr[1:] if kind == "join" else ():
        _primitives(arg, into)


@lru_cache(maxsize=None)
def discover_gadgets(interp: Interpretation) -> GadgetSet:
    """
    Find δ_v (⊤ iff x ⊒ v) for every v above ⊥, the ⊤-conjunction on {⊥,⊤}² and the guards
    ⊤ ↦ v on {⊥,⊤}, built from the gates of arity at most two, the join and ⊥.
    """
    lattice = interp.lattice
    bot, top = lattice.bottom, lattice.top
    upper = [v for v in range(lattice.size) if v != bot]

    everything = [(x,) for x in range(lattice.size)]
    detectors = _search(interp, 1, everything, {
        f"detector {lattice.symbol(v)}": tuple(top if lattice.le(v, x) else bot for (x,) in everything)
        for v in upper
    })
    binary = [(a, b) for a in (bot, top) for b in (bot, top)]
    conjunction = _search(interp, 2, binary, {
        "conjunction": tuple(top if a == top and b == top else bot for a, b in binary)
    })
    unary = [(bot,), (top,)]
    guards = _search(interp, 1, unary, {f"guard {lattice.symbol(v)}": (bot, v) for v in upper})

    gadgets = GadgetSet(
        detectors={v: detectors[f"detector {lattice.symbol(v)}"] for v in upper},
        conjunction=conjunction["conjunction"],
        guards={v: guards[f"guard {lattice.symbol(v)}"] for v in upper},
        primitives=(),
    )
    used: set[str] = set()
    for expr in [*gadgets.detectors.values(), gadgets.conjunction, *gadgets.guards.values()]:
        _primitives(expr, used)
    logger.debug("gadgets found using %s", ", ".join(sorted(used)))
    return GadgetSet(gadgets.detectors, gadgets.conjunction, gadgets.guards, tuple(sorted(used)))


def evaluate_expression(expr: Expression, args: Point, interp: Interpretation) -> int:
    kind = expr[0]
    if kind == "var":
        return args[expr[1]]
    if kind == "bot":
        return interp.lattice.bottom
    if kind == "join":
        return interp.lattice.join(evaluate_expression(expr[1], args, interp),
                                   evaluate_expression(expr[2], args, interp))
    return interp.gate(expr[1])(tuple(evaluate_expression(a, args, interp) for a in expr[2:]))


def _tree(expr: Expression, interp: Interpretation) -> tuple[Circuit, list[int]]:
    """A circuit with one input per variable occurrence, and the variable each input carries"""
    kind = expr[0]
    if kind == "var":
        return Id(1), [expr[1]]
    if kind == "bot":
        return Bot(), []
    args = expr[1:] if kind == "join" else expr[2:]
    parts = [_tree(a, interp) for a in args]
    body = par_all([c for c, _ in parts])
    head = Join() if kind == "join" else Gate(expr[1], interp.signature.arity(expr[1]))
    return Seq(body, head), [v for _, leaves in parts for v in leaves]


def _share(uses: Sequence[int], leaves: Sequence[int]) -> Circuit:
    """Fan out every wire i to uses[i] copies and route the copies to the leaf order"""
    offsets, total = [], 0
    for count in uses:
        offsets.append(total)
        total += count
    taken = [0] * len(uses)
    order = []
    for v in leaves:
        order.append(offsets[v] + taken[v])
        taken[v] += 1
    return seq_all([par_all([fanout(count) for count in uses]) if uses else Id(0), permutation(order)])


def expression_circuit(expr: Expression, variables: int, interp: Interpretation) -> Circuit:
    tree, leaves = _tree(expr, interp)
    uses = [leaves.count(i) for i in range(variables)]
    return seq_all([_share(uses, leaves), tree])


# Monotone functions

def monotone_extension(domain: TupleSpace, codomain: TupleSpace,
                       samples: Iterable[tuple[Point, Point]]) -> SampledFunction:
    """The least monotone function through the samples"""
    samples = tuple(samples)
    for p, out_p in samples:
        for q, out_q in samples:
            if domain.le(p, q) and not codomain.le(out_p, out_q):
                raise SamplesNotMonotone(f"samples {p} <= {q} map to {out_p} and {out_q}", witness=(p, q))
    return SampledFunction(domain, codomain, samples)


def basis(table: MonotoneMap, coordinate: int) -> list[tuple[Point, int]]:
    """Points whose output coordinate exceeds the join over their lower covers"""
    space, lattice = table.domain, table.domain.base
    if isinstance(table, SampledFunction):
        points = [(p, out[coordinate]) for p, out in table.samples if out[coordinate] != lattice.bottom]
    else:
        points = []
        for p, out in table.items():
            below = lattice.bottom
            for q in space.lower_covers(p):
                below = lattice.join(below, table(q)[coordinate])
            if out[coordinate] != below:
                points.append((p, out[coordinate]))
    for p, value in points:
        if p == space.bottom:
            raise NotRealizable(
                f"output {coordinate} is {lattice.symbol(value)} on the all-⊥ input; only ⊥-preserving "
                "functions are realizable by time-invariant circuits", coordinate=coordinate)
    return points


def _balanced_tree(leaves: int, node: Circuit, empty: Circuit) -> Circuit:
    if leaves == 0:
        return empty
    if leaves == 1:
        return Id(1)
    left = (leaves + 1) // 2
    return Seq(par_all([_balanced_tree(left, node, empty), _balanced_tree(leaves - left, node, empty)]), node)


def realize_monotone(table: MonotoneMap, interp: Interpretation,
                     verify_limit: int = DEFAULT_VERIFY_LIMIT) -> Circuit:
    """
    A combinational circuit computing `table`: for every output, the join over its basis
    points p of guard_F(p)(δ_p(x)), where δ_p is the conjunction of per-coordinate detectors.
    """
    gadgets = discover_gadgets(interp)
    k, n = table.domain.width, table.codomain.width
    bottom = interp.lattice.bottom

    per_output = [basis(table, j) for j in range(n)]
    needed = sorted({(i, v) for points in per_output for p, _ in points for i, v in enumerate(p) if v != bottom})
    index = {pair: position for position, pair in enumerate(needed)}

    leaves: list[int] = []
    point_terms: list[Circuit] = []
    for points in per_output:
        for p, value in points:
            wires = [index[(i, v)] for i, v in enumerate(p) if v != bottom]
            leaves.extend(wires)
            conj = _balanced_tree(len(wires), expression_circuit(gadgets.conjunction, 2, interp), Id(0))
            point_terms.append(seq_all([conj, expression_circuit(gadgets.guards[value], 1, interp)]))

    circuit = seq_all([
        _share([sum(1 for i, _ in needed if i == wire) for wire in range(k)], [i for i, _ in needed]),
        par_all([expression_circuit(gadgets.detectors[v], 1, interp) for _, v in needed]),
        _share([leaves.count(d) for d in range(len(needed))], leaves),
        par_all(point_terms),
        par_all([_balanced_tree(len(points), Join(), Bot()) for points in per_output]),
    ])
    logger.debug("realized %d->%d table from %d basis points and %d detectors",
                 k, n, sum(len(p) for p in per_output), len(needed))
    _verify(circuit, table, interp, verify_limit, per_output)
    return circuit


def _verify(circuit: Circuit, table: MonotoneMap, interp: Interpretation, verify_limit: int,
            per_output: list[list[tuple[Point, int]]]):
    net = compile_circuit(circuit, interp)
    if table.domain.size <= verify_limit:
        points: Iterable[Point] = table.domain.points()
    else:
        points = {p for found in per_output for p, _ in found}
    for p in points:
        _, out = step(net, net.initial, p)
        if out != table(p):
            raise SynthesisError(f"realized circuit gives {interp.format_point(out)} on "
                                 f"({interp.format_point(p)}), expected {interp.format_point(table(p))}",
                                 point=p)
