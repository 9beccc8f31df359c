import logging
from typing import Callable, Optional

from models.circuit_models import (
    Bot, Circuit, CircuitRequest, Delay, Fork, Gate, Id, Join, Par, Seq, Stub, Swap, Top, Trace, Value, Waveform
)
from models.lattice_models import Point
from models.rewrite_models import (
    AXIOMS, AxiomRequest, AxiomResponse, ProductivityResult, ReduceRequest, ReduceResponse, ReductionTrace,
    TraceDelayForm, TraceDelayFormResponse
)
from models.signature_models import BOTTOM_SYMBOL, Interpretation
from services.circuit_service import (
    Locus, block_permutation, constant, diagonal, discard, format_locus, is_combinational, is_passive, par_all,
    parse_circuit, parse_locus, pointwise_join, print_circuit, register, replace_at, seq_all, subterm_at, trace,
    walk
)
from services.errors import (
    LatcircError, NotATrace, NotCombinational, NotCombinationalCore, PatternMismatch
)
from services.signature_service import resolve_interpretation

logger = logging.getLogger(__name__)


# Axioms

def _par_leaves(c: Circuit) -> list[Circuit]:
    if isinstance(c, Par):
        return _par_leaves(c.top) + _par_leaves(c.bottom)
    if c == Id(0):
        return []
    return [c]


def _constant_leaf(c: Circuit) -> bool:
    return isinstance(c, (Value, Bot, Top))


def _register_leaf(c: Circuit) -> Optional[Circuit]:
    """The head constant of a register shape, else None"""
    match c:
        case Seq(Par(head, Delay()), Join()) if _constant_leaf(head):
            return head
    return None


def _element_of(c: Circuit, interp: Interpretation) -> int:
    match c:
        case Value(symbol):
            return interp.value(symbol)
        case Top():
            return interp.lattice.top
    return interp.lattice.bottom


def _constant_of(element: int, interp: Interpretation) -> Circuit:
    return constant(interp.symbol(element), interp)


def _fork_axiom(c: Circuit, interp: Interpretation) -> Optional[Circuit]:
    match c:
        case Seq(v, Fork()) if _constant_leaf(v):
            return Par(v, v)
    return None


def _join_axiom(c: Circuit, interp: Interpretation) -> Optional[Circuit]:
    match c:
        case Seq(Par(v1, v2), Join()) if _constant_leaf(v1) and _constant_leaf(v2):
            return _constant_of(interp.lattice.join(_element_of(v1, interp), _element_of(v2, interp)), interp)
    return None


def _stub_axiom(c: Circuit, interp: Interpretation) -> Optional[Circuit]:
    match c:
        case Seq(v, Stub()) if _constant_leaf(v):
            return Id(0)
    return None


def _gate_axiom(c: Circuit, interp: Interpretation) -> Optional[Circuit]:
    match c:
        case Seq(bundle, Gate(symbol, _)):
            leaves = _par_leaves(bundle)
            if leaves and all(_constant_leaf(v) for v in leaves):
                table = interp.gate(symbol)
                return _constant_of(table(tuple(_element_of(v, interp) for v in leaves)), interp)
    return None


def _timelessness_axiom(c: Circuit, interp: Interpretation) -> Optional[Circuit]:
    match c:
        case Seq(bundle, Gate() as gate):
            leaves = _par_leaves(bundle)
            if leaves and all(isinstance(d, Delay) for d in leaves):
                return Seq(gate, Delay())
    return None


def _disconnect_axiom(c: Circuit, interp: Interpretation) -> Optional[Circuit]:
    if c == Seq(Bot(), Delay()):
        return Bot()
    return None


def _unobservable_axiom(c: Circuit, interp: Interpretation) -> Optional[Circuit]:
    if c == Seq(Delay(), Stub()):
        return Stub()
    return None


def _streaming_axiom(c: Circuit, interp: Interpretation) -> Optional[Circuit]:
    match c:
        case Seq(bundle, Gate() as gate):
            heads = [_register_leaf(r) for r in _par_leaves(bundle)]
            if heads and all(h is not None for h in heads):
                return Seq(Par(Seq(par_all(heads), gate), Seq(gate, Delay())), Join())
    return None


_AXIOM_RULES: dict[str, Callable[[Circuit, Interpretation], Optional[Circuit]]] = {
    "Fork": _fork_axiom,
    "Join": _join_axiom,
    "Stub": _stub_axiom,
    "Gate": _gate_axiom,
    "Timelessness": _timelessness_axiom,
    "Disconnect": _disconnect_axiom,
    "Unobservable": _unobservable_axiom,
    "Streaming": _streaming_axiom,
}


def _axiom(rule: str) -> Callable[[Circuit, Interpretation], Optional[Circuit]]:
    try:
        return _AXIOM_RULES[rule]
    except KeyError:
        raise PatternMismatch(f"unknown rule '{rule}', expected one of {', '.join(AXIOMS)}", rule=rule) from None


def find_redexes(c: Circuit, rule: str, interp: Interpretation) -> list[Locus]:
    matcher = _axiom(rule)
    return [locus for locus, term in walk(c) if matcher(term, interp) is not None]


def apply_axiom(c: Circuit, rule: str, locus: Locus, interp: Interpretation) -> Circuit:
    """Rewrite the subterm at `locus` by the left-to-right orientation of `rule`"""
    target = subterm_at(c, locus)
    rewritten = _axiom(rule)(target, interp)
    if rewritten is None:
        raise PatternMismatch(f"{rule} does not match at {format_locus(locus)}: {print_circuit(target)}",
                              rule=rule, locus=format_locus(locus))
    return replace_at(c, locus, rewritten)


def extensionality(c: Circuit, interp: Interpretation, steps: Optional[ReductionTrace] = None,
                   locus: Locus = ()) -> Point:
    """Reduce a closed combinational term to its values with the Fork, Join, Stub and Gate axioms"""
    if c.inputs != 0 or not is_combinational(c):
        raise NotCombinational(f"extensionality needs a closed combinational term, got {print_circuit(c)}")
    lattice = interp.lattice

    def fire(rule: str, generator: Circuit, values: list[int], out: list[int], at: Locus):
        if steps is not None:
            before = Seq(par_all([_constant_of(v, interp) for v in values]), generator)
            steps.record(rule, before, par_all([_constant_of(v, interp) for v in out]), format_locus(at))

    def evaluate(term: Circuit, values: list[int], at: Locus) -> list[int]:
        match term:
            case Value() | Bot() | Top():
                return [_element_of(term, interp)]
            case Gate(symbol, _):
                out = [interp.gate(symbol)(tuple(values))]
                fire("Gate", term, values, out, at)
                return out
            case Fork():
                out = values * 2
                fire("Fork", term, values, out, at)
                return out
            case Join():
                out = [lattice.join(values[0], values[1])]
                fire("Join", term, values, out, at)
                return out
            case Stub():
                fire("Stub", term, values, [], at)
                return []
            case Id():
                return values
            case Swap():
                return [values[1], values[0]]
            case Seq(first, second):
                return evaluate(second, evaluate(first, values, at + (0,)), at + (1,))
            case Par(top, bottom):
                return (evaluate(top, values[:top.inputs], at + (0,))
                        + evaluate(bottom, values[top.inputs:], at + (1,)))
        raise NotCombinational(f"cannot evaluate {print_circuit(term)} instantaneously")

    result = tuple(evaluate(c, [], locus))
    if steps is not None:
        steps.record("extensionality", c, par_all([_constant_of(v, interp) for v in result]), format_locus(locus))
    return result


def generalised_streaming(c: Circuit, interp: Interpretation) -> Circuit:
    """
    Split `registers ; f` into an instantaneous copy of f on the heads and a delayed copy on
    the tails, joined pointwise.
    """
    match c:
        case Seq(bundle, block):
            pass
        case _:
            raise PatternMismatch(f"expected a register bundle followed by a block, got {print_circuit(c)}")
    heads = [_register_leaf(r) for r in _par_leaves(bundle)]
    if any(h is None for h in heads):
        raise PatternMismatch(f"{print_circuit(bundle)} is not a bundle of registers")
    if not is_combinational(block) or not is_passive(block):
        raise NotCombinational(f"{print_circuit(block)} is not passive combinational")
    n = block.outputs
    return Seq(
        Par(Seq(par_all(heads), block), Seq(block, par_all([Delay()] * n))),
        pointwise_join(n),
    )


# Traces

def unfold(c: Circuit) -> Circuit:
    """Conway unfolding: a second copy of the body consumes the first copy's feedback"""
    if not isinstance(c, Trace):
        raise NotATrace(f"unfolding needs a trace, got {print_circuit(c)}")
    x, f = c.width, c.body
    m, n = f.inputs - x, f.outputs - x
    return Trace(x, seq_all([
        par_all([Id(x), diagonal(m)]),
        Par(f, Id(m)),
        par_all([Id(x), discard(n), Id(m)]),
        f,
    ]))


def instant_feedback(c: Circuit, chain_steps: int, extra: int = 0) -> Circuit:
    """
    Replace trace(x, f) with f combinational by the iterate F^c, c = x * chain_steps + extra.

    F^0 feeds ⊥ into the loop; F^(j+1) feeds the loop outputs of F^j into a fresh copy of f.
    """
    if not isinstance(c, Trace):
        raise NotATrace(f"instant feedback needs a trace, got {print_circuit(c)}")
    x, f = c.width, c.body
    if not is_combinational(f):
        raise NotCombinationalCore(f"the traced body {print_circuit(f)} is not combinational")
    m, n = f.inputs - x, f.outputs - x
    iterations = x * chain_steps + extra

    iterate = seq_all([_beside(par_all([Bot()] * x), Id(m)), f])
    for _ in range(iterations):
        iterate = seq_all([
            diagonal(m),
            Par(seq_all([iterate, par_all([Id(x), discard(n)])]), Id(m)),
            f,
        ])
    logger.debug("instant feedback on %d wires: %d iterations", x, iterations)
    return seq_all([iterate, par_all([discard(x), Id(n)])])


# Global trace-delay form

def _beside(*terms: Circuit) -> Circuit:
    kept = [t for t in terms if t != Id(0)]
    return par_all(kept) if kept else Id(0)


def _hoisted(tdf: TraceDelayForm) -> bool:
    return tdf.trace_width + tdf.delay_width + tdf.value_width > 0


def _tdf(c: Circuit, locus: Locus, steps: ReductionTrace) -> TraceDelayForm:
    match c:
        case Value(symbol):
            return TraceDelayForm(Id(1), 0, 0, (symbol,), 0, 1)
        case Top():
            return TraceDelayForm(Id(1), 0, 0, ("T",), 0, 1)
        case Delay():
            return TraceDelayForm(Swap(), 0, 1, (), 1, 1)
        case Seq(first, second):
            f = _tdf(first, locus + (0,), steps)
            g = _tdf(second, locus + (1,), steps)
            x1, d1, k1, m, p = f.trace_width, f.delay_width, f.value_width, f.inputs, f.outputs
            x2, d2, k2, n = g.trace_width, g.delay_width, g.value_width, g.outputs
            core = seq_all([
                block_permutation([x1, x2, d1, d2, k1, k2, m], [0, 2, 4, 6, 1, 3, 5]),
                _beside(f.core, Id(x2 + d2 + k2)),
                block_permutation([x1, d1, p, x2, d2, k2], [0, 1, 3, 4, 5, 2]),
                _beside(Id(x1 + d1), g.core),
                block_permutation([x1, d1, x2, d2, n], [0, 2, 1, 3, 4]),
            ])
            result = TraceDelayForm(core, x1 + x2, d1 + d2, f.init_values + g.init_values, m, n)
            rule = "tightening"
        case Par(top, bottom):
            f = _tdf(top, locus + (0,), steps)
            g = _tdf(bottom, locus + (1,), steps)
            x1, d1, k1, m1, n1 = f.trace_width, f.delay_width, f.value_width, f.inputs, f.outputs
            x2, d2, k2, m2, n2 = g.trace_width, g.delay_width, g.value_width, g.inputs, g.outputs
            core = seq_all([
                block_permutation([x1, x2, d1, d2, k1, k2, m1, m2], [0, 2, 4, 6, 1, 3, 5, 7]),
                _beside(f.core, g.core),
                block_permutation([x1, d1, n1, x2, d2, n2], [0, 3, 1, 4, 2, 5]),
            ])
            result = TraceDelayForm(core, x1 + x2, d1 + d2, f.init_values + g.init_values, m1 + m2, n1 + n2)
            rule = "superposing"
        case Trace(w, body):
            guarded = _delay_guarded(w, body)
            if guarded is not None:
                f = _tdf(guarded, locus + (0,), steps)
                xf, df, kf, m, n = f.trace_width, f.delay_width, f.value_width, f.inputs - w, f.outputs - w
                core = seq_all([
                    block_permutation([xf, w, df, kf, m], [0, 2, 3, 1, 4]),
                    f.core,
                    block_permutation([xf, df, w, n], [0, 2, 1, 3]),
                ])
                result = TraceDelayForm(core, xf, w + df, f.init_values, m, n)
                rule = "sliding"
            else:
                f = _tdf(body, locus + (0,), steps)
                xf, df, kf, m, n = f.trace_width, f.delay_width, f.value_width, f.inputs - w, f.outputs - w
                core = seq_all([
                    block_permutation([w, xf, df, kf, m], [1, 2, 3, 0, 4]),
                    f.core,
                    block_permutation([xf, df, w, n], [2, 0, 1, 3]),
                ])
                result = TraceDelayForm(core, w + xf, df, f.init_values, m, n)
                rule = "vanishing" if xf else "tightening"
        case _:
            return TraceDelayForm(c, 0, 0, (), c.inputs, c.outputs)

    if _hoisted(result):
        steps.record(rule, c, from_trace_delay_form(result), format_locus(locus))
    return result


def _delay_guarded(w: int, body: Circuit) -> Optional[Circuit]:
    """For trace(w, (delay^w ⊗ r) ; g) return (id_w ⊗ r) ; g, the body with the guarding delays removed"""
    if not isinstance(body, Seq):
        return None
    leaves = _par_leaves(body.first)
    widths = 0
    for count, leaf in enumerate(leaves):
        if widths == w:
            rest = leaves[count:]
            break
        if not isinstance(leaf, Delay):
            return None
        widths += 1
    else:
        if widths != w:
            return None
        rest = []
    return Seq(_beside(Id(w), *rest), body.second)


def to_trace_delay_form(c: Circuit) -> tuple[TraceDelayForm, ReductionTrace]:
    steps = ReductionTrace()
    tdf = _tdf(c, (), steps)
    logger.debug("trace-delay form: x=%d d=%d k=%d", tdf.trace_width, tdf.delay_width, tdf.value_width)
    return tdf, steps


def from_trace_delay_form(tdf: TraceDelayForm) -> Circuit:
    x, d = tdf.trace_width, tdf.delay_width
    front = _beside(Id(x), *([Delay()] * d), *(constant(v) for v in tdf.init_values), Id(tdf.inputs))
    return trace(x + d, seq_all([front, tdf.core]))


# Productivity

def _loop(d: int, prefix: Optional[Circuit], body: Circuit) -> Circuit:
    return trace(d, Seq(prefix, body) if prefix is not None else body)


def _loop_locus(d: int, prefix: Optional[Circuit]) -> Locus:
    return ((0,) if d else ()) + ((1,) if prefix is not None else ())


def _cons(values: Circuit, residual: Circuit) -> Circuit:
    """values :: residual, the tick-0 constants joined with the delayed residual"""
    n = residual.outputs
    delayed = seq_all([residual, par_all([Delay()] * n)])
    return seq_all([_beside(values, delayed), pointwise_join(n)])


def productivity_step(c: Circuit, interp: Interpretation, extra_iterations: int = 0) -> ProductivityResult:
    """
    Reduce a closed circuit to its tick-0 values and a residual circuit for the remaining ticks.

    Every recorded step rewrites the whole closed term, or a subterm at the recorded locus,
    into an equivalent one.
    """
    if c.inputs != 0:
        raise NotCombinational(f"productivity needs a closed circuit, got {c.inputs} inputs")
    lattice = interp.lattice
    tdf, steps = to_trace_delay_form(c)
    x, d, k, n = tdf.trace_width, tdf.delay_width, tdf.value_width, tdf.outputs
    constants = [constant(v, interp) for v in tdf.init_values]

    core = tdf.core
    if x:
        core = instant_feedback(Trace(x, tdf.core), lattice.chain_steps, extra_iterations)
        steps.record("instant-feedback", from_trace_delay_form(tdf),
                     trace(d, seq_all([_beside(*([Delay()] * d), *constants), core])))

    if d + k == 0:
        evaluated = extensionality(core, interp, steps)
        steps.record("productivity", core, _cons(par_all([_constant_of(v, interp) for v in evaluated]), core))
        return ProductivityResult(tuple(evaluated), core, steps)

    # delays become ⊥-headed registers, values become registers fed ⊥
    prefix = _beside(Id(d), *([Bot()] * k)) if k else None
    inner = Seq(par_all([register(BOTTOM_SYMBOL)] * d + [register(v, interp) for v in tdf.init_values]), core)
    before = trace(d, seq_all([_beside(*([Delay()] * d), *constants), core]))
    steps.record("register-form", before, _loop(d, prefix, inner))

    streamed = generalised_streaming(inner, interp)
    steps.record("streaming", _loop(d, prefix, inner), _loop(d, prefix, streamed))

    locus = _loop_locus(d, prefix) + (0, 0)
    evaluated = extensionality(subterm_at(streamed, (0, 0)), interp, steps, locus)
    carried, out = evaluated[:d], evaluated[d:]
    heads = [Id(1) if v == lattice.bottom else Seq(Par(Id(1), _constant_of(v, interp)), Join()) for v in carried]
    reduced = replace_at(_loop(d, prefix, streamed), locus, par_all([_constant_of(v, interp) for v in evaluated]))

    # the residual keeps its loop delay-guarded so the next step slides it instead of re-tracing it
    front = _beside(*([Delay()] * d), *([Bot()] * k))
    body = seq_all([front, _beside(par_all(heads) if heads else Id(0), Id(k)), core])
    residual = trace(d, body)
    steps.record("productivity", reduced, _cons(par_all([_constant_of(v, interp) for v in out]), residual))
    logger.debug("productivity step: x=%d d=%d k=%d values=%s", x, d, k, [interp.symbol(v) for v in out])
    return ProductivityResult(tuple(out), residual, steps)


def reduce_stream(c: Circuit, ticks: int, interp: Interpretation,
                  extra_iterations: int = 0) -> tuple[Waveform, ReductionTrace]:
    steps = ReductionTrace()
    outputs = []
    term = c
    for _ in range(ticks):
        result = productivity_step(term, interp, extra_iterations)
        outputs.append(result.values)
        steps.extend(result.trace)
        term = result.residual
    return Waveform(c.outputs, tuple(outputs)), steps


class RewriteService:
    """Service class for axiomatic rewriting"""

    def reduce(self, request: ReduceRequest) -> ReduceResponse:
        try:
            interp = resolve_interpretation(request.lattice, request.interpretation)
            c = parse_circuit(request.circuit, interp)
            waveform, steps = reduce_stream(c, request.ticks, interp, request.extra_iterations)
            return ReduceResponse(
                success=True,
                values=[[interp.symbol(e) for e in tick] for tick in waveform.ticks],
                steps=len(steps),
                trace=steps.format(print_circuit) if request.emit_trace else None,
            )
        except LatcircError as e:
            return ReduceResponse(success=False, error=str(e))
        except Exception as e:
            return ReduceResponse(success=False, error=f"Unexpected error: {str(e)}")

    def trace_delay_form(self, request: CircuitRequest) -> TraceDelayFormResponse:
        try:
            interp = resolve_interpretation(request.lattice, request.interpretation)
            tdf, steps = to_trace_delay_form(parse_circuit(request.circuit, interp))
            return TraceDelayFormResponse(
                success=True,
                trace_width=tdf.trace_width,
                delay_width=tdf.delay_width,
                value_width=tdf.value_width,
                init_values=list(tdf.init_values),
                core=print_circuit(tdf.core),
                rules=steps.rules(),
            )
        except LatcircError as e:
            return TraceDelayFormResponse(success=False, error=str(e))
        except Exception as e:
            return TraceDelayFormResponse(success=False, error=f"Unexpected error: {str(e)}")

    def axiom(self, request: AxiomRequest) -> AxiomResponse:
        try:
            interp = resolve_interpretation(request.lattice, request.interpretation)
            c = parse_circuit(request.circuit, interp)
            redexes = find_redexes(c, request.rule, interp)
            if request.locus is not None:
                locus = parse_locus(request.locus)
            elif redexes:
                locus = redexes[0]
            else:
                raise PatternMismatch(f"{request.rule} matches nowhere in the term", rule=request.rule)
            return AxiomResponse(
                success=True,
                result=print_circuit(apply_axiom(c, request.rule, locus, interp)),
                locus=format_locus(locus),
                redexes=[format_locus(r) for r in redexes],
            )
        except LatcircError as e:
            return AxiomResponse(success=False, error=str(e))
        except Exception as e:
            return AxiomResponse(success=False, error=f"Unexpected error: {str(e)}")
