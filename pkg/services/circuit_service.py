import logging
import re
from dataclasses import dataclass
from functools import reduce
from pathlib import Path
from typing import Iterator, Optional, Sequence

from models.circuit_models import (
    Bot, Circuit, CircuitDotResponse, CircuitInfoResponse, CircuitRequest, Classification, Delay, Fork, Gate,
    GrammarResponse, Id, Join, Par, Seq, Stub, Swap, Top, Trace, Value, Waveform, WireGraph, WireNode
)
from models.lattice_models import Point
from models.signature_models import BOTTOM_SYMBOL, TOP_SYMBOL, Interpretation
from services.errors import (
    ArityMismatch, CircuitSyntaxError, FileFormatError, LatcircError, PatternMismatch, UnknownSymbol,
    UnknownValue, WidthMismatch
)
from services.signature_service import belnap, resolve_interpretation

logger = logging.getLogger(__name__)

Locus = tuple[int, ...]

GRAMMAR = (
    "expr := id<N> | swap | fork | join | stub | bot | top | val(<sym>) | gate(<sym>) | delay\n"
    "      | reg(<sym>|B|T) | seq(e{,e}+) | par(e{,e}+) | trace<N>(e)\n"
    "whitespace-insensitive; '#' starts a comment"
)


# Constructors

def seq(f: Circuit, g: Circuit) -> Circuit:
    return Seq(f, g)


def par(f: Circuit, g: Circuit) -> Circuit:
    return Par(f, g)


def trace(width: int, f: Circuit) -> Circuit:
    if width == 0:
        return f
    return Trace(width, f)


def seq_all(terms: Sequence[Circuit]) -> Circuit:
    """Sequential composition of a non-empty list, skipping identities, as a balanced tree"""
    if not terms:
        raise ArityMismatch("seq_all needs at least one term")
    for left, right in zip(terms, terms[1:]):
        if left.outputs != right.inputs:
            raise ArityMismatch(f"cannot compose {left.inputs}->{left.outputs} with {right.inputs}->{right.outputs}",
                                left=left.arity, right=right.arity)
    kept = [t for t in terms if not isinstance(t, Id)]
    if not kept:
        return terms[0]
    return _balanced(kept, Seq)


def par_all(terms: Sequence[Circuit]) -> Circuit:
    if not terms:
        return Id(0)
    return _balanced(list(terms), Par)


def _balanced(terms: list[Circuit], combine) -> Circuit:
    if len(terms) == 1:
        return terms[0]
    middle = len(terms) // 2
    return combine(_balanced(terms[:middle], combine), _balanced(terms[middle:], combine))


def constant(symbol: str, interp: Optional[Interpretation] = None) -> Circuit:
    """The generator emitting `symbol` at tick 0: Bot for B, Top for T, a value generator otherwise"""
    if symbol == BOTTOM_SYMBOL:
        return Bot()
    if symbol == TOP_SYMBOL:
        return Top()
    if interp is not None and symbol not in interp.signature.values:
        raise UnknownValue(f"'{symbol}' is not a value of the signature", symbol=symbol)
    return Value(symbol)


def register(symbol: str, interp: Optional[Interpretation] = None) -> Circuit:
    """A flip-flop holding `symbol`: σ ↦ symbol :: σ"""
    return Seq(Par(constant(symbol, interp), Delay()), Join())


def registers(symbols: Sequence[str], interp: Optional[Interpretation] = None) -> Circuit:
    return par_all([register(s, interp) for s in symbols])


def constant_stream(symbol: str, interp: Optional[Interpretation] = None) -> Circuit:
    """Closed loop emitting `symbol` on every tick"""
    return Trace(1, Seq(register(symbol, interp), Fork()))


def waveform_circuit(waveform: Waveform, interp: Interpretation) -> Circuit:
    """Closed circuit replaying `waveform` and emitting ⊥ afterwards"""
    wires = []
    for wire in range(waveform.width):
        symbols = [interp.symbol(tick[wire]) for tick in waveform.ticks]
        while symbols and symbols[-1] == BOTTOM_SYMBOL:
            symbols.pop()
        if not symbols:
            wires.append(Bot())
            continue
        stages = [constant(symbols[-1], interp)]
        stages.extend(register(s, interp) for s in reversed(symbols[:-1]))
        wires.append(seq_all(stages))
    return par_all(wires)


def fanout(k: int) -> Circuit:
    """1 → k copies as a tree of forks"""
    if k == 0:
        return Stub()
    if k == 1:
        return Id(1)
    left = (k + 1) // 2
    return Seq(Fork(), Par(fanout(left), fanout(k - left)))


def permutation(order: Sequence[int]) -> Circuit:
    """Wire permutation whose output j carries input order[j], built from Swap/Id layers"""
    n = len(order)
    if sorted(order) != list(range(n)):
        raise ArityMismatch(f"{list(order)} is not a permutation of {n} wires", order=list(order))
    target = list(order)
    rank = {source: j for j, source in enumerate(target)}
    current = list(range(n))
    layers = []
    parity = 0
    # odd-even transposition sort terminates within n rounds
    while current != target:
        swaps = set()
        for p in range(parity, n - 1, 2):
            if rank[current[p]] > rank[current[p + 1]]:
                current[p], current[p + 1] = current[p + 1], current[p]
                swaps.add(p)
        if swaps:
            layers.append(_swap_layer(n, swaps))
        parity ^= 1
    return seq_all(layers) if layers else Id(n)


def _swap_layer(n: int, swaps: set[int]) -> Circuit:
    pieces: list[Circuit] = []
    run = 0
    p = 0
    while p < n:
        if p in swaps:
            if run:
                pieces.append(Id(run))
                run = 0
            pieces.append(Swap())
            p += 2
        else:
            run += 1
            p += 1
    if run:
        pieces.append(Id(run))
    return par_all(pieces)


def block_permutation(sizes: Sequence[int], order: Sequence[int]) -> Circuit:
    """Move whole buses: output block j is input block order[j]"""
    offsets = [0]
    for size in sizes:
        offsets.append(offsets[-1] + size)
    return permutation([offsets[b] + i for b in order for i in range(sizes[b])])


def diagonal(n: int) -> Circuit:
    """n → 2n copy: one fork per wire, then the copies regrouped"""
    if n == 0:
        return Id(0)
    if n == 1:
        return Fork()
    regroup = [2 * i for i in range(n)] + [2 * i + 1 for i in range(n)]
    return Seq(par_all([Fork()] * n), permutation(regroup))


def discard(n: int) -> Circuit:
    return par_all([Stub()] * n)


def pointwise_join(n: int) -> Circuit:
    """2n → n with output i the join of inputs i and n+i"""
    if n == 0:
        return Id(0)
    interleave = [k for i in range(n) for k in (i, n + i)]
    return seq_all([permutation(interleave), par_all([Join()] * n)])


# Inspection

def children(c: Circuit) -> tuple[Circuit, ...]:
    match c:
        case Seq(first, second):
            return first, second
        case Par(top, bottom):
            return top, bottom
        case Trace(_, body):
            return (body,)
    return ()


def rebuild(c: Circuit, kids: Sequence[Circuit]) -> Circuit:
    match c:
        case Seq():
            return Seq(kids[0], kids[1])
        case Par():
            return Par(kids[0], kids[1])
        case Trace(width, _):
            return Trace(width, kids[0])
    return c


def walk(c: Circuit) -> Iterator[tuple[Locus, Circuit]]:
    """Pre-order traversal yielding (locus, subterm)"""
    stack: list[tuple[Locus, Circuit]] = [((), c)]
    while stack:
        locus, term = stack.pop()
        yield locus, term
        kids = children(term)
        for i in reversed(range(len(kids))):
            stack.append((locus + (i,), kids[i]))


def subterm_at(c: Circuit, locus: Locus) -> Circuit:
    term = c
    for step in locus:
        kids = children(term)
        if step >= len(kids):
            raise PatternMismatch(f"no subterm at locus {format_locus(locus)}", locus=locus)
        term = kids[step]
    return term


def replace_at(c: Circuit, locus: Locus, replacement: Circuit) -> Circuit:
    if not locus:
        if replacement.arity != c.arity:
            raise ArityMismatch(f"replacement has type {replacement.inputs}->{replacement.outputs}, "
                                f"expected {c.inputs}->{c.outputs}")
        return replacement
    kids = list(children(c))
    if locus[0] >= len(kids):
        raise PatternMismatch(f"no subterm at locus {format_locus(locus)}", locus=locus)
    kids[locus[0]] = replace_at(kids[locus[0]], locus[1:], replacement)
    return rebuild(c, kids)


def format_locus(locus: Locus) -> str:
    return ".".join(str(i) for i in locus) if locus else "root"


def parse_locus(text: str) -> Locus:
    text = text.strip()
    if text in ("", "root"):
        return ()
    try:
        return tuple(int(part) for part in text.split("."))
    except ValueError:
        raise PatternMismatch(f"malformed locus '{text}'") from None


def node_counts(c: Circuit) -> dict[str, int]:
    counts = {"gates": 0, "delays": 0, "values": 0, "bots": 0, "traces": 0}
    for _, term in walk(c):
        match term:
            case Gate():
                counts["gates"] += 1
            case Delay():
                counts["delays"] += 1
            case Value() | Top():
                counts["values"] += 1
            case Bot():
                counts["bots"] += 1
            case Trace():
                counts["traces"] += 1
    return counts


def classify(c: Circuit) -> Classification:
    counts = node_counts(c)
    if counts["traces"]:
        kind = "sequential"
    elif counts["delays"]:
        kind = "temporal"
    else:
        kind = "combinational"
    return Classification(kind=kind, closed=c.inputs == 0, passive=counts["values"] == 0)


def is_combinational(c: Circuit) -> bool:
    return all(not isinstance(t, (Delay, Trace)) for _, t in walk(c))


def is_passive(c: Circuit) -> bool:
    return all(not isinstance(t, (Value, Top)) for _, t in walk(c))


# Wire graphs

class _WireBuilder:
    def __init__(self):
        self.parent: list[int] = []
        self.nodes: list[tuple[str, str, list[int], list[int]]] = []

    def wire(self) -> int:
        self.parent.append(len(self.parent))
        return len(self.parent) - 1

    def find(self, w: int) -> int:
        while self.parent[w] != w:
            self.parent[w] = self.parent[self.parent[w]]
            w = self.parent[w]
        return w

    def union(self, a: int, b: int):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[rb] = ra

    def node(self, kind: str, label: str, ins: list[int], n_out: int) -> list[int]:
        outs = [self.wire() for _ in range(n_out)]
        self.nodes.append((kind, label, ins, outs))
        return outs

    def build(self, term: Circuit, ins: list[int]) -> list[int]:
        match term:
            case Value(symbol):
                return self.node("value", symbol, ins, 1)
            case Bot():
                return self.node("bot", BOTTOM_SYMBOL, ins, 1)
            case Top():
                return self.node("top", TOP_SYMBOL, ins, 1)
            case Gate(symbol, _):
                return self.node("gate", symbol, ins, 1)
            case Fork():
                return self.node("fork", "fork", ins, 2)
            case Join():
                return self.node("join", "join", ins, 1)
            case Stub():
                return self.node("stub", "stub", ins, 0)
            case Delay():
                return self.node("delay", "delay", ins, 1)
            case Id():
                return ins
            case Swap():
                return [ins[1], ins[0]]
            case Seq(first, second):
                return self.build(second, self.build(first, ins))
            case Par(top, bottom):
                return self.build(top, ins[:top.inputs]) + self.build(bottom, ins[top.inputs:])
            case Trace(width, body):
                feedback = [self.wire() for _ in range(width)]
                outs = self.build(body, feedback + ins)
                for out, back in zip(outs[:width], feedback):
                    self.union(out, back)
                return outs[width:]
        raise ArityMismatch(f"unknown circuit node {term!r}")


def flatten(c: Circuit) -> WireGraph:
    """Generator instances over union-find merged wires; trace feedback wires are identified with their sources"""
    builder = _WireBuilder()
    inputs = [builder.wire() for _ in range(c.inputs)]
    outputs = builder.build(c, inputs)

    dense: dict[int, int] = {}

    def canon(w: int) -> int:
        return dense.setdefault(builder.find(w), len(dense))

    ports_in = tuple(canon(w) for w in inputs)
    nodes = tuple(WireNode(kind, label, tuple(canon(w) for w in ins), tuple(canon(w) for w in outs))
                  for kind, label, ins, outs in builder.nodes)
    ports_out = tuple(canon(w) for w in outputs)
    logger.debug("flattened %d->%d term into %d nodes over %d wires", c.inputs, c.outputs, len(nodes), len(dense))
    return WireGraph(len(dense), nodes, ports_in, ports_out)


def dependencies(c: Circuit, through_delays: bool = False) -> tuple[frozenset[int], ...]:
    """For every output, the inputs that reach it; paths through delays count only if asked"""
    graph = flatten(c)
    readers: dict[int, list[WireNode]] = {}
    for node in graph.nodes:
        if node.kind == "delay" and not through_delays:
            continue
        for w in node.inputs:
            readers.setdefault(w, []).append(node)

    reach: list[set[int]] = []
    for source in graph.inputs:
        seen = {source}
        frontier = [source]
        while frontier:
            w = frontier.pop()
            for node in readers.get(w, ()):
                for out in node.outputs:
                    if out not in seen:
                        seen.add(out)
                        frontier.append(out)
        reach.append(seen)
    return tuple(frozenset(i for i, seen in enumerate(reach) if w in seen) for w in graph.outputs)


def has_instant_feedback(c: Circuit) -> bool:
    """Whether some trace closes a cycle that no delay cuts"""
    for _, term in walk(c):
        if not isinstance(term, Trace):
            continue
        width = term.width
        deps = dependencies(term.body)
        reach = [set(i for i in deps[j] if i < width) for j in range(width)]
        changed = True
        while changed:
            changed = False
            for j in range(width):
                extended = set().union(*(reach[i] for i in reach[j])) | reach[j]
                if extended != reach[j]:
                    reach[j] = extended
                    changed = True
        if any(j in reach[j] for j in range(width)):
            return True
    return False


# DSL

_TOKEN = re.compile(r"(?P<space>\s+)|(?P<comment>#[^\n]*)|(?P<punct>[(),])|(?P<word>[^\s(),#]+)")
_INDEXED = re.compile(r"(id|trace)(\d+)")
_NULLARY = {"swap": Swap, "fork": Fork, "join": Join, "stub": Stub, "bot": Bot, "top": Top, "delay": Delay}


@dataclass(frozen=True)
class _Token:
    text: str
    line: int
    column: int


class _Parser:
    def __init__(self, text: str, interp: Interpretation):
        self.interp = interp
        self.tokens: list[_Token] = []
        line, line_start = 1, 0
        for match in _TOKEN.finditer(text):
            if match.lastgroup in ("punct", "word"):
                self.tokens.append(_Token(match.group(), line, match.start() - line_start + 1))
            newlines = match.group().count("\n")
            if newlines:
                line += newlines
                line_start = match.start() + match.group().rindex("\n") + 1
        self.end = _Token("", line, len(text) - line_start + 1)
        self.pos = 0

    def peek(self) -> _Token:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else self.end

    def take(self, expected: Optional[str] = None) -> _Token:
        token = self.peek()
        if token is self.end:
            raise CircuitSyntaxError(f"unexpected end of input{f', expected {expected!r}' if expected else ''}",
                                     token.line, token.column)
        if expected is not None and token.text != expected:
            raise CircuitSyntaxError(f"expected '{expected}', found '{token.text}'", token.line, token.column)
        self.pos += 1
        return token

    def word(self) -> _Token:
        token = self.take()
        if token.text in "(),":
            raise CircuitSyntaxError(f"expected a name, found '{token.text}'", token.line, token.column)
        return token

    def argument(self) -> str:
        self.take("(")
        symbol = self.word().text
        self.take(")")
        return symbol

    def expr(self) -> Circuit:
        token = self.word()
        name = token.text
        try:
            return self._expr(token, name)
        except (ArityMismatch, UnknownSymbol, UnknownValue) as e:
            if "line" in e.details:
                raise
            raise type(e)(f"{e.message} at line {token.line}, column {token.column}",
                          **e.details, line=token.line, column=token.column) from None

    def _expr(self, token: _Token, name: str) -> Circuit:
        if name in _NULLARY:
            return _NULLARY[name]()
        indexed = _INDEXED.fullmatch(name)
        if indexed and indexed.group(1) == "id":
            return Id(int(indexed.group(2)))
        if indexed:
            self.take("(")
            body = self.expr()
            self.take(")")
            return Trace(int(indexed.group(2)), body)
        if name == "val":
            symbol = self.argument()
            if symbol not in self.interp.signature.values:
                raise UnknownValue(f"'{symbol}' is not a value of the signature", symbol=symbol)
            return Value(symbol)
        if name == "gate":
            symbol = self.argument()
            return Gate(symbol, self.interp.signature.arity(symbol))
        if name == "reg":
            return register(self.argument(), self.interp)
        if name in ("seq", "par"):
            self.take("(")
            operands = [self.expr()]
            while self.peek().text == ",":
                self.take(",")
                operands.append(self.expr())
            self.take(")")
            if len(operands) < 2:
                raise CircuitSyntaxError(f"{name} needs at least two operands", token.line, token.column)
            return reduce(Seq if name == "seq" else Par, operands)
        raise CircuitSyntaxError(f"unknown keyword '{name}'", token.line, token.column)


def parse_circuit(text: str, interp: Optional[Interpretation] = None) -> Circuit:
    parser = _Parser(text, interp or belnap())
    term = parser.expr()
    if parser.peek() is not parser.end:
        token = parser.peek()
        raise CircuitSyntaxError(f"trailing input '{token.text}'", token.line, token.column)
    return term


def load_circuit(path: str, interp: Optional[Interpretation] = None) -> Circuit:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise FileFormatError(f"cannot read circuit file {path}: {e}") from e
    return parse_circuit(text, interp)


def _register_symbol(c: Circuit) -> Optional[str]:
    match c:
        case Seq(Par(Value(symbol), Delay()), Join()):
            return symbol
        case Seq(Par(Bot(), Delay()), Join()):
            return BOTTOM_SYMBOL
        case Seq(Par(Top(), Delay()), Join()):
            return TOP_SYMBOL
    return None


def print_circuit(c: Circuit) -> str:
    """Canonical DSL text; left-nested seq/par chains print flat and register shapes print as reg(...)"""
    symbol = _register_symbol(c)
    if symbol is not None:
        return f"reg({symbol})"
    match c:
        case Value(symbol):
            return f"val({symbol})"
        case Gate(symbol, _):
            return f"gate({symbol})"
        case Id(width):
            return f"id{width}"
        case Trace(width, body):
            return f"trace{width}({print_circuit(body)})"
        case Seq() | Par():
            kind = type(c)
            operands = []
            while isinstance(c, kind) and _register_symbol(c) is None:
                operands.append(children(c)[1])
                c = children(c)[0]
            operands.append(c)
            name = "seq" if kind is Seq else "par"
            return f"{name}({', '.join(print_circuit(t) for t in reversed(operands))})"
    return type(c).__name__.lower()


def to_dot(c: Circuit) -> str:
    graph = flatten(c)
    lines = ["digraph circuit {", "  rankdir=LR;"]
    driver: dict[int, str] = {}
    readers: dict[int, list[str]] = {}
    for i, w in enumerate(graph.inputs):
        lines.append(f'  in{i} [shape=circle, label="in{i}"];')
        driver.setdefault(w, f"in{i}")
    for k, node in enumerate(graph.nodes):
        shape = {"delay": "box3d", "gate": "box", "fork": "point", "join": "invtriangle"}.get(node.kind, "ellipse")
        lines.append(f'  n{k} [shape={shape}, label="{node.label}"];')
        for w in node.outputs:
            driver[w] = f"n{k}"
        for w in node.inputs:
            readers.setdefault(w, []).append(f"n{k}")
    for j, w in enumerate(graph.outputs):
        lines.append(f'  out{j} [shape=doublecircle, label="out{j}"];')
        readers.setdefault(w, []).append(f"out{j}")
    undriven = [w for w in readers if w not in driver]
    if undriven:
        lines.append(f'  undriven [shape=plaintext, label="{BOTTOM_SYMBOL}"];')
    for w in sorted(readers):
        for reader in readers[w]:
            lines.append(f'  {driver.get(w, "undriven")} -> {reader} [label="w{w}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


# Waveforms

def parse_waveform(text: str, interp: Interpretation, width: Optional[int] = None) -> Waveform:
    """One tick per line, comma-separated symbols; B and T stand for ⊥ and ⊤"""
    ticks: list[Point] = []
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            tick = tuple(interp.element(s.strip()) for s in line.split(","))
        except UnknownSymbol as e:
            raise FileFormatError(f"line {number}: {e.message}", line=number) from None
        if width is None:
            width = len(tick)
        if len(tick) != width:
            raise WidthMismatch(f"line {number}: tick has {len(tick)} entries, expected {width}",
                                line=number, expected=width, actual=len(tick))
        ticks.append(tick)
    return Waveform(width or 0, tuple(ticks))


def load_waveform(path: str, interp: Interpretation, width: Optional[int] = None) -> Waveform:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise FileFormatError(f"cannot read waveform file {path}: {e}") from e
    return parse_waveform(text, interp, width)


def format_waveform(waveform: Waveform, interp: Interpretation) -> str:
    return "".join(interp.format_point(tick) + "\n" for tick in waveform.ticks)


class CircuitService:
    """Service class for circuit term operations"""

    @staticmethod
    def _describe(c: Circuit) -> CircuitInfoResponse:
        return CircuitInfoResponse(
            success=True,
            inputs=c.inputs,
            outputs=c.outputs,
            classification=str(classify(c)),
            canonical=print_circuit(c),
            node_counts=node_counts(c),
            instant_feedback=has_instant_feedback(c),
        )

    def parse(self, request: CircuitRequest) -> CircuitInfoResponse:
        try:
            interp = resolve_interpretation(request.lattice, request.interpretation)
            return self._describe(parse_circuit(request.circuit, interp))
        except LatcircError as e:
            return CircuitInfoResponse(success=False, error=str(e))
        except Exception as e:
            return CircuitInfoResponse(success=False, error=f"Unexpected error: {str(e)}")

    def parse_upload(self, content: bytes) -> CircuitInfoResponse:
        try:
            return self._describe(parse_circuit(content.decode("utf-8")))
        except UnicodeDecodeError:
            return CircuitInfoResponse(success=False, error="FileFormatError: circuit file is not UTF-8 text")
        except LatcircError as e:
            return CircuitInfoResponse(success=False, error=str(e))
        except Exception as e:
            return CircuitInfoResponse(success=False, error=f"Unexpected error: {str(e)}")

    def dot(self, request: CircuitRequest) -> CircuitDotResponse:
        try:
            interp = resolve_interpretation(request.lattice, request.interpretation)
            return CircuitDotResponse(success=True, dot=to_dot(parse_circuit(request.circuit, interp)))
        except LatcircError as e:
            return CircuitDotResponse(success=False, error=str(e))
        except Exception as e:
            return CircuitDotResponse(success=False, error=f"Unexpected error: {str(e)}")

    def grammar(self) -> GrammarResponse:
        return GrammarResponse(
            grammar=GRAMMAR,
            generators=["id<N>", "swap", "fork", "join", "stub", "bot", "top", "val", "gate", "delay", "reg"],
            combinators=["seq", "par", "trace<N>"],
        )
