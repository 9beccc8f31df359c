import logging
from functools import lru_cache
from pathlib import Path
from typing import Optional

from models.lattice_models import FunctionTable, Lattice, TupleSpace
from models.signature_models import (
    BOTTOM_SYMBOL, TOP_SYMBOL, BelnapResponse, GateTable, GateTableModel, Interpretation,
    InterpretationCheckRequest, InterpretationCheckResponse, RawInterpretation, Signature
)
from services.errors import (
    ArityMismatch, FileFormatError, GateNotBottomPreserving, GateNotMonotone, IncompleteGateTable,
    LatcircError, UnknownSymbol, ValueMapNotBijective
)
from services.lattice_service import belnap_lattice, check_monotone, parse_lattice

logger = logging.getLogger(__name__)

# Truth tables in the row/column order ⊥, f, t, ⊤.
_TABLE_ORDER = ("B", "f", "t", "T")
_AND_ROWS = ("B f B f", "f f f f", "B f t T", "f f T T")
_OR_ROWS = ("B B t t", "B f t T", "t t t t", "t T t T")
_NOT_ROW = "B t f T"


def validate_interpretation(signature: Signature, raw: RawInterpretation) -> Interpretation:
    lattice = raw.lattice
    inner = {i for i in range(lattice.size) if i not in (lattice.bottom, lattice.top)}

    if set(raw.value_map) != set(signature.values):
        missing = sorted(set(signature.values) - set(raw.value_map))
        extra = sorted(set(raw.value_map) - set(signature.values))
        raise ValueMapNotBijective(f"value map must cover exactly the signature values (missing {missing}, extra {extra})",
                                   missing=missing, extra=extra)
    values = tuple((symbol, lattice.index(raw.value_map[symbol])) for symbol in signature.values)
    images = [element for _, element in values]
    if len(set(images)) != len(images) or set(images) != inner:
        raise ValueMapNotBijective("value map is not a bijection onto the elements strictly between ⊥ and ⊤",
                                   images=[lattice.symbol(e) for e in images])

    declared = {name for name, _ in signature.gates}
    for name in raw.gate_tables:
        if name not in declared:
            raise UnknownSymbol(f"table given for undeclared gate '{name}'", symbol=name)

    gates = []
    for name, arity in signature.gates:
        if arity == 0:
            raise ArityMismatch(f"gate '{name}' has arity 0; use the ⊥ generator instead", gate=name, arity=0)
        rows = raw.gate_tables.get(name)
        if rows is None:
            raise IncompleteGateTable(f"no table for gate '{name}'", gate=name)
        space = TupleSpace(lattice, arity)
        outputs: dict[int, int] = {}
        for inputs, output in rows.items():
            if len(inputs) != arity:
                raise ArityMismatch(f"gate '{name}' has arity {arity} but a row has {len(inputs)} inputs",
                                    gate=name, expected=arity, actual=len(inputs))
            outputs[space.index(tuple(lattice.index(e) for e in inputs))] = lattice.index(output)
        if len(outputs) != space.size:
            raise IncompleteGateTable(f"table for gate '{name}' has {len(outputs)} of {space.size} rows",
                                      gate=name)
        table = GateTable(name, arity, lattice.size, tuple(outputs[i] for i in range(space.size)))

        if table(space.bottom) != lattice.bottom:
            raise GateNotBottomPreserving(f"gate '{name}' does not map the all-⊥ input to ⊥", gate=name)
        verdict = check_monotone(FunctionTable(space, TupleSpace(lattice, 1),
                                               tuple((out,) for out in table.outputs)))
        if not verdict:
            low, high = verdict.witness
            raise GateNotMonotone(
                f"gate '{name}' is not monotone: "
                f"({','.join(lattice.symbol(e) for e in low)}) <= ({','.join(lattice.symbol(e) for e in high)})",
                gate=name, witness=verdict.witness)
        gates.append(table)

    logger.debug("validated interpretation with %d values and %d gates", len(values), len(gates))
    return Interpretation(signature, lattice, values, tuple(gates))


@lru_cache(maxsize=None)
def builtin_belnap() -> tuple[Signature, Interpretation]:
    signature = Signature(values=("t", "f"), gates=(("AND", 2), ("OR", 2), ("NOT", 1)))

    def binary(rows: tuple[str, ...]) -> dict[tuple[str, ...], str]:
        return {(a, b): out
                for a, row in zip(_TABLE_ORDER, rows)
                for b, out in zip(_TABLE_ORDER, row.split())}

    raw = RawInterpretation(
        lattice=belnap_lattice(),
        value_map={"t": "t", "f": "f"},
        gate_tables={
            "AND": binary(_AND_ROWS),
            "OR": binary(_OR_ROWS),
            "NOT": {(a,): out for a, out in zip(_TABLE_ORDER, _NOT_ROW.split())},
        },
    )
    return signature, validate_interpretation(signature, raw)


def belnap() -> Interpretation:
    return builtin_belnap()[1]


def parse_interpretation(text: str, lattice: Optional[Lattice] = None) -> Interpretation:
    """Parse the `values:`/`gates:`/`map:`/`table <gate>:` file format and validate it"""
    lattice = lattice or belnap_lattice()
    values: list[str] = []
    gates: list[tuple[str, int]] = []
    mapping: dict[str, str] = {}
    tables: dict[str, dict[tuple[str, ...], str]] = {}
    current: Optional[str] = None

    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("values:"):
            values.extend(v.strip() for v in line[len("values:"):].split(",") if v.strip())
            current = None
        elif line.startswith("gates:"):
            for item in line[len("gates:"):].split(","):
                name, _, arity = item.strip().partition("/")
                if not name or not arity.strip().isdigit():
                    raise FileFormatError(f"line {number}: gate must be written NAME/ARITY", line=number)
                gates.append((name.strip(), int(arity)))
            current = None
        elif line.startswith("map:"):
            for item in line[len("map:"):].split(","):
                symbol, _, element = item.strip().partition("=")
                if not symbol or not element:
                    raise FileFormatError(f"line {number}: map entries are written symbol=element", line=number)
                mapping[symbol.strip()] = element.strip()
            current = None
        elif line.startswith("table"):
            current = line[len("table"):].rstrip(":").strip()
            if not current:
                raise FileFormatError(f"line {number}: table header needs a gate name", line=number)
            tables.setdefault(current, {})
        elif "->" in line:
            if current is None:
                raise FileFormatError(f"line {number}: table row outside a table section", line=number)
            inputs, _, output = line.partition("->")
            tables[current][tuple(s.strip() for s in inputs.split(","))] = output.strip()
        else:
            raise FileFormatError(f"line {number}: unrecognised line '{line}'", line=number)

    if not mapping:
        mapping = {symbol: symbol for symbol in values}

    def element_name(symbol: str) -> str:
        if symbol == BOTTOM_SYMBOL:
            return lattice.symbol(lattice.bottom)
        if symbol == TOP_SYMBOL:
            return lattice.symbol(lattice.top)
        if symbol not in mapping:
            raise UnknownSymbol(f"table symbol '{symbol}' is neither a value nor B/T", symbol=symbol)
        return mapping[symbol]

    raw_interp = RawInterpretation(
        lattice=lattice,
        value_map=mapping,
        gate_tables={
            gate: {tuple(element_name(s) for s in inputs): element_name(out) for inputs, out in rows.items()}
            for gate, rows in tables.items()
        },
    )
    return validate_interpretation(Signature(tuple(values), tuple(gates)), raw_interp)


def load_interpretation(path: str, lattice: Optional[Lattice] = None) -> Interpretation:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise FileFormatError(f"cannot read interpretation file {path}: {e}") from e
    return parse_interpretation(text, lattice)


def resolve_interpretation(lattice_text: Optional[str] = None, interp_text: Optional[str] = None) -> Interpretation:
    """Belnap unless a lattice and/or interpretation text is given"""
    if lattice_text is None and interp_text is None:
        return belnap()
    lattice = parse_lattice(lattice_text) if lattice_text is not None else belnap_lattice()
    if interp_text is None:
        raise FileFormatError("a custom lattice needs an interpretation file")
    return parse_interpretation(interp_text, lattice)


class InterpretationService:
    """Service class for signature and interpretation operations"""

    @staticmethod
    def _table_model(interp: Interpretation, gate: GateTable) -> GateTableModel:
        space = interp.space(gate.arity)
        rows = [[interp.symbol(e) for e in point] + [interp.symbol(out)]
                for point, out in zip(space.points(), gate.outputs)]
        return GateTableModel(name=gate.name, arity=gate.arity, rows=rows)

    def belnap(self) -> BelnapResponse:
        interp = belnap()
        return BelnapResponse(
            elements=list(interp.lattice.elements),
            values={symbol: interp.lattice.symbol(e) for symbol, e in interp.values},
            gates=[self._table_model(interp, gate) for gate in interp.gates],
        )

    def check(self, request: InterpretationCheckRequest) -> InterpretationCheckResponse:
        try:
            lattice = parse_lattice(request.lattice) if request.lattice else belnap_lattice()
            interp = parse_interpretation(request.interpretation, lattice)
            return InterpretationCheckResponse(
                success=True,
                values=list(interp.signature.values),
                gates=dict(interp.signature.gates),
                chain_steps=lattice.chain_steps,
            )
        except LatcircError as e:
            return InterpretationCheckResponse(success=False, error=str(e))
        except Exception as e:
            return InterpretationCheckResponse(success=False, error=f"Unexpected error: {str(e)}")
