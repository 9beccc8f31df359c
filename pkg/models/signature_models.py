from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional

from pydantic import BaseModel, Field

from models.lattice_models import Lattice, Point, TupleSpace
from services.errors import UnknownSymbol

BOTTOM_SYMBOL = "B"
TOP_SYMBOL = "T"


@dataclass(frozen=True)
class Signature:
    """Value symbols and (gate symbol, arity) pairs"""
    values: tuple[str, ...]
    gates: tuple[tuple[str, int], ...]

    def arity(self, gate: str) -> int:
        for name, arity in self.gates:
            if name == gate:
                return arity
        raise UnknownSymbol(f"gate '{gate}' is not in the signature", symbol=gate)


@dataclass(frozen=True)
class GateTable:
    """Truth table of one gate, indexed by the input tuple in enumeration order"""
    name: str
    arity: int
    base: int
    outputs: tuple[int, ...]

    def __call__(self, inputs: Point) -> int:
        index = 0
        for element in inputs:
            index = index * self.base + element
        return self.outputs[index]


@dataclass(frozen=True)
class RawInterpretation:
    """An unvalidated interpretation candidate written with lattice element names"""
    lattice: Lattice
    value_map: Mapping[str, str]
    gate_tables: Mapping[str, Mapping[tuple[str, ...], str]]


@dataclass(frozen=True)
class Interpretation:
    signature: Signature
    lattice: Lattice
    values: tuple[tuple[str, int], ...]
    gates: tuple[GateTable, ...]
    _by_value: dict = field(init=False, repr=False, compare=False, hash=False)
    _by_element: dict = field(init=False, repr=False, compare=False, hash=False)
    _by_gate: dict = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        by_value = dict(self.values)
        by_element = {element: symbol for symbol, element in self.values}
        by_element[self.lattice.bottom] = BOTTOM_SYMBOL
        by_element[self.lattice.top] = TOP_SYMBOL
        object.__setattr__(self, "_by_value", by_value)
        object.__setattr__(self, "_by_element", by_element)
        object.__setattr__(self, "_by_gate", {gate.name: gate for gate in self.gates})

    def space(self, width: int) -> TupleSpace:
        return TupleSpace(self.lattice, width)

    def value(self, symbol: str) -> int:
        try:
            return self._by_value[symbol]
        except KeyError:
            raise UnknownSymbol(f"value '{symbol}' is not in the signature", symbol=symbol) from None

    def gate(self, name: str) -> GateTable:
        try:
            return self._by_gate[name]
        except KeyError:
            raise UnknownSymbol(f"gate '{name}' is not interpreted", symbol=name) from None

    def element(self, symbol: str) -> int:
        """Decode a waveform/table symbol: a value symbol, B for ⊥ or T for ⊤"""
        if symbol == BOTTOM_SYMBOL:
            return self.lattice.bottom
        if symbol == TOP_SYMBOL:
            return self.lattice.top
        return self.value(symbol)

    def symbol(self, element: int) -> str:
        return self._by_element[element]

    def format_point(self, point: Point) -> str:
        return ",".join(self.symbol(e) for e in point)


# API models
class GateTableModel(BaseModel):
    """A gate's truth table as rows of symbols"""
    name: str = Field(description="Gate symbol")
    arity: int = Field(description="Number of inputs")
    rows: List[List[str]] = Field(description="Rows: input symbols followed by the output symbol")


class BelnapResponse(BaseModel):
    """Response model for the built-in Belnap interpretation"""
    elements: List[str] = Field(description="Lattice elements in interned order")
    values: Dict[str, str] = Field(description="Value symbol to lattice element")
    gates: List[GateTableModel] = Field(description="Gate truth tables")


class InterpretationCheckRequest(BaseModel):
    """Request model for validating an interpretation file"""
    interpretation: str = Field(..., description="Interpretation file contents")
    lattice: Optional[str] = Field(default=None, description="Lattice file contents; Belnap when absent")


class InterpretationCheckResponse(BaseModel):
    """Response model for interpretation validation"""
    success: bool = Field(description="Whether the interpretation is valid")
    values: List[str] = Field(default_factory=list, description="Validated value symbols")
    gates: Dict[str, int] = Field(default_factory=dict, description="Gate arities")
    chain_steps: Optional[int] = Field(default=None, description="Chain length of the lattice")
    error: Optional[str] = Field(default=None, description="Error message if validation failed")
