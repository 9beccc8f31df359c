from dataclasses import dataclass, field
from typing import Dict, List, Optional

from pydantic import BaseModel, Field

from models.lattice_models import Point
from services.errors import ArityMismatch, WidthMismatch


class Circuit:
    """A circuit term. Every node knows its input and output arity."""
    __slots__ = ()

    inputs: int
    outputs: int

    @property
    def arity(self) -> tuple[int, int]:
        return self.inputs, self.outputs


# Generators

@dataclass(frozen=True, slots=True)
class Value(Circuit):
    symbol: str
    inputs = 0
    outputs = 1


@dataclass(frozen=True, slots=True)
class Bot(Circuit):
    inputs = 0
    outputs = 1


@dataclass(frozen=True, slots=True)
class Top(Circuit):
    inputs = 0
    outputs = 1


@dataclass(frozen=True, slots=True)
class Gate(Circuit):
    symbol: str
    width: int

    @property
    def inputs(self) -> int:
        return self.width

    outputs = 1


@dataclass(frozen=True, slots=True)
class Fork(Circuit):
    inputs = 1
    outputs = 2


@dataclass(frozen=True, slots=True)
class Join(Circuit):
    inputs = 2
    outputs = 1


@dataclass(frozen=True, slots=True)
class Stub(Circuit):
    inputs = 1
    outputs = 0


@dataclass(frozen=True, slots=True)
class Delay(Circuit):
    inputs = 1
    outputs = 1


@dataclass(frozen=True, slots=True)
class Id(Circuit):
    width: int

    @property
    def inputs(self) -> int:
        return self.width

    @property
    def outputs(self) -> int:
        return self.width


@dataclass(frozen=True, slots=True)
class Swap(Circuit):
    inputs = 2
    outputs = 2


# Combinators

@dataclass(frozen=True, slots=True)
class Seq(Circuit):
    first: Circuit
    second: Circuit
    inputs: int = field(init=False, repr=False, compare=False)
    outputs: int = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.first.outputs != self.second.inputs:
            raise ArityMismatch(
                f"cannot compose {self.first.inputs}->{self.first.outputs} "
                f"with {self.second.inputs}->{self.second.outputs}",
                left=self.first.arity, right=self.second.arity)
        object.__setattr__(self, "inputs", self.first.inputs)
        object.__setattr__(self, "outputs", self.second.outputs)


@dataclass(frozen=True, slots=True)
class Par(Circuit):
    top: Circuit
    bottom: Circuit
    inputs: int = field(init=False, repr=False, compare=False)
    outputs: int = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "inputs", self.top.inputs + self.bottom.inputs)
        object.__setattr__(self, "outputs", self.top.outputs + self.bottom.outputs)


@dataclass(frozen=True, slots=True)
class Trace(Circuit):
    width: int
    body: Circuit
    inputs: int = field(init=False, repr=False, compare=False)
    outputs: int = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.width < 0 or self.body.inputs < self.width or self.body.outputs < self.width:
            raise ArityMismatch(
                f"cannot trace {self.width} wires of a {self.body.inputs}->{self.body.outputs} term",
                width=self.width, body=self.body.arity)
        object.__setattr__(self, "inputs", self.body.inputs - self.width)
        object.__setattr__(self, "outputs", self.body.outputs - self.width)


GENERATORS = (Value, Bot, Top, Gate, Fork, Join, Stub, Delay, Id, Swap)


@dataclass(frozen=True)
class Waveform:
    """A finite prefix of a stream of width-tuples; ticks beyond the prefix read as ⊥"""
    width: int
    ticks: tuple[Point, ...] = ()

    def __post_init__(self):
        for k, tick in enumerate(self.ticks):
            if len(tick) != self.width:
                raise WidthMismatch(f"tick {k} has {len(tick)} entries, expected {self.width}",
                                    tick=k, expected=self.width, actual=len(tick))

    def __len__(self) -> int:
        return len(self.ticks)

    def at(self, k: int, bottom: int) -> Point:
        return self.ticks[k] if k < len(self.ticks) else (bottom,) * self.width


@dataclass(frozen=True)
class Classification:
    kind: str  # combinational, temporal or sequential
    closed: bool
    passive: bool

    def __str__(self) -> str:
        return f"{self.kind}, {'closed' if self.closed else 'open'}, {'passive' if self.passive else 'valued'}"


@dataclass(frozen=True)
class WireNode:
    """A generator instance in a flattened circuit"""
    kind: str
    label: str
    inputs: tuple[int, ...]
    outputs: tuple[int, ...]


@dataclass(frozen=True)
class WireGraph:
    """A circuit flattened to generator instances over numbered wires, in traversal order"""
    wires: int
    nodes: tuple[WireNode, ...]
    inputs: tuple[int, ...]
    outputs: tuple[int, ...]


# API models
class CircuitRequest(BaseModel):
    """Request model carrying a circuit in the term DSL"""
    circuit: str = Field(..., description="Circuit term, e.g. trace1(seq(fork, gate(AND), fork))")
    interpretation: Optional[str] = Field(default=None, description="Interpretation file contents; Belnap when absent")
    lattice: Optional[str] = Field(default=None, description="Lattice file contents; Belnap when absent")


class CircuitInfoResponse(BaseModel):
    """Response model for circuit parsing"""
    success: bool = Field(description="Whether the circuit parsed and type-checked")
    inputs: Optional[int] = Field(default=None, description="Input arity")
    outputs: Optional[int] = Field(default=None, description="Output arity")
    classification: Optional[str] = Field(default=None, description="e.g. 'sequential, open, passive'")
    canonical: Optional[str] = Field(default=None, description="Canonical printing of the term")
    node_counts: Dict[str, int] = Field(default_factory=dict, description="Gates, delays, values and traces")
    instant_feedback: Optional[bool] = Field(default=None, description="Whether some trace closes a delay-free cycle")
    error: Optional[str] = Field(default=None, description="Error message if parsing failed")


class CircuitDotResponse(BaseModel):
    """Response model for Graphviz export"""
    success: bool = Field(description="Whether the export succeeded")
    dot: Optional[str] = Field(default=None, description="Graphviz digraph source")
    error: Optional[str] = Field(default=None, description="Error message if export failed")


class GrammarResponse(BaseModel):
    """The circuit DSL grammar"""
    grammar: str = Field(description="Grammar in EBNF-like notation")
    generators: List[str] = Field(description="Generator keywords")
    combinators: List[str] = Field(description="Combinator keywords")
