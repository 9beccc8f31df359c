from dataclasses import dataclass, field
from typing import Callable, List, Mapping, Optional, Union

from pydantic import BaseModel, Field

from models.circuit_models import Waveform
from models.lattice_models import FunctionTable, Lattice, Point, SampledFunction

MonotoneMap = Union[FunctionTable, SampledFunction]


@dataclass(frozen=True)
class MealyMachine:
    """A Mealy machine with opaque state labels over the full input alphabet V^m"""
    lattice: Lattice
    inputs: int
    outputs: int
    states: tuple[str, ...]
    initial: str
    transitions: Mapping[tuple[str, Point], tuple[str, Point]] = field(compare=False)
    # original state tuples when the machine was explored from an I-Mealy machine
    metadata: Mapping[str, Point] = field(default_factory=dict, compare=False)

    def step(self, state: str, inputs: Point) -> tuple[str, Point]:
        return self.transitions[(state, inputs)]


@dataclass(frozen=True)
class IMealyMachine:
    """
    A Mealy machine whose state space is V^s and whose transition and output functions are
    monotone. `combined` maps state ++ input to (next state, output) in one evaluation.
    """
    lattice: Lattice
    state_width: int
    inputs: int
    outputs: int
    initial: Point
    combined: Callable[[Point], tuple[Point, Point]] = field(compare=False)
    transition: Optional[MonotoneMap] = field(default=None, compare=False)
    output: Optional[MonotoneMap] = field(default=None, compare=False)

    def step(self, state: Point, inputs: Point) -> tuple[Point, Point]:
        return self.combined(state + inputs)


Machine = Union[MealyMachine, IMealyMachine]


@dataclass(frozen=True)
class BisimulationVerdict:
    bisimilar: bool
    relation: frozenset = frozenset()
    counterexample: Optional[Waveform] = None
    left_output: Optional[Point] = None
    right_output: Optional[Point] = None

    def __bool__(self) -> bool:
        return self.bisimilar


# API models
class MealyFromCircuitRequest(BaseModel):
    """Request model for translating a circuit into a Mealy machine"""
    circuit: str = Field(..., description="Circuit term")
    minimize: bool = Field(default=False, description="Minimize the reachable machine")
    interpretation: Optional[str] = Field(default=None, description="Interpretation file contents; Belnap when absent")
    lattice: Optional[str] = Field(default=None, description="Lattice file contents; Belnap when absent")


class MealyResponse(BaseModel):
    """Response model carrying a machine in the Mealy text format"""
    success: bool = Field(description="Whether the translation succeeded")
    machine: Optional[str] = Field(default=None, description="Machine in the Mealy text format")
    states: Optional[int] = Field(default=None, description="Number of states")
    state_width: Optional[int] = Field(default=None, description="Width of the register state space")
    error: Optional[str] = Field(default=None, description="Error message if the translation failed")


class MealyToCircuitRequest(BaseModel):
    """Request model for translating a machine into a circuit"""
    machine: str = Field(..., description="Machine in the mealy or imealy text format")
    derivative_budget: int = Field(default=4096, gt=0, description="Largest number of residuals explored")
    interpretation: Optional[str] = Field(default=None, description="Interpretation file contents; Belnap when absent")
    lattice: Optional[str] = Field(default=None, description="Lattice file contents; Belnap when absent")


class CircuitTextResponse(BaseModel):
    """Response model carrying a circuit term"""
    success: bool = Field(description="Whether the translation succeeded")
    circuit: Optional[str] = Field(default=None, description="Circuit term in the DSL")
    inputs: Optional[int] = Field(default=None, description="Input arity")
    outputs: Optional[int] = Field(default=None, description="Output arity")
    error: Optional[str] = Field(default=None, description="Error message if the translation failed")


class BisimilarRequest(BaseModel):
    """Request model for a bisimulation check between two machines"""
    left: str = Field(..., description="First machine in the mealy or imealy text format")
    right: str = Field(..., description="Second machine in the mealy or imealy text format")
    interpretation: Optional[str] = Field(default=None, description="Interpretation file contents; Belnap when absent")
    lattice: Optional[str] = Field(default=None, description="Lattice file contents; Belnap when absent")


class BisimilarResponse(BaseModel):
    """Response model for a bisimulation check"""
    success: bool = Field(description="Whether the check completed")
    bisimilar: Optional[bool] = Field(default=None, description="The verdict")
    related_pairs: Optional[int] = Field(default=None, description="Size of the bisimulation found")
    counterexample: List[List[str]] = Field(default_factory=list, description="Distinguishing input word")
    error: Optional[str] = Field(default=None, description="Error message if the check failed")
