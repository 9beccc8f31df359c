from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence, Union

from pydantic import BaseModel, Field

from models.lattice_models import FunctionTable, Lattice, Point
from models.mealy_models import MealyMachine
from services.errors import LatcircError

# An expression tree found by the gadget search:
# ("var", i) | ("bot",) | ("gate", name, *args) | ("join", left, right)
Expression = tuple


@dataclass(frozen=True)
class PrefixPeriodicSpec:
    """
    A causal stream function given by per-tick output tables over a sliding input window.

    The table for tick i is prefix[i] for i < len(prefix) and period[(i - p) mod r] after.
    Each table maps the flattened window (oldest tick first, `window` ticks of m inputs)
    to n outputs. `position` and `history` locate a residual: the next tick index and the
    last window-1 inputs, ⊥ before the first tick.
    """
    lattice: Lattice
    inputs: int
    outputs: int
    window: int
    prefix: Sequence[FunctionTable] = field(compare=False)
    period: tuple[FunctionTable, ...] = field(compare=False)
    position: int = 0
    history: tuple[Point, ...] = ()

    @property
    def prefix_length(self) -> int:
        return len(self.prefix)

    def table_at(self, tick: int) -> FunctionTable:
        p = len(self.prefix)
        if tick < p:
            return self.prefix[tick]
        return self.period[(tick - p) % len(self.period)]


@dataclass(frozen=True)
class BlackBoxSpec:
    """The output stream of an opaque machine started in `state`"""
    machine: MealyMachine = field(compare=False)
    state: str
    # state label to its bisimilarity class
    blocks: Mapping[str, int] = field(compare=False, default_factory=dict)

    @property
    def lattice(self) -> Lattice:
        return self.machine.lattice

    @property
    def inputs(self) -> int:
        return self.machine.inputs

    @property
    def outputs(self) -> int:
        return self.machine.outputs


StreamSpec = Union[PrefixPeriodicSpec, BlackBoxSpec]


@dataclass(frozen=True)
class StateOrder:
    machine: MealyMachine
    pairs: frozenset

    def le(self, a: str, b: str) -> bool:
        return (a, b) in self.pairs


@dataclass(frozen=True)
class StateAssignment:
    """γ: state ↦ {⊥,⊤}^r with coordinate j ⊤ iff state j lies below the state"""
    machine: MealyMachine
    codes: Mapping[str, Point]

    @property
    def width(self) -> int:
        return len(self.machine.states)


@dataclass(frozen=True)
class GadgetSet:
    """Gadgets found for one interpretation, each as an expression over input variables"""
    detectors: Mapping[int, Expression]
    conjunction: Expression
    guards: Mapping[int, Expression]
    primitives: tuple[str, ...]


@dataclass(frozen=True)
class CircuitFunctionVerdict:
    accepted: bool
    reason: Optional[str] = None
    code: Optional[str] = None
    states: Optional[int] = None
    prefix: Optional[int] = None
    period: Optional[int] = None
    witness: Optional[tuple] = None
    error: Optional[LatcircError] = field(default=None, compare=False)

    def __bool__(self) -> bool:
        return self.accepted


# API models
class SpecRequest(BaseModel):
    """Request model carrying a stream specification"""
    spec: str = Field(..., description="Specification in the spec file format")
    emit: str = Field(default="mealy", pattern="^(mealy|circuit)$", description="mealy or circuit")
    derivative_budget: int = Field(default=4096, gt=0, description="Largest number of residuals explored")
    interpretation: Optional[str] = Field(default=None, description="Interpretation file contents; Belnap when absent")
    lattice: Optional[str] = Field(default=None, description="Lattice file contents; Belnap when absent")


class SynthesizeResponse(BaseModel):
    """Response model for synthesis"""
    success: bool = Field(description="Whether synthesis succeeded")
    output: Optional[str] = Field(default=None, description="Synthesized machine (imealy format) or circuit")
    states: Optional[int] = Field(default=None, description="States of the minimal machine")
    state_width: Optional[int] = Field(default=None, description="Width of the γ-encoded state space")
    error: Optional[str] = Field(default=None, description="Error message if synthesis failed")


class CheckFunctionResponse(BaseModel):
    """Response model for the circuit-function check"""
    success: bool = Field(description="Whether the check ran")
    accepted: Optional[bool] = Field(default=None, description="Whether the spec is a circuit function")
    reason: Optional[str] = Field(default=None, description="Failure reason")
    code: Optional[str] = Field(default=None, description="Error code of the failed condition")
    states: Optional[int] = Field(default=None, description="States of the minimal machine")
    prefix: Optional[int] = Field(default=None, description="Prefix length found along ⊥ inputs")
    period: Optional[int] = Field(default=None, description="Period found along ⊥ inputs")
    error: Optional[str] = Field(default=None, description="Error message if the check could not run")
