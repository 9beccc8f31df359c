from dataclasses import dataclass
from typing import List, Optional

from pydantic import BaseModel, Field

from models.circuit_models import Waveform, WireGraph
from models.lattice_models import Lattice, Point
from models.signature_models import GateTable


@dataclass(frozen=True)
class Netlist:
    """
    An executable flattening of a circuit.

    State slots belong to delay nodes (initially ⊥) and value/top nodes (initially their
    element, ⊥ from tick 1 on), listed in traversal order.
    """
    graph: WireGraph
    lattice: Lattice
    order: tuple[int, ...]
    slots: tuple[int, ...]
    initial: tuple[int, ...]
    tables: tuple[Optional[GateTable], ...]

    @property
    def inputs(self) -> int:
        return len(self.graph.inputs)

    @property
    def outputs(self) -> int:
        return len(self.graph.outputs)


@dataclass(frozen=True)
class EvalState:
    tick: int
    state: Point


@dataclass(frozen=True)
class EquivalenceVerdict:
    equivalent: bool
    counterexample: Optional[Waveform] = None
    left_output: Optional[Point] = None
    right_output: Optional[Point] = None
    explored: int = 0

    def __bool__(self) -> bool:
        return self.equivalent


# API models
class SimulateRequest(BaseModel):
    """Request model for simulating a circuit on an input waveform"""
    circuit: str = Field(..., description="Circuit term in the DSL")
    waveform: str = Field(default="", description="Input waveform, one comma-separated tick per line; ⊥-padded")
    ticks: int = Field(default=8, gt=0, description="Number of output ticks")
    interpretation: Optional[str] = Field(default=None, description="Interpretation file contents; Belnap when absent")
    lattice: Optional[str] = Field(default=None, description="Lattice file contents; Belnap when absent")


class SimulateResponse(BaseModel):
    """Response model for simulation"""
    success: bool = Field(description="Whether the simulation succeeded")
    outputs: List[List[str]] = Field(default_factory=list, description="Output symbols per tick")
    waveform: Optional[str] = Field(default=None, description="Output waveform file contents")
    state_slots: Optional[int] = Field(default=None, description="Number of state slots of the netlist")
    error: Optional[str] = Field(default=None, description="Error message if simulation failed")


class EquivalenceRequest(BaseModel):
    """Request model for extensional equivalence"""
    left: str = Field(..., description="First circuit term")
    right: str = Field(..., description="Second circuit term")
    method: str = Field(default="both", pattern="^(bounded|bisim|both)$", description="bounded, bisim or both")
    equiv_budget: int = Field(default=2 ** 20, gt=0, description="Largest number of input words the bounded check may consider")
    interpretation: Optional[str] = Field(default=None, description="Interpretation file contents; Belnap when absent")
    lattice: Optional[str] = Field(default=None, description="Lattice file contents; Belnap when absent")


class EquivalenceResponse(BaseModel):
    """Response model for extensional equivalence"""
    success: bool = Field(description="Whether the check completed")
    equivalent: Optional[bool] = Field(default=None, description="The verdict")
    method: Optional[str] = Field(default=None, description="Method that produced the verdict")
    counterexample: List[List[str]] = Field(default_factory=list, description="Distinguishing input word")
    error: Optional[str] = Field(default=None, description="Error message if the check failed")
