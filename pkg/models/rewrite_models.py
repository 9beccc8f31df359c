from dataclasses import dataclass, field
from typing import Callable, List, Optional

from pydantic import BaseModel, Field

from models.circuit_models import Circuit
from models.lattice_models import Point

AXIOMS = ("Fork", "Join", "Stub", "Gate", "Timelessness", "Disconnect", "Unobservable", "Streaming")
STRUCTURAL_RULES = ("tightening", "sliding", "superposing", "vanishing", "yanking")
PIPELINE_RULES = ("instant-feedback", "register-form", "streaming", "extensionality", "productivity")
RULES = AXIOMS + STRUCTURAL_RULES + PIPELINE_RULES


@dataclass(frozen=True)
class TraceDelayForm:
    """
    trace(x+d, (id_x ⊗ delay^d ⊗ v̄ ⊗ id_m) ; core) with a passive combinational core
    of type x+d+k+m → x+d+n.
    """
    core: Circuit
    trace_width: int
    delay_width: int
    init_values: tuple[str, ...]
    inputs: int
    outputs: int

    @property
    def value_width(self) -> int:
        return len(self.init_values)


@dataclass(frozen=True)
class ReductionStep:
    rule: str
    before: Circuit
    after: Circuit
    locus: str


@dataclass
class ReductionTrace:
    steps: list[ReductionStep] = field(default_factory=list)

    def record(self, rule: str, before: Circuit, after: Circuit, locus: str = "root"):
        self.steps.append(ReductionStep(rule, before, after, locus))

    def extend(self, other: "ReductionTrace"):
        self.steps.extend(other.steps)

    def rules(self) -> list[str]:
        return [s.rule for s in self.steps]

    def __len__(self) -> int:
        return len(self.steps)

    def format(self, printer: Callable[[Circuit], str]) -> str:
        lines = []
        for k, s in enumerate(self.steps):
            lines.append(f"step {k}: {s.rule} @ {s.locus}")
            lines.append(printer(s.after))
        return "\n".join(lines) + ("\n" if lines else "")


@dataclass(frozen=True)
class ProductivityResult:
    """Tick-0 output values and the residual circuit producing the remaining ticks"""
    values: Point
    residual: Circuit
    trace: ReductionTrace


# API models
class ReduceRequest(BaseModel):
    """Request model for axiomatic reduction of a closed circuit"""
    circuit: str = Field(..., description="Closed circuit term")
    ticks: int = Field(default=5, gt=0, description="Number of output ticks to produce")
    extra_iterations: int = Field(default=0, ge=0, description="Additional instant-feedback iterations")
    emit_trace: bool = Field(default=False, description="Include the reduction trace in the response")
    interpretation: Optional[str] = Field(default=None, description="Interpretation file contents; Belnap when absent")
    lattice: Optional[str] = Field(default=None, description="Lattice file contents; Belnap when absent")


class ReduceResponse(BaseModel):
    """Response model for axiomatic reduction"""
    success: bool = Field(description="Whether the reduction succeeded")
    values: List[List[str]] = Field(default_factory=list, description="Output symbols per tick")
    steps: int = Field(default=0, description="Number of recorded rewrite steps")
    trace: Optional[str] = Field(default=None, description="Reduction trace in the line format")
    error: Optional[str] = Field(default=None, description="Error message if the reduction failed")


class TraceDelayFormResponse(BaseModel):
    """Response model for the global trace-delay form"""
    success: bool = Field(description="Whether the transformation succeeded")
    trace_width: Optional[int] = Field(default=None, description="Width x of the instant feedback bus")
    delay_width: Optional[int] = Field(default=None, description="Width d of the delay bus")
    value_width: Optional[int] = Field(default=None, description="Width k of the value bus")
    init_values: List[str] = Field(default_factory=list, description="Values on the value bus")
    core: Optional[str] = Field(default=None, description="Passive combinational core")
    rules: List[str] = Field(default_factory=list, description="Structural rules applied")
    error: Optional[str] = Field(default=None, description="Error message if the transformation failed")


class AxiomRequest(BaseModel):
    """Request model for applying one axiom"""
    circuit: str = Field(..., description="Circuit term")
    rule: str = Field(..., description="One of " + ", ".join(AXIOMS))
    locus: Optional[str] = Field(default=None, description="Dot-separated child path, 'root' for the whole term; "
                                                           "first redex when absent")
    interpretation: Optional[str] = Field(default=None, description="Interpretation file contents; Belnap when absent")
    lattice: Optional[str] = Field(default=None, description="Lattice file contents; Belnap when absent")


class AxiomResponse(BaseModel):
    """Response model for an axiom application"""
    success: bool = Field(description="Whether the axiom applied")
    result: Optional[str] = Field(default=None, description="Rewritten term")
    locus: Optional[str] = Field(default=None, description="Locus the axiom fired at")
    redexes: List[str] = Field(default_factory=list, description="All loci where the rule matches")
    error: Optional[str] = Field(default=None, description="Error message if the axiom did not apply")
