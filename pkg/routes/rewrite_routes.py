from fastapi import APIRouter
from models.circuit_models import CircuitRequest
from models.rewrite_models import (
    AXIOMS, PIPELINE_RULES, STRUCTURAL_RULES, AxiomRequest, AxiomResponse, ReduceRequest, ReduceResponse,
    TraceDelayFormResponse
)
from services.rewrite_service import RewriteService

router = APIRouter()
rewrite_service = RewriteService()

@router.post("/reduce", response_model=ReduceResponse)
async def reduce(request: ReduceRequest):
    """
    Reduce a closed circuit to its output values tick by tick.

    - **circuit**: Closed term in the circuit DSL
    - **ticks**: Number of output values to produce
    - **emit_trace**: Include the reduction trace in the response

    Returns the values and, optionally, every rule applied.
    """
    return rewrite_service.reduce(request)

@router.post("/trace-delay-form", response_model=TraceDelayFormResponse)
async def trace_delay_form(request: CircuitRequest):
    """
    Bring a circuit into trace-delay form.

    Returns the trace, delay and value bus widths and the combinational core.
    """
    return rewrite_service.trace_delay_form(request)

@router.post("/axiom", response_model=AxiomResponse)
async def apply_axiom(request: AxiomRequest):
    """
    Apply one axiom left to right.

    - **circuit**: Term in the circuit DSL
    - **rule**: Axiom name
    - **locus**: Dotted path to the subterm (`root` when absent: every redex is listed)
    """
    return rewrite_service.axiom(request)

@router.get("/rules")
async def rewrite_rules():
    """
    Get the names of the axioms and the structural rules.
    """
    return {"axioms": list(AXIOMS), "structural": list(STRUCTURAL_RULES), "pipeline": list(PIPELINE_RULES)}
