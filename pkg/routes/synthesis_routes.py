from fastapi import APIRouter
from models.synthesis_models import CheckFunctionResponse, SpecRequest, SynthesizeResponse
from services.synthesis_service import SynthesisService

router = APIRouter()
synthesis_service = SynthesisService()

@router.post("/synthesize", response_model=SynthesizeResponse)
async def synthesize(request: SpecRequest):
    """
    Synthesize a machine or circuit from a stream specification.

    - **spec**: Spec file contents (prefix/period tables or an embedded black-box machine)
    - **emit**: `mealy` for the I-Mealy machine, `circuit` for the circuit term
    - **derivative_budget**: Largest number of residuals explored
    """
    return synthesis_service.synthesize(request)

@router.post("/check", response_model=CheckFunctionResponse)
async def check_circuit_function(request: SpecRequest):
    """
    Decide whether a specification is realizable by a circuit.

    Returns the verdict with the failed condition, or the machine size and its prefix and period.
    """
    return synthesis_service.check(request)

@router.post("/minimal", response_model=SynthesizeResponse)
async def minimal_machine(request: SpecRequest):
    """
    Get the minimal Mealy machine of a specification in the `mealy` text format.
    """
    return synthesis_service.minimal_machine(request)
