from fastapi import APIRouter
from models.mealy_models import (
    BisimilarRequest, BisimilarResponse, CircuitTextResponse, MealyFromCircuitRequest, MealyResponse,
    MealyToCircuitRequest
)
from services.mealy_service import MealyService

router = APIRouter()
mealy_service = MealyService()

@router.post("/from-circuit", response_model=MealyResponse)
async def mealy_from_circuit(request: MealyFromCircuitRequest):
    """
    Translate a circuit into its Mealy machine.

    - **circuit**: Term in the circuit DSL
    - **minimize**: Quotient the reachable machine by bisimilarity

    Returns the machine in the `mealy` text format.
    """
    return mealy_service.from_circuit(request)

@router.post("/to-circuit", response_model=CircuitTextResponse)
async def mealy_to_circuit(request: MealyToCircuitRequest):
    """
    Translate a machine into a circuit.

    - **machine**: Machine in the `mealy` or `imealy` text format
    - **derivative_budget**: Residual budget when an opaque machine is synthesized
    """
    return mealy_service.to_circuit(request)

@router.post("/bisimilar", response_model=BisimilarResponse)
async def mealy_bisimilar(request: BisimilarRequest):
    """
    Check two machines for bisimilarity.

    Returns the verdict and the size of the relation, or a distinguishing input word.
    """
    return mealy_service.bisimilar(request)
