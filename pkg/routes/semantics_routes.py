from fastapi import APIRouter
from models.semantics_models import EquivalenceRequest, EquivalenceResponse, SimulateRequest, SimulateResponse
from services.mealy_service import EquivalenceService
from services.semantics_service import SemanticsService

router = APIRouter()
semantics_service = SemanticsService()
equivalence_service = EquivalenceService()

@router.post("/simulate", response_model=SimulateResponse)
async def simulate(request: SimulateRequest):
    """
    Run a circuit on an input waveform.

    - **circuit**: Term in the circuit DSL
    - **waveform**: Input waveform, one tick per line (⊥ beyond its end)
    - **ticks**: Number of ticks to simulate

    Returns the output waveform.
    """
    return semantics_service.simulate(request)

@router.post("/equivalence", response_model=EquivalenceResponse)
async def equivalence(request: EquivalenceRequest):
    """
    Decide whether two circuits denote the same stream function.

    - **left**, **right**: Terms in the circuit DSL
    - **method**: `bounded`, `bisim` or `both`
    - **equiv_budget**: Largest number of input words the bounded check may explore

    Returns the verdict and, when they differ, the shortest distinguishing input word.
    """
    return equivalence_service.check(request)
