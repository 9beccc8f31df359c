from fastapi import APIRouter
from models.signature_models import BelnapResponse, InterpretationCheckRequest, InterpretationCheckResponse
from services.signature_service import InterpretationService

router = APIRouter()
interpretation_service = InterpretationService()

@router.get("/belnap", response_model=BelnapResponse)
async def belnap_interpretation():
    """
    Get the built-in Belnap interpretation.

    Returns the lattice elements, the value symbols and the truth table of every gate.
    """
    return interpretation_service.belnap()

@router.post("/check", response_model=InterpretationCheckResponse)
async def check_interpretation(request: InterpretationCheckRequest):
    """
    Validate a lattice and interpretation pair.

    - **interpretation**: Interpretation file contents
    - **lattice**: Optional lattice file contents (Belnap when absent)

    Returns whether every gate is monotone and ⊥-preserving and the value map is a bijection.
    """
    return interpretation_service.check(request)
