from fastapi import APIRouter, File, UploadFile
from models.circuit_models import CircuitDotResponse, CircuitInfoResponse, CircuitRequest, GrammarResponse
from services.circuit_service import CircuitService

router = APIRouter()
circuit_service = CircuitService()

@router.post("/parse", response_model=CircuitInfoResponse)
async def parse_circuit(request: CircuitRequest):
    """
    Parse a circuit term.

    - **circuit**: Term in the circuit DSL
    - **interpretation**: Optional interpretation file contents
    - **lattice**: Optional lattice file contents

    Returns the arity, the classification, node counts and the canonical printing.
    """
    return circuit_service.parse(request)

@router.post("/upload", response_model=CircuitInfoResponse)
async def upload_circuit(file: UploadFile = File(...)):
    """
    Parse an uploaded `.cir` file against the Belnap interpretation.

    Returns the same description as `/parse`.
    """
    return circuit_service.parse_upload(await file.read())

@router.post("/dot", response_model=CircuitDotResponse)
async def circuit_dot(request: CircuitRequest):
    """
    Export the wire graph of a circuit in Graphviz dot format.

    - **circuit**: Term in the circuit DSL
    """
    return circuit_service.dot(request)

@router.get("/grammar", response_model=GrammarResponse)
async def circuit_grammar():
    """
    Get the grammar of the circuit DSL.
    """
    return circuit_service.grammar()
