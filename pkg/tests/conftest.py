from pathlib import Path

import pytest

from models.circuit_models import Waveform
from services.circuit_service import parse_circuit, parse_waveform
from services.signature_service import belnap

EXAMPLES = Path(__file__).resolve().parent.parent / "Examples"


@pytest.fixture
def interp():
    return belnap()


@pytest.fixture
def lattice(interp):
    return interp.lattice


@pytest.fixture
def examples() -> Path:
    return EXAMPLES


@pytest.fixture
def circuit(interp):
    """Parse a circuit term against Belnap"""
    return lambda text: parse_circuit(text, interp)


@pytest.fixture
def wave(interp):
    """A waveform written as space-separated ticks, each a comma-separated tuple: 't f,B'"""
    def build(text: str, width: int = 1) -> Waveform:
        return parse_waveform("\n".join(text.split()), interp, width) if text.strip() else Waveform(width, ())
    return build


@pytest.fixture
def symbols(interp):
    """Render a waveform back to the space-separated form `wave` reads"""
    return lambda waveform: " ".join(interp.format_point(tick) for tick in waveform.ticks)
