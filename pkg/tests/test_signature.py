"""Tests for the Belnap interpretation and the interpretation file format"""
import pytest

from models.signature_models import InterpretationCheckRequest
from services.errors import (
    FileFormatError, GateNotBottomPreserving, GateNotMonotone, IncompleteGateTable, UnknownSymbol,
    ValueMapNotBijective
)
from services.signature_service import InterpretationService, load_interpretation, parse_interpretation

# row input, column input, output in the order B, f, t, T
AND_TABLE = ["B f B f", "f f f f", "B f t T", "f f T T"]
OR_TABLE = ["B B t t", "B f t T", "t t t t", "t T t T"]
NOT_TABLE = "B t f T"
ORDER = ("B", "f", "t", "T")

GOLDENS = (
    [("AND", (a, b), out) for a, row in zip(ORDER, AND_TABLE) for b, out in zip(ORDER, row.split())]
    + [("OR", (a, b), out) for a, row in zip(ORDER, OR_TABLE) for b, out in zip(ORDER, row.split())]
    + [("NOT", (a,), out) for a, out in zip(ORDER, NOT_TABLE.split())]
)


def test_golden_count():
    assert len(GOLDENS) == 36


@pytest.mark.parametrize("gate, args, expected", GOLDENS)
def test_belnap_tables(interp, gate, args, expected):
    out = interp.gate(gate)(tuple(interp.element(a) for a in args))
    assert interp.symbol(out) == expected


def test_values_map_to_middle_elements(interp):
    assert interp.lattice.symbol(interp.value("t")) == "t"
    assert interp.lattice.symbol(interp.value("f")) == "f"


def test_interpretation_file_matches_builtin(interp, examples):
    loaded = load_interpretation(str(examples / "belnap.interp"))
    assert loaded.signature == interp.signature
    for gate in interp.gates:
        assert loaded.gate(gate.name).outputs == gate.outputs


HEADER = "values: t, f\ngates: ID/1\n"


def _identity_rows(overrides=None):
    rows = {"B": "B", "t": "t", "f": "f", "T": "T"}
    rows.update(overrides or {})
    return "table ID:\n" + "".join(f"  {a} -> {b}\n" for a, b in rows.items())


def test_minimal_interpretation():
    interp = parse_interpretation(HEADER + _identity_rows())
    assert interp.signature.arity("ID") == 1


def test_missing_row():
    text = HEADER + "table ID:\n  B -> B\n  t -> t\n"
    with pytest.raises(IncompleteGateTable):
        parse_interpretation(text)


def test_not_bottom_preserving():
    with pytest.raises(GateNotBottomPreserving):
        parse_interpretation(HEADER + _identity_rows({"B": "t"}))


def test_not_monotone():
    with pytest.raises(GateNotMonotone):
        parse_interpretation(HEADER + _identity_rows({"t": "f", "f": "t", "T": "t"}))


def test_value_map_must_be_bijective():
    text = "values: t, f\nmap: t=t, f=t\ngates: ID/1\n" + _identity_rows()
    with pytest.raises(ValueMapNotBijective):
        parse_interpretation(text)


def test_unknown_table_symbol():
    with pytest.raises(UnknownSymbol):
        parse_interpretation(HEADER + _identity_rows({"t": "x"}))


def test_malformed_gate_declaration():
    with pytest.raises(FileFormatError):
        parse_interpretation("values: t, f\ngates: ID\n")


def test_service_reports_errors():
    service = InterpretationService()
    response = service.check(InterpretationCheckRequest(interpretation=HEADER))
    assert not response.success
    assert "IncompleteGateTable" in response.error


def test_service_belnap():
    response = InterpretationService().belnap()
    assert response.elements == ["B", "t", "f", "T"]
    assert {gate.name for gate in response.gates} == {"AND", "OR", "NOT"}
    assert sum(len(gate.rows) for gate in response.gates) == 36
