"""Tests for the HTTP routes"""
import pytest
from fastapi.testclient import TestClient

from main import app
from services.library_service import FEEDBACK_AND, OSCILLATOR


@pytest.fixture(scope="module")
def client():
    return TestClient(app)


def test_root_and_health(client):
    assert client.get("/").json()["message"] == "Lattice Circuits API"
    assert client.get("/health").json() == {"status": "healthy"}


def test_belnap(client):
    body = client.get("/interpretation/belnap").json()
    assert body["elements"] == ["B", "t", "f", "T"]


def test_check_interpretation(client, examples):
    response = client.post("/interpretation/check",
                           json={"interpretation": (examples / "belnap.interp").read_text()})
    body = response.json()
    assert body["success"]
    assert body["gates"] == {"AND": 2, "OR": 2, "NOT": 1}
    assert body["chain_steps"] == 2


def test_parse(client):
    body = client.post("/circuit/parse", json={"circuit": FEEDBACK_AND}).json()
    assert body["success"]
    assert body["instant_feedback"]
    bad = client.post("/circuit/parse", json={"circuit": "seq(fork"}).json()
    assert not bad["success"]


def test_upload(client):
    response = client.post("/circuit/upload", files={"file": ("delay.cir", b"delay\n", "text/plain")})
    assert response.json()["success"]


def test_grammar_and_dot(client):
    assert "trace<N>" in client.get("/circuit/grammar").json()["combinators"]
    dot = client.post("/circuit/dot", json={"circuit": "seq(fork, gate(AND))"}).json()
    assert dot["success"]


def test_simulate(client):
    body = client.post("/semantics/simulate", json={"circuit": "delay", "waveform": "t\nf\nt", "ticks": 3}).json()
    assert body["success"]
    assert body["outputs"] == [["B"], ["t"], ["f"]]


def test_simulate_validates_ticks(client):
    response = client.post("/semantics/simulate", json={"circuit": "delay", "ticks": 0})
    assert response.status_code == 422


def test_equivalence(client):
    body = client.post("/semantics/equivalence", json={"left": "delay", "right": "id1"}).json()
    assert body["success"]
    assert not body["equivalent"]
    assert body["counterexample"] == [["t"]]


def test_reduce_and_rules(client):
    body = client.post("/rewrite/reduce", json={"circuit": FEEDBACK_AND, "ticks": 2}).json()
    assert body["values"] == [["B"], ["B"]]
    rules = client.get("/rewrite/rules").json()
    assert "Fork" in rules["axioms"]


def test_axiom(client):
    body = client.post("/rewrite/axiom", json={"circuit": "seq(val(t), fork)", "rule": "Fork"}).json()
    assert body["success"]
    assert body["result"] == "par(val(t), val(t))"


def test_trace_delay_form(client):
    body = client.post("/rewrite/trace-delay-form", json={"circuit": OSCILLATOR}).json()
    assert body["success"]
    assert (body["trace_width"], body["delay_width"], body["value_width"]) == (2, 3, 3)


def test_mealy_routes(client, examples):
    machine = client.post("/mealy/from-circuit", json={"circuit": "delay"}).json()
    assert machine["states"] == 4
    verdict = client.post("/mealy/bisimilar", json={
        "left": machine["machine"], "right": (examples / "delay.mealy").read_text()
    }).json()
    assert verdict["bisimilar"]
    rebuilt = client.post("/mealy/to-circuit", json={"machine": (examples / "register.imealy").read_text()}).json()
    assert rebuilt["success"]


def test_synthesis_routes(client, examples):
    spec = (examples / "example.spec").read_text()
    checked = client.post("/synthesis/check", json={"spec": spec}).json()
    assert checked["accepted"]
    assert checked["states"] == 6
    minimal = client.post("/synthesis/minimal", json={"spec": spec}).json()
    assert minimal["success"]
    assert client.post("/synthesis/synthesize", json={"spec": spec, "emit": "bogus"}).status_code == 422
