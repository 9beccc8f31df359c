"""Tests for the command-line entry point"""
from pathlib import Path

import pytest

from cli import main


def _run(capsys, *argv):
    code = main([str(a) for a in argv])
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_sim(capsys, examples):
    code, out, _ = _run(capsys, "sim", examples / "delay.cir", "--input", examples / "in.wav", "--ticks", 3)
    assert code == 0
    assert out == "B\nt\nf\n"


def test_sim_oscillator(capsys, examples):
    code, out, _ = _run(capsys, "sim", examples / "oscillator.cir", "--ticks", 4)
    assert code == 0
    assert out == "t,B\nB,B\nB,f\nB,B\n"


def test_reduce(capsys, examples, tmp_path):
    trace = tmp_path / "trace.txt"
    code, out, _ = _run(capsys, "reduce", examples / "trand.cir", "--emit-trace", trace)
    assert code == 0
    assert out == "B B B B B\n"
    assert "instant-feedback" in trace.read_text()


def test_equiv(capsys, examples, tmp_path):
    code, out, _ = _run(capsys, "equiv", examples / "delay.cir", examples / "delay.cir")
    assert (code, out) == (0, "EQUIV\n")
    identity = tmp_path / "id.cir"
    identity.write_text("id1\n")
    code, out, _ = _run(capsys, "equiv", examples / "delay.cir", identity)
    assert (code, out) == (0, "DIFFER @ word (t)\n")


def test_synth_check(capsys, examples):
    code, out, _ = _run(capsys, "synth", examples / "example.spec", "--check")
    assert code == 0
    assert out == "ACCEPT states=6 prefix=1 period=2\n"


def test_synth_check_rejects(capsys, examples):
    code, out, _ = _run(capsys, "--derivative-budget", 3, "synth", examples / "example.spec", "--check")
    assert code == 0
    assert out.startswith("REJECT DerivativeBudgetExceeded: ")


def test_synth(capsys, examples):
    code, out, _ = _run(capsys, "synth", examples / "delay.spec")
    assert code == 0
    assert out.startswith("imealy s=4 m=1 n=1\n")


def test_to_mealy(capsys, examples):
    code, out, _ = _run(capsys, "to-mealy", examples / "delay.cir")
    assert code == 0
    assert "states: s0 s1 s2 s3\n" in out


def test_from_mealy(capsys, examples, tmp_path):
    target = tmp_path / "register.cir"
    code, _, _ = _run(capsys, "from-mealy", examples / "register.imealy", "--output", target)
    assert code == 0
    assert target.read_text().startswith("trace1(")
    code, out, _ = _run(capsys, "sim", target, "--input", examples / "in.wav", "--ticks", 3)
    assert out == "t\nt\nf\n"


def test_check_interp(capsys):
    code, out, _ = _run(capsys, "check-interp")
    assert code == 0
    assert out.splitlines()[0] == "OK: 3 gates over 4 elements (B, t, f, T)"


def test_check_interp_files(capsys, examples):
    code, out, _ = _run(capsys, "--lattice", examples / "belnap.lattice", "--interp", examples / "belnap.interp",
                        "check-interp", "--gadgets")
    assert code == 0
    assert out.startswith("OK: 3 gates over 4 elements")
    assert "functionally complete using" in out


def test_dot(capsys, examples):
    code, out, _ = _run(capsys, "dot", examples / "delay.cir")
    assert code == 0
    assert out.startswith("digraph circuit {")


def test_fuzz_is_reproducible(capsys):
    _, first, _ = _run(capsys, "--seed", 4, "fuzz", "--count", 3, "--closed")
    _, second, _ = _run(capsys, "--seed", 4, "fuzz", "--count", 3, "--closed")
    assert first == second
    assert len(first.splitlines()) == 3


def test_missing_file(capsys, tmp_path):
    code, _, err = _run(capsys, "sim", tmp_path / "missing.cir")
    assert code == 1
    assert err.startswith("error: FileFormatError: ")


def test_lattice_needs_interpretation(capsys, examples):
    code, _, err = _run(capsys, "--lattice", examples / "belnap.lattice", "check-interp")
    assert code == 1
    assert "--interp" in err


@pytest.mark.parametrize("argv", [
    ("sim", "delay.cir", "--ticks", 0),
    ("--equiv-budget", 0, "equiv", "a.cir", "b.cir"),
])
def test_invalid_settings(capsys, argv):
    code, _, err = _run(capsys, *argv)
    assert code == 2
    assert "latcirc: error:" in err


def test_build_spec_targets_the_cli():
    build = (Path(__file__).resolve().parent.parent / "latcirc.spec").read_text()
    assert '["cli.py"]' in build
    assert 'name="latcirc"' in build
