"""latcirc: command-line entry point over the services"""
import argparse
import logging
import sys
from pathlib import Path
from random import Random
from typing import Optional, Sequence

from pydantic import ValidationError

from models.circuit_models import Waveform
from models.config_models import RunConfig
from models.signature_models import Interpretation
from services.circuit_service import format_waveform, load_circuit, load_waveform, print_circuit, to_dot
from services.errors import FileFormatError, LatcircError
from services.fuzz_service import random_circuit, random_closed_circuit
from services.lattice_service import load_lattice
from services.mealy_service import (
    check_equivalence, circuit_to_mealy, format_imealy, format_mealy, load_machine, mealy_to_circuit, minimize,
    to_opaque
)
from services.realization_service import discover_gadgets
from services.rewrite_service import reduce_stream
from services.semantics_service import simulate
from services.signature_service import belnap, load_interpretation
from services.synthesis_service import check_circuit_function, load_spec, machine_to_circuit, synthesize

logger = logging.getLogger("latcirc")


def _interpretation(config: RunConfig) -> Interpretation:
    lattice = load_lattice(config.lattice_path) if config.lattice_path else None
    if config.interp_path:
        return load_interpretation(config.interp_path, lattice)
    if lattice is not None:
        raise FileFormatError("a custom lattice needs an interpretation file (--interp)")
    return belnap()


def _word(waveform: Waveform, interp: Interpretation) -> str:
    return " ".join(f"({interp.format_point(tick)})" for tick in waveform.ticks)


def _write(text: str, path: Optional[str]):
    if path:
        Path(path).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def cmd_sim(args, config: RunConfig, interp: Interpretation) -> int:
    c = load_circuit(args.circuit, interp)
    waveform = load_waveform(args.input, interp, c.inputs) if args.input else Waveform(c.inputs, ())
    _write(format_waveform(simulate(c, waveform, config.ticks, interp), interp), args.output)
    return 0


def cmd_reduce(args, config: RunConfig, interp: Interpretation) -> int:
    c = load_circuit(args.circuit, interp)
    values, steps = reduce_stream(c, config.ticks, interp, config.extra_iterations)
    print(" ".join(interp.format_point(tick) for tick in values.ticks))
    if config.emit_trace:
        Path(config.emit_trace).write_text(steps.format(print_circuit), encoding="utf-8")
    return 0


def cmd_to_mealy(args, config: RunConfig, interp: Interpretation) -> int:
    machine = to_opaque(circuit_to_mealy(load_circuit(args.circuit, interp), interp))
    _write(format_mealy(minimize(machine) if args.minimize else machine, interp), args.output)
    return 0


def cmd_from_mealy(args, config: RunConfig, interp: Interpretation) -> int:
    machine = load_machine(args.machine, interp)
    circuit = machine_to_circuit(machine, interp, config.derivative_budget, config.verify_limit)
    _write(print_circuit(circuit) + "\n", args.output)
    return 0


def cmd_synth(args, config: RunConfig, interp: Interpretation) -> int:
    spec = load_spec(args.spec, interp, config.window)
    if args.check:
        verdict = check_circuit_function(spec, interp, config.derivative_budget)
        if verdict:
            print(f"ACCEPT states={verdict.states} prefix={verdict.prefix} period={verdict.period}")
        else:
            print(f"REJECT {verdict.code}: {verdict.reason}")
        return 0
    machine = synthesize(spec, interp, config.derivative_budget)
    if args.emit == "circuit":
        _write(print_circuit(mealy_to_circuit(machine, interp, config.verify_limit)) + "\n", args.output)
    else:
        _write(format_imealy(machine, interp), args.output)
    return 0


def cmd_equiv(args, config: RunConfig, interp: Interpretation) -> int:
    left, right = load_circuit(args.left, interp), load_circuit(args.right, interp)
    equivalent, counterexample, method = check_equivalence(left, right, interp, args.method, config.equiv_budget)
    logger.info("decided by %s", method)
    print("EQUIV" if equivalent else f"DIFFER @ word {_word(counterexample, interp)}")
    return 0


def cmd_check_interp(args, config: RunConfig, interp: Interpretation) -> int:
    lattice = interp.lattice
    print(f"OK: {len(interp.gates)} gates over {lattice.size} elements ({', '.join(lattice.elements)})")
    for gate in interp.gates:
        print(f"  {gate.name}/{gate.arity}")
    if args.gadgets:
        gadgets = discover_gadgets(interp)
        print(f"functionally complete using {', '.join(gadgets.primitives)}")
    return 0


def cmd_dot(args, config: RunConfig, interp: Interpretation) -> int:
    _write(to_dot(load_circuit(args.circuit, interp)), args.output)
    return 0


def cmd_fuzz(args, config: RunConfig, interp: Interpretation) -> int:
    rng = Random(config.seed)
    for _ in range(args.count):
        c = random_closed_circuit(rng, interp) if args.closed else random_circuit(rng, interp)
        print(print_circuit(c))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="latcirc", description="Sequential circuits over finite lattices")
    parser.add_argument("--lattice", help="Lattice file (Belnap when absent)")
    parser.add_argument("--interp", help="Interpretation file (Belnap when absent)")
    parser.add_argument("-v", "--verbose", action="store_true", help="Log at debug level on stderr")
    parser.add_argument("--equiv-budget", type=int, default=2 ** 20, help="Input words the bounded check may explore")
    parser.add_argument("--derivative-budget", type=int, default=4096, help="Residuals synthesis may explore")
    parser.add_argument("--verify-limit", type=int, default=4096,
                        help="Largest domain a realized table is checked on exhaustively")
    parser.add_argument("--seed", type=int, default=0, help="Seed for generated corpora")
    commands = parser.add_subparsers(dest="command", required=True, metavar="command")

    sim = commands.add_parser("sim", help="Simulate a circuit on an input waveform")
    sim.add_argument("circuit")
    sim.add_argument("--input", help="Input waveform file (all ⊥ when absent)")
    sim.add_argument("--ticks", type=int, default=8)
    sim.add_argument("--output", help="Output waveform file (stdout when absent)")
    sim.set_defaults(handler=cmd_sim)

    reduce = commands.add_parser("reduce", help="Reduce a closed circuit to its output values")
    reduce.add_argument("circuit")
    reduce.add_argument("--ticks", type=int, default=5)
    reduce.add_argument("--emit-trace", help="File receiving the reduction trace")
    reduce.add_argument("--extra-iterations", type=int, default=0,
                        help="Unfoldings beyond the chain height in the instant-feedback rule")
    reduce.set_defaults(handler=cmd_reduce)

    to_mealy = commands.add_parser("to-mealy", help="Translate a circuit into its Mealy machine")
    to_mealy.add_argument("circuit")
    to_mealy.add_argument("--minimize", action="store_true")
    to_mealy.add_argument("--output")
    to_mealy.set_defaults(handler=cmd_to_mealy)

    from_mealy = commands.add_parser("from-mealy", help="Translate a machine into a circuit")
    from_mealy.add_argument("machine")
    from_mealy.add_argument("--output")
    from_mealy.set_defaults(handler=cmd_from_mealy)

    synth = commands.add_parser("synth", help="Synthesize a machine or circuit from a stream spec")
    synth.add_argument("spec")
    synth.add_argument("--emit", choices=("mealy", "circuit"), default="mealy")
    synth.add_argument("--window", type=int, default=4, help="Window of spec files without a window= field")
    synth.add_argument("--check", action="store_true", help="Only report whether the spec is a circuit function")
    synth.add_argument("--output")
    synth.set_defaults(handler=cmd_synth)

    equiv = commands.add_parser("equiv", help="Decide extensional equivalence of two circuits")
    equiv.add_argument("left")
    equiv.add_argument("right")
    equiv.add_argument("--method", choices=("bounded", "bisim", "both"), default="both")
    equiv.set_defaults(handler=cmd_equiv)

    check = commands.add_parser("check-interp", help="Validate a lattice and interpretation")
    check.add_argument("--gadgets", action="store_true", help="Also search the realization gadgets")
    check.set_defaults(handler=cmd_check_interp)

    dot = commands.add_parser("dot", help="Export a circuit's wire graph as Graphviz dot")
    dot.add_argument("circuit")
    dot.add_argument("--output")
    dot.set_defaults(handler=cmd_dot)

    fuzz = commands.add_parser("fuzz", help=argparse.SUPPRESS)
    fuzz.add_argument("--count", type=int, default=10)
    fuzz.add_argument("--closed", action="store_true")
    fuzz.set_defaults(handler=cmd_fuzz)
    return parser


def _config(args: argparse.Namespace) -> RunConfig:
    return RunConfig(
        lattice_path=args.lattice,
        interp_path=args.interp,
        ticks=getattr(args, "ticks", 8),
        equiv_budget=args.equiv_budget,
        derivative_budget=args.derivative_budget,
        seed=args.seed,
        emit_trace=getattr(args, "emit_trace", None),
        window=getattr(args, "window", 4),
        extra_iterations=getattr(args, "extra_iterations", 0),
        verify_limit=args.verify_limit,
        verbose=args.verbose,
    )


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = _config(args)
    except ValidationError as e:
        parser.print_usage(sys.stderr)
        print(f"latcirc: error: {e.errors()[0]['loc'][0]}: {e.errors()[0]['msg']}", file=sys.stderr)
        return 2

    logging.basicConfig(stream=sys.stderr, format="%(levelname)s (%(module)s): %(message)s")
    logging.getLogger().setLevel(logging.DEBUG if config.verbose else logging.WARNING)

    try:
        return args.handler(args, config, _interpretation(config))
    except LatcircError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
