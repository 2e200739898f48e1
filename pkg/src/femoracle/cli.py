"""Command-line entry point: synth, simulate, check, resources, spectrum.

Every command prints line-oriented ``key=value`` output and exits 0 only when
everything it checked passed.  Input problems (bad config, unreadable or
malformed circuit files, wrong bitstring lengths) exit with status 1 and a
diagnostic on stderr.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .circuit import Circuit, dumps, loads, lower_mcx, resources, run
from .fixedpoint import decode_code
from .fem.config import DEFAULT_CONFIG, ConfigError, load_config, parse_config
from .fem.estimator import ADDERS, measure_resources
from .fem.model import random_problem, spectrum_check
from .fem.oracle import build_oracle_theta, verify_oracle
from .logicgeo import LAYOUTS
from .fem.series import VARIANTS


class CliError(Exception):
    pass


def _load_problem(args):
    try:
        if args.config:
            problem, cfg = load_config(args.config)
        else:
            problem, cfg = parse_config(DEFAULT_CONFIG)
    except OSError as exc:
        raise CliError(f"cannot read config: {exc}") from None
    except ConfigError as exc:
        raise CliError(f"{args.config or '<default>'}: {exc}") from None
    if getattr(args, "layout", None):
        cfg = replace(cfg, layout=args.layout)
    if getattr(args, "series", None):
        cfg = replace(cfg, series=args.series)
    return problem, cfg


def _read_circuit(path) -> Circuit:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise CliError(f"cannot read circuit: {exc}") from None
    try:
        return loads(text)
    except ValueError as exc:
        raise CliError(f"{path}: {exc}") from None


def _parse_input(spec: str, circuit: Circuit) -> int:
    """Either a bitstring (character k is qubit k) or ``name=value`` pairs."""
    spec = spec.strip()
    if "=" not in spec:
        if len(spec) != circuit.num_qubits:
            raise CliError(f"input has {len(spec)} bits, circuit has {circuit.num_qubits} qubits")
        if set(spec) - {"0", "1"}:
            raise CliError("input bitstring may only contain 0 and 1")
        return sum(1 << q for q, ch in enumerate(spec) if ch == "1")
    values = {}
    for item in spec.split(","):
        name, _, val = item.partition("=")
        name = name.strip()
        if name not in circuit.registers:
            raise CliError(f"unknown register {name!r}")
        try:
            values[name] = int(val, 0)
        except ValueError:
            raise CliError(f"register {name}: not an integer: {val!r}") from None
        width = circuit.registers[name].width
        if not -(1 << width) < values[name] < 1 << width:
            raise CliError(f"register {name}: value {val} does not fit in {width} bits")
    return circuit.pack(values)


def _bits(state: int, n: int) -> str:
    return "".join(str(state >> q & 1) for q in range(n))


def _register_lines(circuit: Circuit, state: int) -> list[str]:
    lines = []
    for name, reg in circuit.registers.items():
        code = circuit.read(state, name)
        lines.append(f"{name}={code}")
        if reg.fmt is not None:
            lines.append(f"{name}.value={float(decode_code(code, reg.fmt)):.10g}")
    return lines


def _emit(lines) -> None:
    for line in lines:
        print(line)


# -- subcommands -----------------------------------------------------------

def cmd_synth(args) -> int:
    problem, cfg = _load_problem(args)
    circuit = build_oracle_theta(problem, cfg)
    if args.lower_mcx:
        circuit = lower_mcx(circuit)
    text = dumps(circuit)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
        return 0
    res = resources(circuit)
    _emit([f"out={args.out}", f"qubits={res.qubits}", f"ancillas={res.ancillas}",
           f"gates={res.total_gates}", f"depth={res.depth}"])
    return 0


def cmd_simulate(args) -> int:
    if not args.circuit:
        raise CliError("simulate needs a circuit file")
    if args.input is None:
        raise CliError("simulate needs --input")
    circuit = _read_circuit(args.circuit)
    if args.lower_mcx:
        raise CliError("--lower-mcx applies to synth and check, not simulate")
    state = _parse_input(args.input, circuit)
    out = run(circuit, state)
    _emit([f"input={_bits(state, circuit.num_qubits)}",
           f"output={_bits(out, circuit.num_qubits)}"] + _register_lines(circuit, out))
    return 0


def cmd_check(args) -> int:
    problem, cfg = _load_problem(args)
    if args.circuit:
        circuit = _read_circuit(args.circuit)
        missing = {"i", "j", "sign", "theta"} - set(circuit.registers)
        if missing:
            raise CliError(f"circuit lacks oracle registers: {', '.join(sorted(missing))}")
        if circuit.registers["i"].width != problem.nbits:
            raise CliError("circuit index width does not match the config")
    else:
        circuit = build_oracle_theta(problem, cfg)
    if args.lower_mcx:
        circuit = lower_mcx(circuit)
    try:
        report = verify_oracle(problem, cfg, circuit, far_samples=args.far_samples, seed=args.seed)
    except ValueError as exc:
        raise CliError(f"simulation failed: {exc}") from None
    _emit(report.table())
    _emit([f"pairs={len(report.pairs)}", f"mismatches={len(report.mismatches)}",
           f"max_deviation={report.max_deviation:.6f}",
           f"ancillas_clean={'yes' if report.clean else 'no'}",
           f"qubits={report.qubits}", f"gates={report.gates}",
           f"ok={'yes' if report.ok else 'no'}"])
    return 0 if report.ok else 1


def cmd_resources(args) -> int:
    problem, cfg = _load_problem(args)
    rows = measure_resources(problem, cfg, args.adder)
    print(f"{'component':<18}{'formula':<24}{'predicted':>10}{'actual':>8}  match")
    for row in rows:
        actual = "-" if row.actual is None else str(row.actual)
        match = "class-only" if not row.exact else ("yes" if row.match else "no")
        pred = f"{row.predicted:g}"
        print(f"{row.name:<18}{row.formula:<24}{pred:>10}{actual:>8}  {match}")
    ok = True
    for row in rows:
        key = row.name.lower()
        print(f"{key}.predicted={row.predicted:g}")
        if row.actual is not None:
            print(f"{key}.actual={row.actual}")
        print(f"{key}.runtime={row.runtime}")
        if row.exact:
            print(f"{key}.match={'yes' if row.match else 'no'}")
            ok &= bool(row.match)
        else:
            print(f"{key}.match=class-only")
    print(f"ok={'yes' if ok else 'no'}")
    return 0 if ok else 1


def cmd_spectrum(args) -> int:
    if args.random:
        rng = np.random.default_rng(args.seed)
        problems = [random_problem(rng) for _ in range(args.random)]
    else:
        problems = [_load_problem(args)[0]]
    ok = True
    for k, problem in enumerate(problems):
        report = spectrum_check(problem)
        prefix = f"problem{k}." if len(problems) > 1 else ""
        _emit([f"{prefix}N={problem.N}"] + [prefix + line for line in report.lines()])
        ok &= report.ok
    print(f"all_ok={'yes' if ok else 'no'}")
    return 0 if ok else 1


COMMANDS = {
    "synth": cmd_synth,
    "simulate": cmd_simulate,
    "check": cmd_check,
    "resources": cmd_resources,
    "spectrum": cmd_spectrum,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="femoracle",
                                     description="Reversible FEM matrix-entry oracle toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, config=True):
        if config:
            p.add_argument("--config", help="problem file (default: built-in N=8 chain)")
            p.add_argument("--layout", choices=LAYOUTS)
            p.add_argument("--series", choices=VARIANTS)
        p.add_argument("--seed", type=int, default=0)
        return p

    p = common(sub.add_parser("synth", help="write the oracle as a gate list"))
    p.add_argument("--out", help="output file (default: stdout)")
    p.add_argument("--lower-mcx", action="store_true", help="lower MCX gates to Toffolis")

    p = common(sub.add_parser("simulate", help="run a gate list on one basis state"), config=False)
    p.add_argument("circuit", nargs="?")
    p.add_argument("--input", help="bitstring with qubit 0 first, or name=value,...")
    p.add_argument("--lower-mcx", action="store_true", help=argparse.SUPPRESS)

    p = common(sub.add_parser("check", help="verify the oracle against the classical pipeline"))
    p.add_argument("circuit", nargs="?", help="gate-list file to check instead of a fresh build")
    p.add_argument("--far-samples", type=int, default=8)
    p.add_argument("--lower-mcx", action="store_true")

    p = common(sub.add_parser("resources", help="predicted versus built qubit counts"))
    p.add_argument("--adder", default="carry-ripple", choices=list(ADDERS))

    p = common(sub.add_parser("spectrum", help="dense eigenvalue check of the flagged matrix"))
    p.add_argument("--random", type=int, default=0, metavar="COUNT",
                   help="check COUNT random problems instead of the config")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
