"""Command-line front end.

Exit codes: 0 success, 1 usage or bad flag value, 2 input parse failure,
3 semantic failure (zero-probability start, cycle, file mismatch),
4 internal error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from gibbsqc.bayesnet import (
    NetParseError,
    NetSemanticError,
    format_instantiation,
    joint_prob,
    load_net,
)
from gibbsqc.circuit import CircuitError, count_elementary
from gibbsqc.generator import (
    GenerationError,
    GenParams,
    ZeroProbabilityStart,
    gamma0,
    start_state,
    write_outputs,
    write_prerun,
)
from gibbsqc.text_formats import (
    FormatError,
    check_correspondence,
    format_angle,
    parse_english,
    parse_picture,
)

EXIT_OK, EXIT_USAGE, EXIT_PARSE, EXIT_SEMANTIC, EXIT_INTERNAL = range(5)

log = logging.getLogger("gibbsqc")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _add_start(p: argparse.ArgumentParser) -> None:
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--start", metavar="SPEC", help="starting state, e.g. A=a1,B=b1,C=c1")
    g.add_argument("--random-start", action="store_true", help="draw the starting state at random")
    p.add_argument("--seed", type=int, default=None, help="seed for --random-start (default 0)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="gibbsqc", description="Quantum Gibbs-sampling circuit generator")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("prerun", help="write probsF/probsT/blankets/nits from parents+states")
    p.add_argument("folder", type=Path)
    p.add_argument("--no-clobber", action="store_true", help="refuse to overwrite output files")

    p = sub.add_parser("generate", help="write quibbs_log/eng/pic for a starting state")
    p.add_argument("folder", type=Path)
    p.add_argument("--probe-bits", type=int, required=True, help="probe bits per PE step (a)")
    p.add_argument("--pe-steps", type=int, required=True, help="number of PE steps (c)")
    p.add_argument("--max-grover", type=int, required=True, help="maximum number of Grover steps")
    p.add_argument("--gamma-tol", type=float, required=True, help="gamma tolerance (degs)")
    p.add_argument("--delta-lambda", type=float, required=True, help="delta lambda (degs)")
    p.add_argument("--omit-v", action="store_true", help="leave out every gate of V (diagnostic)")
    p.add_argument("--no-clobber", action="store_true", help="refuse to overwrite output files")
    _add_start(p)

    p = sub.add_parser("validate", help="check an English/Picture file pair")
    p.add_argument("english", type=Path)
    p.add_argument("picture", type=Path)

    p = sub.add_parser("count", help="print the elementary operation count of an English file")
    p.add_argument("english", type=Path)

    p = sub.add_parser("prob", help="print P(x0) and the starting gamma")
    p.add_argument("folder", type=Path)
    _add_start(p)
    return parser


def _read(path: Path) -> str:
    try:
        return path.read_bytes().decode("ascii")
    except FileNotFoundError:
        raise NetParseError(f"missing file {path}") from None
    except UnicodeDecodeError:
        raise NetParseError(f"{path}: non-ASCII byte in file") from None


def _start(net, args):
    try:
        return start_state(net, args.start, args.seed)
    except ValueError as e:
        raise UsageError(str(e)) from None


def cmd_prerun(args) -> int:
    for path in write_prerun(args.folder, no_clobber=args.no_clobber):
        print(path)
    return EXIT_OK


def cmd_generate(args) -> int:
    net = load_net(args.folder)
    x0 = _start(net, args)
    try:
        params = GenParams(
            probe_bits_a=args.probe_bits,
            pe_steps_c=args.pe_steps,
            max_grover_steps=args.max_grover,
            gamma_tol_degs=args.gamma_tol,
            delta_lambda_degs=args.delta_lambda,
            start=x0,
            omit_v=args.omit_v,
            seed=args.seed,
        )
    except GenerationError as e:
        raise UsageError(str(e)) from None
    _, derived, paths = write_outputs(args.folder, net, params, no_clobber=args.no_clobber)
    print(f"Starting state: {format_instantiation(net, x0)}")
    print(f"Starting gamma (degs): {format_angle(round(derived.gamma0_degs, 10))}")
    print(f"Prob. of starting state: {derived.p_start!r}")
    print(f"Number of qubits: {derived.qubit_count}")
    print(f"Number of elementary operations: {derived.elementary_op_count}")
    for path in paths:
        print(path)
    return EXIT_OK


def cmd_validate(args) -> int:
    eng, pic = _read(args.english), _read(args.picture)
    parse_english(eng)
    pic_shapes = parse_picture(pic)
    report = check_correspondence(eng, pic)
    if report:
        for line in report:
            print(line, file=sys.stderr)
        return EXIT_SEMANTIC
    print(f"ok: {len(pic_shapes)} lines correspond")
    return EXIT_OK


def cmd_count(args) -> int:
    print(count_elementary(parse_english(_read(args.english))))
    return EXIT_OK


def cmd_prob(args) -> int:
    net = load_net(args.folder)
    x0 = _start(net, args)
    p = joint_prob(net, x0)
    print(f"Starting state: {format_instantiation(net, x0)}")
    print(f"Prob. of starting state: {p!r}")
    if p == 0.0:
        print("warning: starting state has zero probability; AFGA target is unreachable",
              file=sys.stderr)
    else:
        print(f"Starting gamma (degs): {format_angle(round(gamma0(p), 10))}")
    return EXIT_OK


COMMANDS = {
    "prerun": cmd_prerun,
    "generate": cmd_generate,
    "validate": cmd_validate,
    "count": cmd_count,
    "prob": cmd_prob,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s: %(message)s",
    )
    try:
        return COMMANDS[args.command](args)
    except (UsageError, FileExistsError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (ZeroProbabilityStart, NetSemanticError, GenerationError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_SEMANTIC
    except (NetParseError, FormatError, CircuitError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_PARSE
    except Exception as e:  # noqa: BLE001
        log.exception("internal error")
        print(f"internal error: {e}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
