"""Command-line runner for mini-IL programs.

    cherimem run FILE [--cap-size 16|32] [--trace] [--max-steps N]
    cherimem corpus

``FILE`` may also name a bundled corpus program (``listing_1`` or
``corpus/listing_1.gilc``). Exit codes: 0 halted, 2 parse error, 10
capability error, 11 logic error, 12 failed assertion, 13 step budget
exhausted.
"""

import argparse
import sys
from dataclasses import dataclass
from pathlib import Path

from .errors import CapErr
from .interp import DEFAULT_MAX_STEPS, AssertFailed, Faulted, Halted, run
from .parser import ParseError, parse_program
from .value import CAP_SIZES, DEFAULT_CAP_SIZE

CORPUS_DIR = Path(__file__).parent / "corpus"

EXIT_HALTED = 0
EXIT_IO = 1
EXIT_PARSE = 2
EXIT_CAP_ERR = 10
EXIT_LOGIC_ERR = 11
EXIT_ASSERT = 12
EXIT_BUDGET = 13


@dataclass(frozen=True)
class RunConfig:
    cap_size: int = DEFAULT_CAP_SIZE
    trace: bool = False
    max_steps: int = DEFAULT_MAX_STEPS

    def __post_init__(self):
        if self.cap_size not in CAP_SIZES:
            raise ValueError(f"cap_size must be one of {CAP_SIZES}")
        if self.max_steps < 1:
            raise ValueError("max_steps must be at least 1")


def exit_code(status):
    if isinstance(status, Halted):
        return EXIT_HALTED
    if isinstance(status, Faulted):
        return EXIT_CAP_ERR if isinstance(status.error, CapErr) else EXIT_LOGIC_ERR
    if isinstance(status, AssertFailed):
        return EXIT_ASSERT
    return EXIT_BUDGET


def status_line(state):
    status = state.status
    if isinstance(status, Halted):
        return f"Halted with code {status.code} after {state.steps} steps"
    if isinstance(status, Faulted):
        prefix = "CHERI error" if isinstance(status.error, CapErr) else "Logic error"
        return f"{prefix}: {status.error.kind} at pc={status.pc}"
    if isinstance(status, AssertFailed):
        return f"Assertion failed at pc={status.pc}: {status.message}"
    return f"Step budget exhausted after {state.steps} steps at pc={state.pc}"


def resolve(path):
    p = Path(path)
    if p.exists():
        return p
    name = p.name if p.suffix else p.name + ".gilc"
    bundled = CORPUS_DIR / name
    return bundled if bundled.exists() else p


def corpus_files():
    return sorted(CORPUS_DIR.glob("*.gilc"))


def run_file(path, config=RunConfig(), out=None, err=None):
    out = out or sys.stdout
    err = err or sys.stderr
    src = resolve(path)
    try:
        text = src.read_text()
    except OSError as e:
        print(f"{path}: {e.strerror or e}", file=err)
        return EXIT_IO
    try:
        program = parse_program(text)
    except ParseError as e:
        print(f"{src}:{e.line}:{e.col}: parse error: {e.message}", file=err)
        return EXIT_PARSE
    state, trace = run(program, config.max_steps, config.cap_size, config.trace)
    for line in trace:
        print(line, file=out)
    if isinstance(state.status, Faulted) and state.status.error.detail:
        print(f"{src}:{program.lines[state.status.pc]}: {state.status.error.detail}", file=err)
    print(status_line(state), file=out)
    return exit_code(state.status)


def _positive(s):
    n = int(s)
    if n < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return n


def build_parser():
    parser = argparse.ArgumentParser(prog="cherimem",
                                     description="Run mini-IL programs on the CHERI-C memory model")
    sub = parser.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run a program")
    r.add_argument("file")
    r.add_argument("--cap-size", type=int, choices=CAP_SIZES, default=DEFAULT_CAP_SIZE)
    r.add_argument("--trace", action="store_true", help="print each executed instruction")
    r.add_argument("--max-steps", type=_positive, default=DEFAULT_MAX_STEPS)
    sub.add_parser("corpus", help="list bundled corpus programs")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    if args.command == "corpus":
        for f in corpus_files():
            print(f"corpus/{f.name}")
        return 0
    config = RunConfig(args.cap_size, args.trace, args.max_steps)
    return run_file(args.file, config)


if __name__ == "__main__":
    sys.exit(main())
