"""Command-line entry point.

Exit codes: 0 no findings, 1 warnings only, 2 errors, 3 usage, parse or
type failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .cfg import EmptyFunction
from .detectors import ERROR
from .frontend import LexError, ParseError, TypeCheckError
from .ir import LoweringError
from .pipeline import AnalysisError, analyze_file
from .report import render_json, render_text
from .solver import backend_chain
from .solver.external import DEFAULT_TIMEOUT_MS

EXIT_CLEAN, EXIT_WARNINGS, EXIT_ERRORS, EXIT_FAILURE = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_FAILURE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="solinterval",
                description="Interval analysis with path constraints for MiniSol functions.")
    p.add_argument("--file", required=True, help="source file")
    p.add_argument("--contract", required=True,
                   help='contract name ("" selects free functions)')
    p.add_argument("--function", required=True, help="function name")
    p.add_argument("--out", help="report path (default: standard output)")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--solver", help="external SMT-LIB2 solver command, e.g. 'z3 -in'")
    p.add_argument("--emit-smt", metavar="DIR", help="write node_<label>.smt2 per node")
    p.add_argument("--dump-cfg", metavar="PATH", help="write the CFG in DOT format")
    p.add_argument("--timeout-ms", type=int, default=DEFAULT_TIMEOUT_MS,
                   help="per-query solver timeout (default %(default)s)")
    return p


def run_cli(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        analysis = analyze_file(args.file, args.contract, args.function,
                                backend_chain(args.solver, args.timeout_ms))
    except OSError as exc:
        print(f"error: cannot read {args.file}: {exc.strerror or exc}", file=sys.stderr)
        return EXIT_FAILURE
    except (LexError, ParseError, TypeCheckError, LoweringError, EmptyFunction, AnalysisError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILURE

    text = render_json(analysis.document) if args.format == "json" else render_text(analysis.document)
    try:
        if args.out:
            Path(args.out).write_text(text)
        else:
            sys.stdout.write(text)
        if args.emit_smt:
            out_dir = Path(args.emit_smt)
            out_dir.mkdir(parents=True, exist_ok=True)
            for label, script in analysis.smt_scripts().items():
                (out_dir / f"node_{label}.smt2").write_text(script)
        if args.dump_cfg:
            Path(args.dump_cfg).write_text(analysis.cfg.to_dot())
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILURE

    if any(f.severity == ERROR for f in analysis.findings):
        return EXIT_ERRORS
    return EXIT_WARNINGS if analysis.findings else EXIT_CLEAN


def main() -> None:
    sys.exit(run_cli())
