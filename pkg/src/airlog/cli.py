"""Command-line entry points: compile, run, bench, oracle.

Exit codes: 0 success, 1 domain/validation failure, 2 I/O failure,
3 no stable model (oracle only).
"""

from __future__ import annotations

import argparse
import sys

from .compiler import compile_base, compile_step, compile_volatile, step_schema
from .engine import METRICS_HEADER, Mode, format_metrics_row, run
from .errors import AirlogError, KbValidationError
from .kb import load_kb
from .lptext import format_rule, parse_program
from .observation import read_samples
from .semantics import enumerate_stable

EXIT_OK = 0
EXIT_DOMAIN = 1
EXIT_IO = 2
EXIT_NO_MODEL = 3


def _read_text(path: str) -> str:
    with open(path, encoding="utf-8") as f:
        return f.read()


def _load_kb_file(path: str):
    return load_kb(_read_text(path))


def cmd_compile(args) -> int:
    kb = _load_kb_file(args.kb)
    if args.steps < 1:
        raise AirlogError("--steps must be at least 1")
    schema = step_schema(kb)
    lines = ["% base"]
    lines += [format_rule(r) for r in compile_base(kb)]
    for t in range(1, args.steps + 1):
        lines.append(f"% cumulative({t})")
        lines += [format_rule(r) for r in compile_step(kb, t, (), schema).ordered]
    lines.append(f"% volatile({args.steps})")
    lines.append(format_rule(compile_volatile(args.steps)))
    with open(args.out, "w", encoding="utf-8") as f:
        f.write("\n".join(lines) + "\n")
    return EXIT_OK


def cmd_run(args) -> int:
    kb = _load_kb_file(args.kb)
    samples = read_samples(args.samples)
    annotations, metrics = run(
        kb, samples, mode=Mode(args.mode), granularity=args.granularity
    )
    with open(args.out, "w", encoding="utf-8") as f:
        for a in annotations:
            f.write(a.to_json_line() + "\n")
    with open(args.metrics, "w", encoding="utf-8") as f:
        f.write(METRICS_HEADER + "\n")
        for row in metrics:
            f.write(format_metrics_row(row) + "\n")
    return EXIT_OK


def cmd_bench(args) -> int:
    kb = _load_kb_file(args.kb)
    samples = read_samples(args.samples)
    rows = []
    for mode in (Mode.INCREMENTAL, Mode.RESTART):
        _, metrics = run(kb, samples, mode=mode, granularity=args.granularity)
        rows += metrics
    with open(args.out_csv, "w", encoding="utf-8") as f:
        f.write(METRICS_HEADER + "\n")
        for row in rows:
            f.write(format_metrics_row(row) + "\n")
    return EXIT_OK


def cmd_oracle(args) -> int:
    if not 1 <= args.max_atoms <= 20:
        raise AirlogError("--max-atoms must be between 1 and 20")
    rules = parse_program(_read_text(args.program))
    # the budget bounds the enumeration space: atoms left undefined after
    # well-founded pruning (a deterministic program of any size passes)
    models = enumerate_stable(rules, max_atoms=args.max_atoms)
    if not models:
        return EXIT_NO_MODEL
    for line in sorted(" ".join(sorted(map(str, m))) for m in models):
        print(line)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="airlog",
        description="Incremental answer-set stream reasoning over smart-home sensor data",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compile", help="translate a KB into a textual logic program")
    p.add_argument("--kb", required=True)
    p.add_argument("--steps", type=int, required=True, metavar="N")
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_compile)

    p = sub.add_parser("run", help="replay a sample stream and annotate horizons")
    p.add_argument("--kb", required=True)
    p.add_argument("--samples", required=True)
    p.add_argument("--granularity", type=int, default=1, metavar="SEC")
    p.add_argument("--mode", choices=[m.value for m in Mode], default=Mode.INCREMENTAL.value)
    p.add_argument("--out", required=True)
    p.add_argument("--metrics", required=True)
    p.set_defaults(fn=cmd_run)

    p = sub.add_parser("bench", help="run both modes and write combined metrics")
    p.add_argument("--kb", required=True)
    p.add_argument("--samples", required=True)
    p.add_argument("--granularity", type=int, default=1, metavar="SEC")
    p.add_argument("--out-csv", required=True)
    p.set_defaults(fn=cmd_bench)

    p = sub.add_parser("oracle", help="enumerate all stable models of a textual program")
    p.add_argument("--program", required=True)
    p.add_argument("--max-atoms", type=int, default=20, metavar="K")
    p.set_defaults(fn=cmd_oracle)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except KbValidationError as e:
        for v in e.violations:
            print(str(v), file=sys.stderr)
        return EXIT_DOMAIN
    except (AirlogError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_DOMAIN
    except OSError as e:
        print(f"i/o error: {e}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
