"""``logram`` command line.

Exit codes: 0 success, 1 error, 2 usage, 10 precision exceeded, 11 width
overflow, 12 division by zero, 13 subtraction underflow, 14 argument bound,
15 input range, 16 step limit, 20 oracle mismatch.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Dict, List, Optional

from . import bench, predictor
from .asm import AsmError, assemble, disassemble
from .cost import ledger_report
from .isa import MachineConfig, validate_program
from .mulgen import ALGORITHMS, GenError, GenParams, build
from .vm import LoadError, format_trace, load, run, tape_length

EXIT_OK, EXIT_ERROR, EXIT_USAGE = 0, 1, 2

_CONFIG_KEYS = {"c": "c", "B": "block", "block": "block", "maxSteps": "max_steps",
                "max_steps": "max_steps"}


def read_config(path: Optional[str]) -> Dict[str, int]:
    """``key=value`` lines for c, B and maxSteps; ``#`` starts a comment."""
    if not path:
        return {}
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip()
        if not sep or key not in _CONFIG_KEYS:
            raise ValueError(f"{path}:{lineno}: expected c=, B= or maxSteps=, got {raw!r}")
        out[_CONFIG_KEYS[key]] = int(value.strip(), 0)
    return out


def machine_config(args, n: int, model: str = "unit") -> MachineConfig:
    fields = read_config(getattr(args, "config", None))
    for flag, name in (("c", "c"), ("block", "block"), ("max_steps", "max_steps")):
        v = getattr(args, flag, None)
        if v is not None:
            fields[name] = v
    return MachineConfig(n=n, model=model, **fields)


def _machine_flags(p: argparse.ArgumentParser):
    p.add_argument("--config", help="key=value file with c, B, maxSteps")
    p.add_argument("--c", type=int, help="register width multiplier (W = c*w)")
    p.add_argument("--block", "-B", type=int, help="staging block size")
    p.add_argument("--max-steps", type=int, help="step budget")


def _hex(text: str) -> int:
    t = text.lower()
    if t.startswith("0x"):
        t = t[2:]
    return int(t or "0", 16)


def _hex_out(bits: str) -> str:
    return "0x" + format(int(bits, 2) if bits else 0, "X")


def cmd_asm(args) -> int:
    src = Path(args.input).read_text()
    prog = assemble(src, name=Path(args.input).stem)
    if args.n:
        report = validate_program(prog, machine_config(args, args.n))
        for v in report.violations:
            print(f"violation: {v}", file=sys.stderr)
        if not report.ok:
            return EXIT_ERROR
    text = disassemble(prog)
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)
    print(f"instructions={len(prog)} registers={prog.registers_used()}", file=sys.stderr)
    return EXIT_OK


def cmd_run(args) -> int:
    prog = assemble(Path(args.program).read_text(), name=Path(args.program).stem)
    cfg = machine_config(args, args.n, args.model)
    length = tape_length(prog.tape, args.n) if prog.tape is not None else None
    value = _hex(args.tape_hex) if args.tape_hex else 0
    if length is None:
        length = value.bit_length()
    if value.bit_length() > length:
        raise ValueError(f"tape value needs {value.bit_length()} bits, tape holds {length}")
    res = run(load(prog, format(value, f"0{length}b") if length else "", cfg), trace=args.trace)
    if args.trace:
        sys.stdout.write(format_trace(res.trace))
    print(f"status={res.reason}")
    print(f"output_bits={len(res.output)}")
    print(f"output={_hex_out(res.output)}")
    sys.stdout.write(ledger_report(res.ledger))
    if res.trap is not None:
        err = bench.TrapError(res.trap)
        print(f"error: {err}", file=sys.stderr)
        return err.exit_code
    return EXIT_OK


def cmd_mul(args) -> int:
    a, b = _hex(args.a_hex), _hex(args.b_hex)
    n = args.n or bench.padded_size(args.alg, max(a.bit_length(), b.bit_length(), 1))
    if max(a.bit_length(), b.bit_length()) > n:
        raise ValueError(f"operands do not fit in n={n} bits")
    cfg = machine_config(args, n, args.model)
    prog, meta = build(args.alg, n, cfg, GenParams(), args.programs)
    out = bench.execute(prog, args.alg, n, a, b, cfg)
    label = "sum" if args.alg == "add" else "product"
    print(f"{label}={_hex_out(out.output)}")
    print(f"algorithm={args.alg}")
    print(f"n={n}")
    print(f"model={args.model}")
    sys.stdout.write(ledger_report(out.ledger))
    print("oracle=ok")
    return EXIT_OK


def cmd_sweep(args) -> int:
    spec = bench.SweepSpec(
        algorithms=[a for a in args.algs.split(",") if a],
        sizes=bench.parse_sizes(args.sizes),
        models=[m for m in args.models.split(",") if m],
        trials=args.trials, seed=args.seed)
    base = machine_config(args, spec.sizes[0] if spec.sizes else 2)

    def progress(row):
        if args.verbose:
            print(f"{row['algorithm']} n={row['n']} {row['model']} trial={row['trial']} "
                  f"cost={row['total_cost']}", file=sys.stderr)

    rows = bench.sweep_rows(spec, base, args.programs, progress)
    text = bench.rows_to_csv(rows)
    if args.out:
        Path(args.out).write_text(text)
        print(f"wrote {len(rows)} rows to {args.out}")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_predict(args) -> int:
    form = predictor.cost_form(args.alg, args.model,
                               published=(args.model == "tm" and not args.corrected_exponent),
                               a=args.a)
    value = predictor.predict(form, args.n)
    print(f"algorithm={form.algorithm}")
    print(f"model={form.model}")
    print(f"shape={form.shape}")
    print(f"a={form.a:g}")
    print(f"n={args.n}")
    print(f"log_star={predictor.log_star(args.n)}")
    print(f"prediction={value:.6g}")
    return EXIT_OK


def cmd_fit(args) -> int:
    text, _ = bench.fit_report(bench.read_csv(args.csv), args.alg, args.model)
    sys.stdout.write(text)
    return EXIT_OK


def cmd_plot(args) -> int:
    rows = bench.read_csv(args.csv)
    Path(args.output).write_text(bench.svg_chart(rows))
    print(f"wrote {args.output}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="logram", description=__doc__.split("\n")[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("asm", help="assemble and print the canonical listing")
    p.add_argument("input")
    p.add_argument("-o", "--output")
    p.add_argument("--n", type=int, help="also validate against the machine for this n")
    _machine_flags(p)
    p.set_defaults(func=cmd_asm)

    p = sub.add_parser("run", help="run an assembled program on a tape")
    p.add_argument("program")
    p.add_argument("--tape-hex", default="", help="tape contents as a hex number")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--model", choices=bench.MODELS, default="unit")
    p.add_argument("--trace", action="store_true")
    _machine_flags(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("mul", help="multiply (or add) two numbers with a generated program")
    p.add_argument("--alg", choices=ALGORITHMS, required=True)
    p.add_argument("--a-hex", required=True)
    p.add_argument("--b-hex", required=True)
    p.add_argument("--model", choices=bench.MODELS, default="unit")
    p.add_argument("--n", type=int, help="operand length (default: padded from the inputs)")
    p.add_argument("--programs", default="programs", help="program cache directory")
    _machine_flags(p)
    p.set_defaults(func=cmd_mul)

    p = sub.add_parser("sweep", help="measure ledgers over sizes and write CSV")
    p.add_argument("--algs", required=True, help="comma list, e.g. ssc,ssf")
    p.add_argument("--sizes", required=True, help="start:stop:x2 or comma list")
    p.add_argument("--models", default="unit")
    p.add_argument("--trials", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.add_argument("--programs", default="programs")
    p.add_argument("-v", "--verbose", action="store_true")
    _machine_flags(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("predict", help="evaluate an asymptotic cost form")
    p.add_argument("--alg", choices=predictor.ALGORITHMS, required=True)
    p.add_argument("--model", choices=predictor.MODELS, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--a", type=float, default=1.0, help="constant factor")
    p.add_argument("--corrected-exponent", action="store_true",
                   help="use 2^max(0, log* n - 4) for fr/dkssr in the tm regime")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("fit", help="rank cost forms against a sweep CSV")
    p.add_argument("csv")
    p.add_argument("--alg", required=True)
    p.add_argument("--model", choices=bench.MODELS, default="unit")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("plot", help="log-log SVG chart of a sweep CSV")
    p.add_argument("csv")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_plot)
    return ap


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except bench.BenchError as e:
        print(f"error: {e}", file=sys.stderr)
        return e.exit_code
    except (AsmError, LoadError, GenError, predictor.FitError, ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
