"""Running generated programs against the oracle, size sweeps, fits and charts."""

from __future__ import annotations

import csv
import io
import math
import random
import time
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from . import predictor
from .cost import CostLedger
from .isa import MachineConfig, Program
from .mulgen import ALGORITHMS, MIN_SIZE, GenParams, build, sentinel
from .oracle import bignat_to_bits, o_add, o_mul_school
from .vm import Trap, load, run

MODELS = ("unit", "depth")
CLASS_COLUMNS = ("boolean", "addsub", "muldiv", "shift", "io", "jump", "vcopy")
CSV_COLUMNS = ("algorithm", "n", "model", "trial", "total_cost") + CLASS_COLUMNS + (
    "access_cost", "instruction_count", "wall_ms")


class BenchError(RuntimeError):
    """Base class for harness failures that carry a process exit code."""

    exit_code = 1


class PrecisionExceeded(BenchError):
    exit_code = 10


class TrapError(BenchError):
    CODES = {"WidthOverflow": 11, "DivByZero": 12, "SubUnderflow": 13, "ArgBound": 14,
             "InputRange": 15, "StepLimit": 16}

    def __init__(self, trap: Trap, where: str = ""):
        super().__init__(f"{trap.kind.value} at pc {trap.pc}{where}"
                         + (f": {trap.detail}" if trap.detail else ""))
        self.trap = trap
        self.exit_code = self.CODES[trap.kind.value]


class OracleMismatch(BenchError):
    exit_code = 20


def padded_size(alg: str, bits: int) -> int:
    """Smallest admissible power-of-two operand length holding ``bits`` bits."""
    n = 1 << max(0, bits - 1).bit_length()
    return max(n, MIN_SIZE[alg])


def operands(seed: int, n: int, trial: int) -> Tuple[int, int]:
    """Reproducible random operand pair; identical for every algorithm and model."""
    rng = random.Random(f"{seed}:{n}:{trial}")
    return rng.getrandbits(n), rng.getrandbits(n)


def expected_bits(alg: str, n: int, a: int, b: int, use_oracle: bool = True) -> str:
    if alg == "add":
        return bignat_to_bits(o_add(a, b) if use_oracle else a + b, n + 1)
    return bignat_to_bits(o_mul_school(a, b) if use_oracle else a * b, 2 * n)


@dataclass
class Outcome:
    output: str
    ledger: CostLedger
    wall_ms: float


def execute(prog: Program, alg: str, n: int, a: int, b: int, cfg: MachineConfig,
            use_oracle: bool = True) -> Outcome:
    """Run one operand pair and check the result.

    Raises :class:`TrapError`, :class:`PrecisionExceeded` or
    :class:`OracleMismatch`; never returns a wrong product.
    """
    tape = format(a, f"0{n}b") + format(b, f"0{n}b")
    t0 = time.perf_counter()
    res = run(load(prog, tape, cfg))
    wall = (time.perf_counter() - t0) * 1000.0
    if res.trap is not None:
        raise TrapError(res.trap, f" ({alg}, n={n})")
    out = res.output
    if out == sentinel(alg, n):
        raise PrecisionExceeded(f"{alg} lost precision at n={n}")
    if out != expected_bits(alg, n, a, b, use_oracle):
        raise OracleMismatch(f"{alg} at n={n} disagrees with the oracle")
    return Outcome(out, res.ledger, wall)


# -- sweeps -------------------------------------------------------------------

def parse_sizes(text: str) -> List[int]:
    """``start:stop:x2`` (geometric, inclusive) or a comma list."""
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3 or not parts[2].startswith("x"):
            raise ValueError(f"size range must look like 4096:65536:x2, got {text!r}")
        start, stop, factor = int(parts[0]), int(parts[1]), int(parts[2][1:])
        if factor < 2 or start < 1 or stop < start:
            raise ValueError(f"bad size range {text!r}")
        out = []
        n = start
        while n <= stop:
            out.append(n)
            n *= factor
        return out
    return [int(x) for x in text.split(",") if x.strip()]


@dataclass
class SweepSpec:
    algorithms: Sequence[str]
    sizes: Sequence[int]
    models: Sequence[str] = ("unit",)
    trials: int = 5
    seed: int = 0
    params: GenParams = field(default_factory=GenParams)

    def validate(self):
        for alg in self.algorithms:
            if alg not in ALGORITHMS:
                raise ValueError(f"unknown algorithm {alg!r}")
            for n in self.sizes:
                if n < MIN_SIZE[alg] or n & (n - 1):
                    raise ValueError(f"{alg} needs a power of two n >= {MIN_SIZE[alg]}, got {n}")
        for m in self.models:
            if m not in MODELS:
                raise ValueError(f"unknown model {m!r}")
        if self.trials < 1:
            raise ValueError("need at least one trial")
        if self.seed < 0:
            raise ValueError("seed must be nonnegative")


def sweep_rows(spec: SweepSpec, base_cfg: MachineConfig,
               cache_dir: Optional[Path] = None, progress=None) -> List[Dict[str, object]]:
    """One row per (algorithm, n, model, trial), in that sort order."""
    spec.validate()
    rows = []
    algs = sorted(set(spec.algorithms), key=ALGORITHMS.index)
    models = sorted(set(spec.models), key=MODELS.index)
    for alg in algs:
        for n in sorted(set(spec.sizes)):
            cfg = base_cfg.replace(n=n)
            prog, _ = build(alg, n, cfg, spec.params, cache_dir)
            for model in models:
                mcfg = cfg.replace(model=model)
                for trial in range(spec.trials):
                    a, b = operands(spec.seed, n, trial)
                    out = execute(prog, alg, n, a, b, mcfg, use_oracle=False)
                    d = out.ledger.as_dict()
                    row = {"algorithm": alg, "n": n, "model": model, "trial": trial}
                    row.update({k: d[k] for k in CSV_COLUMNS[4:-1]})
                    row["wall_ms"] = f"{out.wall_ms:.1f}"
                    rows.append(row)
                    if progress:
                        progress(row)
    return rows


def rows_to_csv(rows: Iterable[Dict[str, object]]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow(r)
    return buf.getvalue()


def read_csv(path) -> List[Dict[str, str]]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        missing = set(CSV_COLUMNS) - set(reader.fieldnames or ())
        if missing:
            raise ValueError(f"{path}: missing columns {', '.join(sorted(missing))}")
        return list(reader)


def mean_costs(rows: Iterable[Dict[str, str]]) -> Dict[Tuple[str, str], Dict[int, float]]:
    """(algorithm, model) -> n -> mean total_cost over trials."""
    acc: Dict[Tuple[str, str], Dict[int, List[int]]] = defaultdict(lambda: defaultdict(list))
    for r in rows:
        acc[(r["algorithm"], r["model"])][int(r["n"])].append(int(r["total_cost"]))
    return {k: {n: sum(v) / len(v) for n, v in sorted(d.items())} for k, d in acc.items()}


# -- fitting ------------------------------------------------------------------

def fit_report(rows: Sequence[Dict[str, str]], alg: str, model: str) -> Tuple[str, List]:
    series = mean_costs(rows).get((alg, model), {})
    if len(series) < 4:
        raise predictor.FitError(
            f"need at least 4 sizes for {alg}/{model}, CSV has {len(series)}")
    samples = list(series.items())
    ranking = predictor.compare_forms(samples, predictor.generic_candidates(alg, model))
    lines = [f"fit {alg} {model} over {len(samples)} sizes"]
    for i, fr in enumerate(ranking, 1):
        lines.append(f"  {i}. {fr.form.shape:<28} a={fr.form.a:.6g} residual={fr.residual:.4f}")
    best = ranking[0]
    lines += [f"best_shape={best.form.shape}", f"constant={best.form.a:.6g}",
              f"residual={best.residual:.6f}",
              "ranking=" + ";".join(f"{fr.form.shape}:{fr.residual:.6f}" for fr in ranking)]
    return "\n".join(lines) + "\n", ranking


# -- charts -------------------------------------------------------------------

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
           "#e377c2", "#17becf", "#7f7f7f", "#bcbd22", "#393b79", "#637939")


def svg_chart(rows: Sequence[Dict[str, str]], title: str = "model cost vs operand length") -> str:
    """Log-log line chart, one polyline per (algorithm, model).

    Output depends only on the cost columns, so charts of sweeps that differ
    only in ``wall_ms`` are byte-identical.
    """
    series = mean_costs(rows)
    if not series:
        raise ValueError("no rows to plot")
    keys = sorted(series, key=lambda k: (ALGORITHMS.index(k[0]) if k[0] in ALGORITHMS else 99,
                                         k[0], MODELS.index(k[1]) if k[1] in MODELS else 9, k[1]))
    xs = [math.log2(n) for d in series.values() for n in d]
    ys = [math.log10(c) for d in series.values() for c in d.values() if c > 0]
    x0, x1 = math.floor(min(xs)), math.ceil(max(xs))
    y0, y1 = math.floor(min(ys)), math.ceil(max(ys))
    if x1 == x0:
        x1 += 1
    if y1 == y0:
        y1 += 1
    left, right, top, bottom = 70, 190, 40, 50
    pw, ph = 520, 340
    width, height = left + pw + right, top + ph + bottom

    def px(v):
        return left + (v - x0) / (x1 - x0) * pw

    def py(v):
        return top + ph - (v - y0) / (y1 - y0) * ph

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">',
           f'<rect width="{width}" height="{height}" fill="#ffffff"/>',
           f'<text x="{left + pw / 2:.1f}" y="22" text-anchor="middle" font-size="14">{title}</text>',
           f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="#333"/>']
    for e in range(x0, x1 + 1):
        x = px(e)
        out.append(f'<line x1="{x:.1f}" y1="{top}" x2="{x:.1f}" y2="{top + ph}" stroke="#ddd"/>')
        out.append(f'<text x="{x:.1f}" y="{top + ph + 16}" text-anchor="middle">2^{e}</text>')
    for e in range(y0, y1 + 1):
        y = py(e)
        out.append(f'<line x1="{left}" y1="{y:.1f}" x2="{left + pw}" y2="{y:.1f}" stroke="#ddd"/>')
        out.append(f'<text x="{left - 6}" y="{y + 4:.1f}" text-anchor="end">1e{e}</text>')
    out.append(f'<text x="{left + pw / 2:.1f}" y="{height - 10}" text-anchor="middle">n (bits per operand)</text>')
    out.append(f'<text x="16" y="{top + ph / 2:.1f}" text-anchor="middle" '
               f'transform="rotate(-90 16 {top + ph / 2:.1f})">total cost</text>')
    for i, key in enumerate(keys):
        color = PALETTE[i % len(PALETTE)]
        pts = " ".join(f"{px(math.log2(n)):.1f},{py(math.log10(c)):.1f}"
                       for n, c in series[key].items() if c > 0)
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="2" points="{pts}"/>')
        ly = top + 14 + 16 * i
        out.append(f'<line x1="{left + pw + 12}" y1="{ly - 4}" x2="{left + pw + 32}" '
                   f'y2="{ly - 4}" stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{left + pw + 38}" y="{ly}">{key[0]} ({key[1]})</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
