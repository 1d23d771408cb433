"""Reference interpreter for log-RAM programs.

This module is the semantic authority.  ``run`` hands untraced runs to the
numba engine in :mod:`logram._fastvm`, which executes the common cases and
returns control here (mid-run) for anything it cannot represent exactly.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional

from .cost import CostLedger, CostParams, access_cost, position_bits, unit_cost
from .isa import (
    BinOp, Const, CyclicShift, Direct, Halt, Indirect, Input, JumpEq, MachineConfig,
    Not, Output, Program, VCopy, bit_length, instruction_class, validate_program,
)

__all__ = [
    "TrapKind", "Trap", "VmState", "RunResult", "TraceEntry", "LoadError",
    "load", "step", "run", "read_output", "tape_length", "format_trace",
]


class LoadError(ValueError):
    pass


class TrapKind(str, Enum):
    WIDTH_OVERFLOW = "WidthOverflow"
    DIV_BY_ZERO = "DivByZero"
    SUB_UNDERFLOW = "SubUnderflow"
    ARG_BOUND = "ArgBound"
    INPUT_RANGE = "InputRange"
    STEP_LIMIT = "StepLimit"


@dataclass(frozen=True)
class Trap:
    kind: TrapKind
    pc: int
    detail: str = ""


@dataclass(frozen=True)
class TraceEntry:
    pc: int
    ins: object
    operands: tuple
    cost: int
    operand_bits: int
    position_bits: int
    touched: tuple
    vcopy_args: Optional[tuple]


@dataclass
class VmState:
    program: Program
    cfg: MachineConfig
    tape: bytes
    registers: Dict[int, int] = field(default_factory=dict)
    pc: int = 0
    output: bytearray = field(default_factory=bytearray)
    ledger: CostLedger = field(default_factory=CostLedger)
    status: str = "running"
    trap: Optional[Trap] = None

    def reg(self, i: int) -> int:
        return self.registers.get(i, 0)


@dataclass(frozen=True)
class RunResult:
    state: VmState
    reason: str
    trace: Optional[List[TraceEntry]] = None

    @property
    def output(self) -> str:
        return read_output(self.state)

    @property
    def ledger(self) -> CostLedger:
        return self.state.ledger

    @property
    def trap(self) -> Optional[Trap]:
        return self.state.trap


class _Trapped(Exception):
    def __init__(self, kind: TrapKind, detail: str = ""):
        super().__init__(kind, detail)
        self.kind = kind
        self.detail = detail


_TAPE_RE = re.compile(r"^\s*(?:(\d*)\s*\*?\s*n)?\s*(?:([+-])?\s*(\d+))?\s*$")


def tape_length(expr: str, n: int) -> int:
    """Evaluate a ``.tape`` expression such as ``2n``, ``n+1`` or ``0``."""
    m = _TAPE_RE.match(expr)
    if not m or not expr.strip():
        raise LoadError(f"bad tape expression {expr!r}")
    coef, sign, const = m.groups()
    total = 0
    if "n" in expr:
        total = (int(coef) if coef else 1) * n
    if const is not None:
        total += -int(const) if sign == "-" else int(const)
    return total


def _tape_bytes(tape) -> bytes:
    if isinstance(tape, (bytes, bytearray)):
        if any(b not in (0, 1) for b in tape):
            raise LoadError("tape bytes must be 0 or 1")
        return bytes(tape)
    if any(ch not in "01" for ch in tape):
        raise LoadError("tape must be a string of 0/1 characters")
    return bytes(ord(ch) - 48 for ch in tape)


def load(p: Program, tape, cfg: MachineConfig) -> VmState:
    """Fresh machine state: all registers zero except ``R0 = n``."""
    report = validate_program(p, cfg)
    if not report.ok:
        raise LoadError("invalid program: " + "; ".join(report.violations))
    bits = _tape_bytes(tape)
    if p.tape is not None:
        expected = tape_length(p.tape, cfg.n)
        if len(bits) != expected:
            raise LoadError(f"tape has {len(bits)} bits, program expects {expected}")
    s = VmState(program=p, cfg=cfg, tape=bits)
    s.registers[0] = cfg.n
    if len(p) == 0:
        s.status = "halted"
    return s


def read_output(s: VmState) -> str:
    return "".join("1" if b else "0" for b in s.output)


class _Exec:
    """Per-instruction scratch: resolved values and what the accountant needs."""

    __slots__ = ("s", "touched", "lp", "resolved")

    def __init__(self, s: VmState):
        self.s = s
        self.touched = []
        self.lp = 0
        self.resolved = []

    def value(self, op, measured=True) -> int:
        regs = self.s.registers
        if isinstance(op, Const):
            v = op.value
        elif isinstance(op, Direct):
            self.touched.append(op.index)
            v = regs.get(op.index, 0)
        else:
            j = regs.get(op.index, 0)
            self.touched.append(op.index)
            self.touched.append(j)
            v = regs.get(j, 0)
        self.resolved.append(v)
        if measured:
            self.lp = max(self.lp, bit_length(v))
        return v

    def write(self, dst: int, v: int):
        if v >= 1 << self.s.cfg.W:
            raise _Trapped(TrapKind.WIDTH_OVERFLOW, f"R{dst} <- {v.bit_length()} bits")
        self.touched.append(dst)
        if v:
            self.s.registers[dst] = v
        else:
            self.s.registers.pop(dst, None)


def _binop(op: str, a: int, b: int) -> int:
    if op == "add":
        return a + b
    if op == "sub":
        if a < b:
            raise _Trapped(TrapKind.SUB_UNDERFLOW, f"{a} - {b}")
        return a - b
    if op == "mul":
        return a * b
    if op == "div":
        if b == 0:
            raise _Trapped(TrapKind.DIV_BY_ZERO)
        return a // b
    if op == "or":
        return a | b
    if op == "and":
        return a & b
    return a ^ b


def _rotate(v: int, amount: int, length: int, direction: str) -> int:
    mask = (1 << length) - 1
    low = v & mask
    r = amount % length
    if r:
        if direction == "right":
            r = length - r
        low = ((low << r) | (low >> (length - r))) & mask
    return (v & ~mask) | low


def step(s: VmState, trace: Optional[list] = None) -> VmState:
    """Execute one instruction in place; traps set ``status`` and leave ``pc``."""
    if s.status != "running":
        raise RuntimeError(f"machine is {s.status}")
    prog = s.program.instructions
    if s.pc >= len(prog):
        s.status = "halted"
        return s
    cfg = s.cfg
    if s.ledger.instructions >= cfg.max_steps:
        s.status = "trapped"
        s.trap = Trap(TrapKind.STEP_LIMIT, s.pc, f"{cfg.max_steps} steps")
        return s
    ins = prog[s.pc]
    x = _Exec(s)
    lpp = 0
    vargs = None
    next_pc = s.pc + 1
    W = cfg.W
    try:
        if isinstance(ins, BinOp):
            a = x.value(ins.a)
            b = x.value(ins.a2)
            x.write(ins.dst, _binop(ins.op, a, b))
        elif isinstance(ins, Not):
            a = x.value(ins.a)
            x.write(ins.dst, a ^ ((1 << W) - 1))
        elif isinstance(ins, CyclicShift):
            x.touched.append(ins.src)
            v = s.registers.get(ins.src, 0)
            x.resolved.append(v)
            x.lp = bit_length(v)
            amount = x.value(ins.amount, measured=False)
            length = x.value(ins.length, measured=False)
            if length == 0 or length > W or amount > 1 << W:
                raise _Trapped(TrapKind.ARG_BOUND, f"shift amount {amount} length {length}")
            lpp = max(position_bits(amount), position_bits(length))
            x.write(ins.dst, _rotate(v, amount, length, ins.direction))
        elif isinstance(ins, Input):
            start = x.value(ins.start, measured=False)
            stop = x.value(ins.stop, measured=False)
            if start > stop or stop >= len(s.tape):
                raise _Trapped(TrapKind.INPUT_RANGE, f"bits {start}..{stop} of {len(s.tape)}")
            span = stop - start + 1
            if span > W:
                raise _Trapped(TrapKind.ARG_BOUND, f"input span {span} > {W}")
            lpp = position_bits(span)
            x.lp = 0
            v = _bits_value(s.tape, start, stop)
            x.write(ins.dst, v)
        elif isinstance(ins, Output):
            x.touched.append(ins.src)
            v = s.registers.get(ins.src, 0)
            x.resolved.append(v)
            x.lp = bit_length(v)
            length = x.value(ins.length, measured=False)
            if length > W:
                raise _Trapped(TrapKind.ARG_BOUND, f"output length {length} > {W}")
            lpp = position_bits(length)
            for i in range(length - 1, -1, -1):
                s.output.append((v >> i) & 1)
        elif isinstance(ins, JumpEq):
            a = x.value(ins.a)
            b = x.value(ins.a2)
            if a == b:
                next_pc = ins.target
        elif isinstance(ins, VCopy):
            src = x.value(ins.src, measured=False)
            dst = x.value(ins.dst, measured=False)
            count = x.value(ins.count, measured=False)
            x.touched = []
            vargs = (src, dst, count)
            regs = s.registers
            snapshot = [regs.get(src + i, 0) for i in range(count)]
            for i, v in enumerate(snapshot):
                if v:
                    regs[dst + i] = v
                else:
                    regs.pop(dst + i, None)
        elif isinstance(ins, Halt):
            s.status = "halted"
        else:  # pragma: no cover - Program construction prevents this
            raise TypeError(f"not an instruction: {ins!r}")
    except _Trapped as t:
        s.status = "trapped"
        s.trap = Trap(t.kind, s.pc, t.detail)
        return s

    klass = instruction_class(ins)
    if cfg.model == "unit":
        cost = unit_cost(ins, x.lp, lpp, _params(cfg), vargs[2] if vargs else 0)
        s.ledger.charge(klass, cost)
    elif vargs is not None:
        cost = max(bit_length(vargs[0]), bit_length(vargs[1]), vargs[2])
        s.ledger.charge(klass, cost)
    elif klass is None:
        cost = 0
        s.ledger.charge(None, 0)
    else:
        op = 1 if klass == "boolean" else cfg.lam
        acc = sum(access_cost(i) for i in set(x.touched))
        cost = op + acc
        s.ledger.charge(klass, op, acc)
    if trace is not None:
        trace.append(TraceEntry(s.pc, ins, tuple(x.resolved), cost, x.lp, lpp,
                                tuple(x.touched), vargs))
    if s.status == "running":
        s.pc = next_pc
        if s.pc >= len(prog):
            s.status = "halted"
    return s


def _bits_value(tape: bytes, start: int, stop: int) -> int:
    v = 0
    for b in tape[start:stop + 1]:
        v = (v << 1) | b
    return v


_PARAMS_CACHE: Dict[MachineConfig, CostParams] = {}


def _params(cfg: MachineConfig) -> CostParams:
    p = _PARAMS_CACHE.get(cfg)
    if p is None:
        p = _PARAMS_CACHE[cfg] = CostParams.for_config(cfg)
    return p


def run(s: VmState, trace: bool = False, fast: Optional[bool] = None) -> RunResult:
    """Step until halted, trapped, or out of step budget.

    ``fast`` selects the numba engine (default: on unless tracing).  Both
    engines produce identical state and ledgers.
    """
    if s.status == "halted":
        return RunResult(s, "halted", [] if trace else None)
    if s.status != "running":
        raise RuntimeError(f"machine is {s.status}")
    records = [] if trace else None
    if fast is None:
        fast = not trace
    if fast and not trace:
        _run_mixed(s)
    while s.status == "running":
        step(s, records)
    reason = "halted" if s.status == "halted" else s.trap.kind.value
    return RunResult(s, reason, records)


def _run_mixed(s: VmState) -> None:
    # Alternate between engines: the fast one stops before anything it cannot
    # do exactly, the reference interpreter then takes a few steps.
    from . import _fastvm
    slow_steps = 1
    while s.status == "running":
        done = _fastvm.run_fast(s)
        if s.status != "running":
            return
        slow_steps = 1 if done >= 1024 else min(slow_steps * 2, 4096)
        for _ in range(slow_steps):
            step(s)
            if s.status != "running":
                return


def format_trace(entries: List[TraceEntry]) -> str:
    """One line per step: ``pc<TAB>instruction<TAB>operands<TAB>cost``."""
    from .asm import format_instruction
    lines = []
    for e in entries:
        ops = ",".join(str(v) for v in e.operands)
        lines.append(f"{e.pc}\t{format_instruction(e.ins, None)}\t{ops}\t{e.cost}")
    return "\n".join(lines) + ("\n" if lines else "")
