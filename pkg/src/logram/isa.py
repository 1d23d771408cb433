"""Instruction set of the log-RAM: operands, instructions, programs, machine configuration."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Optional, Union

__all__ = [
    "Const", "Direct", "Indirect", "Operand",
    "BinOp", "Not", "CyclicShift", "Input", "Output", "JumpEq", "VCopy", "Halt",
    "Instruction", "Program", "MachineConfig", "ValidationReport",
    "BINOPS", "BOOLEAN_OPS", "ARITH_OPS", "INSTRUCTION_CLASSES",
    "bit_length", "ceil_log2", "instruction_class", "validate_program",
]


BOOLEAN_OPS = ("or", "and", "xor")
ARITH_OPS = ("add", "sub", "mul", "div")
BINOPS = BOOLEAN_OPS + ARITH_OPS

INSTRUCTION_CLASSES = ("boolean", "addsub", "muldiv", "shift", "io", "jump", "vcopy")


def bit_length(v: int) -> int:
    """Bits in the binary representation of ``v``; ``bit_length(0) == 1``."""
    if v < 0:
        raise ValueError("bit_length of a negative value")
    return max(1, v.bit_length())


def ceil_log2(v: int) -> int:
    """Smallest ``e`` with ``2**e >= v`` (0 for ``v <= 1``)."""
    return (v - 1).bit_length() if v > 1 else 0


@dataclass(frozen=True)
class Const:
    value: int

    def __post_init__(self):
        if self.value < 0:
            raise ValueError(f"negative constant {self.value}")


@dataclass(frozen=True)
class Direct:
    index: int

    def __post_init__(self):
        if self.index < 0:
            raise ValueError(f"negative register index {self.index}")


@dataclass(frozen=True)
class Indirect:
    """``R[R[index]]``."""

    index: int

    def __post_init__(self):
        if self.index < 0:
            raise ValueError(f"negative register index {self.index}")


Operand = Union[Const, Direct, Indirect]


@dataclass(frozen=True)
class BinOp:
    op: str
    dst: int
    a: Operand
    a2: Operand

    def __post_init__(self):
        if self.op not in BINOPS:
            raise ValueError(f"unknown binary op {self.op!r}")


@dataclass(frozen=True)
class Not:
    dst: int
    a: Operand


@dataclass(frozen=True)
class CyclicShift:
    dst: int
    src: int
    direction: str
    amount: Operand
    length: Operand

    def __post_init__(self):
        if self.direction not in ("left", "right"):
            raise ValueError(f"bad shift direction {self.direction!r}")


@dataclass(frozen=True)
class Input:
    """Read tape bits ``start..stop`` (inclusive, MSB first) into ``dst``."""

    dst: int
    start: Operand
    stop: Operand


@dataclass(frozen=True)
class Output:
    src: int
    length: Operand


@dataclass(frozen=True)
class JumpEq:
    a: Operand
    a2: Operand
    target: int


@dataclass(frozen=True)
class VCopy:
    src: Operand
    dst: Operand
    count: Operand


@dataclass(frozen=True)
class Halt:
    pass


Instruction = Union[BinOp, Not, CyclicShift, Input, Output, JumpEq, VCopy, Halt]


def instruction_class(ins: Instruction) -> Optional[str]:
    """Ledger class of an instruction; ``None`` for halt (never charged)."""
    if isinstance(ins, BinOp):
        if ins.op in BOOLEAN_OPS:
            return "boolean"
        return "addsub" if ins.op in ("add", "sub") else "muldiv"
    if isinstance(ins, Not):
        return "boolean"
    if isinstance(ins, CyclicShift):
        return "shift"
    if isinstance(ins, (Input, Output)):
        return "io"
    if isinstance(ins, JumpEq):
        return "jump"
    if isinstance(ins, VCopy):
        return "vcopy"
    return None


@dataclass(frozen=True)
class Program:
    """Label-resolved instruction sequence.

    ``labels`` is kept only for disassembly and does not take part in equality.
    ``tape`` is the expected tape length as an expression of ``n`` (``"2n"``,
    ``"0"``, ...) or ``None`` when unchecked.
    """

    instructions: tuple
    labels: Mapping[str, int] = field(default_factory=dict, compare=False)
    name: str = ""
    tape: Optional[str] = None

    def __post_init__(self):
        object.__setattr__(self, "instructions", tuple(self.instructions))

    def __len__(self):
        return len(self.instructions)

    def registers_used(self) -> int:
        """Highest register index named statically by the program (0 if none)."""
        top = 0
        for ins in self.instructions:
            for r in _static_registers(ins):
                top = max(top, r)
        return top


def _operand_registers(op: Operand):
    if isinstance(op, (Direct, Indirect)):
        yield op.index


def _static_registers(ins: Instruction):
    if isinstance(ins, BinOp):
        yield ins.dst
        yield from _operand_registers(ins.a)
        yield from _operand_registers(ins.a2)
    elif isinstance(ins, Not):
        yield ins.dst
        yield from _operand_registers(ins.a)
    elif isinstance(ins, CyclicShift):
        yield ins.dst
        yield ins.src
        yield from _operand_registers(ins.amount)
        yield from _operand_registers(ins.length)
    elif isinstance(ins, Input):
        yield ins.dst
        yield from _operand_registers(ins.start)
        yield from _operand_registers(ins.stop)
    elif isinstance(ins, Output):
        yield ins.src
        yield from _operand_registers(ins.length)
    elif isinstance(ins, JumpEq):
        yield from _operand_registers(ins.a)
        yield from _operand_registers(ins.a2)
    elif isinstance(ins, VCopy):
        for op in (ins.src, ins.dst, ins.count):
            if isinstance(op, Const):
                continue
            yield from _operand_registers(op)


@dataclass(frozen=True)
class MachineConfig:
    """Machine parameters.

    ``w = ceil(log2 n)`` is the cost word, ``W = c * w`` the hard register
    width: every register value stays below ``2**W``.
    """

    n: int
    c: int = 8
    model: str = "unit"
    max_steps: int = 2 ** 34
    block: int = 64

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("n must be at least 2")
        if self.c < 2:
            raise ValueError("width multiplier c must be at least 2")
        if self.model not in ("unit", "depth"):
            raise ValueError(f"unknown cost model {self.model!r}")
        if self.block < 1:
            raise ValueError("block size must be positive")
        if self.max_steps < 0:
            raise ValueError("max_steps must be nonnegative")

    @property
    def w(self) -> int:
        return max(1, ceil_log2(self.n))

    @property
    def W(self) -> int:
        return self.c * self.w

    @property
    def lam(self) -> int:
        """Depth of word arithmetic, ``max(1, ceil(log2 w))``."""
        return max(1, ceil_log2(self.w))

    def replace(self, **changes) -> "MachineConfig":
        fields = dict(n=self.n, c=self.c, model=self.model,
                      max_steps=self.max_steps, block=self.block)
        fields.update(changes)
        return MachineConfig(**fields)


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    violations: tuple = ()

    def __bool__(self):
        return self.ok


def _position_operands(ins: Instruction):
    if isinstance(ins, CyclicShift):
        return (ins.amount, ins.length)
    if isinstance(ins, Input):
        return (ins.start, ins.stop)
    if isinstance(ins, Output):
        return (ins.length,)
    return ()


def validate_program(p: Program, cfg: MachineConfig) -> ValidationReport:
    """Static checks: jump targets in range, constant positions/lengths bounded.

    The static bound on position and length constants is ``16 * W``; exact
    bounds are re-checked when the instruction executes.
    """
    bound = 16 * cfg.W
    violations = []
    for i, ins in enumerate(p.instructions):
        if isinstance(ins, JumpEq) and not 0 <= ins.target < len(p.instructions):
            violations.append(f"{i}: target out of range ({ins.target})")
        for op in _position_operands(ins):
            if isinstance(op, Const) and op.value > bound:
                violations.append(f"{i}: argument bound exceeded ({op.value} > {bound})")
    return ValidationReport(not violations, tuple(violations))
