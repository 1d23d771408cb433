"""Cost accountants: unit (word) cost and Depth-Cost."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Dict, Iterable, Optional, Sequence

from .isa import (
    INSTRUCTION_CLASSES, BinOp, CyclicShift, Halt, Instruction, MachineConfig, VCopy,
    bit_length, ceil_log2, instruction_class,
)

__all__ = [
    "CostParams", "CostLedger", "LedgerError",
    "unit_cost", "depth_cost", "access_cost", "position_bits", "ledger_report",
    "LEDGER_COLUMNS",
]

LEDGER_COLUMNS = INSTRUCTION_CLASSES + ("access_cost", "total_cost", "instruction_count")


class LedgerError(RuntimeError):
    """Ledger total disagrees with its components: an accounting bug."""


@dataclass(frozen=True)
class CostParams:
    w: int
    lam: int
    model: str = "unit"
    W: Optional[int] = None

    def __post_init__(self):
        if self.w < 1 or self.lam < 1:
            raise ValueError("w and lam must be positive")
        if self.model not in ("unit", "depth"):
            raise ValueError(f"unknown cost model {self.model!r}")

    @classmethod
    def for_config(cls, cfg: MachineConfig) -> "CostParams":
        return cls(w=cfg.w, lam=cfg.lam, model=cfg.model, W=cfg.W)


def position_bits(v: int) -> int:
    """Length of a position/length argument: ``ceil(log2 v)``, so ``2**bits >= v``."""
    return ceil_log2(v)


def unit_cost(ins: Instruction, max_operand_bits: int, pos_bits: int,
              params: CostParams, count: int = 0) -> int:
    """Unit-model charge.

    With ``k = ceil(max(l', 2**l'') / w)`` (at least 1): multiply and divide
    cost ``k**2``, jumps 1, vector copies ``count``, everything else ``k``.
    ``2**l''`` is capped at ``W`` when the register width is known.
    """
    if isinstance(ins, Halt):
        return 0
    if isinstance(ins, VCopy):
        return count
    if instruction_class(ins) == "jump":
        return 1
    span = 1 << pos_bits if pos_bits else 0
    if params.W is not None and span > params.W:
        span = params.W
    ell = max(max_operand_bits, span)
    k = max(1, -(-ell // params.w))
    if isinstance(ins, BinOp) and ins.op in ("mul", "div"):
        return k * k
    return k


def access_cost(index: int) -> int:
    """Depth-model price of touching register ``index``: ``max(1, floor(log2 index))``."""
    return max(1, index.bit_length() - 1)


def depth_cost(ins: Instruction, touched: Sequence[int], vcopy_args=None,
               params: CostParams = None) -> int:
    """Depth-model charge: operation depth plus register access.

    Boolean ops cost 1, every other class ``lam``; each distinct touched
    register adds ``access_cost``.  A vector copy ``(A, A', A'')`` costs
    ``max(bit_length(A), bit_length(A'), A'')`` and nothing else.
    """
    if isinstance(ins, Halt):
        return 0
    if isinstance(ins, VCopy):
        a, a1, a2 = vcopy_args
        return max(bit_length(a), bit_length(a1), a2)
    op = 1 if instruction_class(ins) == "boolean" else params.lam
    return op + sum(access_cost(i) for i in set(touched))


@dataclass
class CostLedger:
    per_class: Dict[str, int] = field(
        default_factory=lambda: {c: 0 for c in INSTRUCTION_CLASSES})
    access: int = 0
    total: int = 0
    instructions: int = 0

    def charge(self, klass: Optional[str], op_cost: int, access: int = 0):
        self.instructions += 1
        if klass is None:
            return
        self.per_class[klass] += op_cost
        self.access += access
        self.total += op_cost + access

    def check(self):
        expected = self.access + sum(self.per_class.values())
        if expected != self.total:
            raise LedgerError(f"ledger total {self.total} != components {expected}")

    def as_dict(self) -> Dict[str, int]:
        self.check()
        d = dict(self.per_class)
        d["access_cost"] = self.access
        d["total_cost"] = self.total
        d["instruction_count"] = self.instructions
        return d

    def copy(self) -> "CostLedger":
        return CostLedger(dict(self.per_class), self.access, self.total, self.instructions)


def ledger_report(ledger: CostLedger, fmt: str = "text") -> str:
    """Render a ledger as ``key=value`` lines (``text``) or a CSV header+row (``csv``)."""
    d = ledger.as_dict()
    if fmt == "text":
        return "".join(f"{k}={d[k]}\n" for k in LEDGER_COLUMNS)
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(LEDGER_COLUMNS)
        writer.writerow([d[k] for k in LEDGER_COLUMNS])
        return buf.getvalue()
    raise ValueError(f"unknown format {fmt!r}")


def replay(records: Iterable[tuple], params: CostParams) -> CostLedger:
    """Rebuild a ledger from trace records ``(ins, l', l'', touched, vcopy_args)``."""
    ledger = CostLedger()
    for ins, lp, lpp, touched, vargs in records:
        klass = instruction_class(ins)
        if params.model == "unit":
            count = vargs[2] if vargs else 0
            ledger.charge(klass, unit_cost(ins, lp, lpp, params, count))
        elif isinstance(ins, (VCopy, Halt)):
            ledger.charge(klass, depth_cost(ins, (), vargs, params))
        else:
            op = 1 if klass == "boolean" else params.lam
            ledger.charge(klass, op, sum(access_cost(i) for i in set(touched)))
    return ledger
