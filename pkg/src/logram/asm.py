"""Text assembly for log-RAM programs (``.lram`` files).

Syntax, one statement per line, ``;`` starts a comment::

    .name  add_64
    .tape  2n
    loop:
        in   R1, R2, R3
        add  R4, R4, #1
        jeq  R4, #8, done
        jeq  #0, #0, loop
    done:
        halt

Operands are ``#k`` (constant, decimal or ``0x`` hex), ``Rj`` (register) and
``@Rj`` (the register whose index is held in ``Rj``).
"""

from __future__ import annotations

import re
from typing import Dict, List, Optional, Tuple

from .isa import (
    BINOPS, BinOp, Const, CyclicShift, Direct, Halt, Indirect, Input, JumpEq, Not,
    Output, Program, VCopy,
)

__all__ = ["AsmError", "assemble", "disassemble", "format_instruction", "parse_operand"]


class AsmError(ValueError):
    def __init__(self, line: int, msg: str):
        super().__init__(f"line {line}: {msg}")
        self.line = line


_LABEL_RE = re.compile(r"^([A-Za-z_.$][\w.$]*)\s*:(.*)$")
_NAME_RE = re.compile(r"^[A-Za-z_.$][\w.$]*$")
_REG_RE = re.compile(r"^[Rr](\d+)$")

_ARITY = {op: 3 for op in BINOPS}
_ARITY.update({"not": 2, "rotl": 4, "rotr": 4, "in": 3, "out": 2, "jeq": 3,
               "vcopy": 3, "halt": 0})


def _parse_int(text: str) -> int:
    t = text.strip().lower().replace("_", "")
    if t.startswith("0x"):
        return int(t[2:], 16)
    if not t.isdigit():
        raise ValueError(text)
    return int(t)


def parse_operand(text: str):
    t = text.strip()
    if t.startswith("#"):
        return Const(_parse_int(t[1:]))
    if t.startswith("@"):
        m = _REG_RE.match(t[1:].strip())
        if not m:
            raise ValueError(f"bad indirect operand {text!r}")
        return Indirect(int(m.group(1)))
    m = _REG_RE.match(t)
    if not m:
        raise ValueError(f"bad operand {text!r}")
    return Direct(int(m.group(1)))


def _register(text: str) -> int:
    m = _REG_RE.match(text.strip())
    if not m:
        raise ValueError(f"expected a register, got {text.strip()!r}")
    return int(m.group(1))


def _split_statement(body: str) -> Tuple[str, List[str]]:
    parts = body.split(None, 1)
    mnemonic = parts[0].lower()
    args = [a.strip() for a in parts[1].split(",")] if len(parts) > 1 else []
    if args and any(not a for a in args):
        raise ValueError("empty operand")
    return mnemonic, args


def assemble(src: str, name: Optional[str] = None) -> Program:
    """Parse assembly text into a label-resolved :class:`Program`."""
    statements = []  # (line number, mnemonic, args)
    labels: Dict[str, int] = {}
    prog_name = ""
    tape = None
    for lineno, raw in enumerate(src.splitlines(), start=1):
        body = raw.split(";", 1)[0].strip()
        while body:
            m = _LABEL_RE.match(body)
            if not m or body.startswith("."):
                break
            label = m.group(1)
            if label in labels:
                raise AsmError(lineno, f"duplicate label {label!r}")
            labels[label] = len(statements)
            body = m.group(2).strip()
        if not body:
            continue
        if body.startswith("."):
            parts = body.split(None, 1)
            directive = parts[0].lower()
            arg = parts[1].strip() if len(parts) > 1 else ""
            if directive == ".name":
                prog_name = arg
            elif directive == ".tape":
                if not arg:
                    raise AsmError(lineno, ".tape needs an expression")
                tape = arg.replace(" ", "")
            elif directive == ".entry":
                pass
            else:
                raise AsmError(lineno, f"unknown directive {directive}")
            continue
        try:
            mnemonic, args = _split_statement(body)
        except ValueError as e:
            raise AsmError(lineno, str(e)) from None
        if mnemonic not in _ARITY:
            raise AsmError(lineno, f"unknown mnemonic {mnemonic!r}")
        if len(args) != _ARITY[mnemonic]:
            raise AsmError(lineno, f"{mnemonic} takes {_ARITY[mnemonic]} operands, got {len(args)}")
        statements.append((lineno, mnemonic, args))

    instructions = []
    for lineno, mnemonic, args in statements:
        try:
            instructions.append(_build(mnemonic, args, labels, lineno))
        except AsmError:
            raise
        except ValueError as e:
            raise AsmError(lineno, str(e)) from None
    return Program(tuple(instructions), labels, name if name is not None else prog_name, tape)


def _build(mnemonic: str, args: List[str], labels: Dict[str, int], lineno: int):
    if mnemonic in BINOPS:
        return BinOp(mnemonic, _register(args[0]), parse_operand(args[1]), parse_operand(args[2]))
    if mnemonic == "not":
        return Not(_register(args[0]), parse_operand(args[1]))
    if mnemonic in ("rotl", "rotr"):
        return CyclicShift(_register(args[0]), _register(args[1]),
                           "left" if mnemonic == "rotl" else "right",
                           parse_operand(args[2]), parse_operand(args[3]))
    if mnemonic == "in":
        return Input(_register(args[0]), parse_operand(args[1]), parse_operand(args[2]))
    if mnemonic == "out":
        return Output(_register(args[0]), parse_operand(args[1]))
    if mnemonic == "jeq":
        label = args[2]
        if not _NAME_RE.match(label):
            raise AsmError(lineno, f"bad label {label!r}")
        if label not in labels:
            raise AsmError(lineno, f"undefined label {label!r}")
        return JumpEq(parse_operand(args[0]), parse_operand(args[1]), labels[label])
    if mnemonic == "vcopy":
        return VCopy(parse_operand(args[0]), parse_operand(args[1]), parse_operand(args[2]))
    return Halt()


def _fmt(op) -> str:
    if isinstance(op, Const):
        return f"#{op.value}"
    if isinstance(op, Direct):
        return f"R{op.index}"
    return f"@R{op.index}"


def format_instruction(ins, target_names: Optional[Dict[int, str]] = None) -> str:
    """Canonical text of one instruction (jump targets by label or ``@index``)."""
    if isinstance(ins, BinOp):
        return f"{ins.op} R{ins.dst}, {_fmt(ins.a)}, {_fmt(ins.a2)}"
    if isinstance(ins, Not):
        return f"not R{ins.dst}, {_fmt(ins.a)}"
    if isinstance(ins, CyclicShift):
        m = "rotl" if ins.direction == "left" else "rotr"
        return f"{m} R{ins.dst}, R{ins.src}, {_fmt(ins.amount)}, {_fmt(ins.length)}"
    if isinstance(ins, Input):
        return f"in R{ins.dst}, {_fmt(ins.start)}, {_fmt(ins.stop)}"
    if isinstance(ins, Output):
        return f"out R{ins.src}, {_fmt(ins.length)}"
    if isinstance(ins, JumpEq):
        target = target_names[ins.target] if target_names else f"{ins.target}"
        return f"jeq {_fmt(ins.a)}, {_fmt(ins.a2)}, {target}"
    if isinstance(ins, VCopy):
        return f"vcopy {_fmt(ins.src)}, {_fmt(ins.dst)}, {_fmt(ins.count)}"
    if isinstance(ins, Halt):
        return "halt"
    raise TypeError(f"not an instruction: {ins!r}")


def disassemble(p: Program) -> str:
    """Canonical source text; ``assemble(disassemble(p)) == p``."""
    at: Dict[int, List[str]] = {}
    for label, idx in p.labels.items():
        at.setdefault(idx, []).append(label)
    taken = set(p.labels)
    for ins in p.instructions:
        if isinstance(ins, JumpEq) and ins.target not in at:
            name = f"L{ins.target}"
            while name in taken:
                name = "_" + name
            taken.add(name)
            at[ins.target] = [name]
    names = {idx: sorted(ls)[0] for idx, ls in at.items()}
    lines = []
    if p.name:
        lines.append(f".name {p.name}")
    if p.tape is not None:
        lines.append(f".tape {p.tape}")
    for i, ins in enumerate(p.instructions):
        for label in sorted(at.get(i, ())):
            lines.append(f"{label}:")
        lines.append("    " + format_instruction(ins, names))
    for idx in sorted(k for k in at if k >= len(p.instructions)):
        for label in sorted(at[idx]):
            lines.append(f"{label}:")
    return "\n".join(lines) + "\n"
