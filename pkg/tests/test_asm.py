import random

import pytest
from hypothesis import given, settings, strategies as st

from logram.asm import AsmError, assemble, disassemble, format_instruction, parse_operand
from logram.isa import (
    BinOp, Const, CyclicShift, Direct, Halt, Indirect, Input, JumpEq, MachineConfig, Not,
    Output, Program, VCopy,
)
from logram.mulgen import ALGORITHMS, MIN_SIZE, generate

from _progfuzz import random_program


def test_binop_line():
    assert assemble("add R2, R1, #1").instructions == (
        BinOp("add", 2, Direct(1), Const(1)),)


def test_halt():
    assert assemble("halt").instructions == (Halt(),)


def test_every_mnemonic():
    src = """
        or R1, R2, #3
        and R1, @R2, R3
        xor R1, #0x10, #2
        sub R1, R1, #1
        mul R3, @R2, #5
        div R3, R3, #7
        not R4, @R1
        rotl R5, R4, #3, #16
        rotr R5, R4, R6, R7
        in R1, #0, #63
        out R1, #64
        vcopy #100, R2, #64
    top:
        jeq R1, R2, top
        halt
    """
    p = assemble(src)
    assert p.instructions == (
        BinOp("or", 1, Direct(2), Const(3)),
        BinOp("and", 1, Indirect(2), Direct(3)),
        BinOp("xor", 1, Const(16), Const(2)),
        BinOp("sub", 1, Direct(1), Const(1)),
        BinOp("mul", 3, Indirect(2), Const(5)),
        BinOp("div", 3, Direct(3), Const(7)),
        Not(4, Indirect(1)),
        CyclicShift(5, 4, "left", Const(3), Const(16)),
        CyclicShift(5, 4, "right", Direct(6), Direct(7)),
        Input(1, Const(0), Const(63)),
        Output(1, Const(64)),
        VCopy(Const(100), Direct(2), Const(64)),
        JumpEq(Direct(1), Direct(2), 12),
        Halt(),
    )


def test_canonical_text():
    assert format_instruction(BinOp("mul", 3, Indirect(2), Const(5))) == "mul R3, @R2, #5"
    assert format_instruction(Halt()) == "halt"
    assert disassemble(Program((Halt(),))) == "    halt\n"


def test_directives_labels_and_comments():
    src = ".name demo  ; trailing comment\n.tape 2n\n.entry\nstart: end: add R1, R1, #1\n" \
          "  jeq R1, #3, end\n  JEQ #0, #0, start\n"
    p = assemble(src)
    assert p.name == "demo" and p.tape == "2n"
    assert p.labels == {"start": 0, "end": 0}
    assert p.instructions[2] == JumpEq(Const(0), Const(0), 0)


def test_label_at_end_of_program():
    p = assemble("jeq #0, #0, out\nhalt\nout:\n")
    assert p.instructions[0].target == 2
    assert assemble(disassemble(p)) == p


def test_whitespace_and_case_tolerant():
    assert assemble("  ADD   r2 ,R1,  # 1 ") == assemble("add R2, R1, #1")


def test_canonical_output_is_unique():
    a = assemble("x: ADD r1,r1,#0x0A\n jeq R1,#10,x")
    b = assemble("y:\n  add R1, R1, #10\n  jeq R1, #10, y")
    assert a == b
    assert disassemble(assemble(disassemble(a))) == disassemble(a)


@pytest.mark.parametrize("src,needle", [
    ("jeq R0, R0, loop", "undefined label"),
    ("a:\na:\nhalt", "duplicate label"),
    ("add #1, R1, R2", "expected a register"),
    ("add R1, R2", "takes 3 operands"),
    ("frob R1", "unknown mnemonic"),
    (".org 5", "unknown directive"),
    ("add R1, R2, #x", "line 1"),
    ("add R1, , R2", "empty operand"),
    ("add R1, R2, #-4", "line 1"),
    ("halt\nout R1, %3", "line 2"),
])
def test_errors(src, needle):
    with pytest.raises(AsmError) as exc:
        assemble(src)
    assert needle in str(exc.value)


def test_error_reports_line_number():
    with pytest.raises(AsmError) as exc:
        assemble("halt\n\n  bogus R1\n")
    assert exc.value.line == 3


def test_parse_operand():
    assert parse_operand("#0x1f") == Const(31)
    assert parse_operand("@R12") == Indirect(12)
    assert parse_operand("R0") == Direct(0)
    with pytest.raises(ValueError):
        parse_operand("Q3")


@settings(max_examples=300, deadline=None)
@given(st.integers(0, 2 ** 32))
def test_roundtrip_random_programs(seed):
    rng = random.Random(seed)
    p = random_program(rng, length=rng.randint(0, 60), regs=rng.choice([4, 16, 300]), big=True)
    p = Program(p.instructions, name=rng.choice(["", "fuzz"]), tape=rng.choice([None, "2n", "n+1"]))
    text = disassemble(p)
    assert assemble(text) == p
    assert disassemble(assemble(text)) == text


@pytest.mark.parametrize("alg", ALGORITHMS)
def test_roundtrip_generated_corpus(alg):
    n = MIN_SIZE[alg]
    src = generate(alg, n, MachineConfig(n=n)).source()
    p = assemble(src)
    assert assemble(disassemble(p)) == p
