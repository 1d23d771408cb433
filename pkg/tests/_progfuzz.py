"""Random straight-line/looping programs for differential testing."""

import random

from logram.isa import (
    BINOPS, BinOp, Const, CyclicShift, Direct, Halt, Indirect, Input, JumpEq, Not,
    Output, Program, VCopy,
)


def random_operand(rng, regs=8, big=False):
    r = rng.random()
    if r < 0.35:
        hi = rng.choice([3, 16, 70, 130, 200]) if big else 16
        return Const(rng.getrandbits(rng.randint(1, hi)))
    if r < 0.85:
        return Direct(rng.randrange(regs))
    return Indirect(rng.randrange(regs))


def random_program(rng, length=30, regs=8, tape_len=64, big=False):
    ins = []
    for i in range(length):
        kind = rng.random()
        if kind < 0.45:
            ins.append(BinOp(rng.choice(BINOPS), rng.randrange(1, regs),
                             random_operand(rng, regs, big), random_operand(rng, regs, big)))
        elif kind < 0.5:
            ins.append(Not(rng.randrange(1, regs), random_operand(rng, regs, big)))
        elif kind < 0.6:
            ins.append(CyclicShift(rng.randrange(1, regs), rng.randrange(regs),
                                   rng.choice(["left", "right"]),
                                   Const(rng.randrange(0, 300)), Const(rng.randrange(0, 160))))
        elif kind < 0.7:
            a = rng.randrange(tape_len)
            ins.append(Input(rng.randrange(1, regs), Const(a),
                             Const(min(tape_len, a + rng.randrange(0, 40)))))
        elif kind < 0.78:
            ins.append(Output(rng.randrange(regs), Const(rng.randrange(0, 40))))
        elif kind < 0.88:
            ins.append(JumpEq(random_operand(rng, regs), random_operand(rng, regs),
                              rng.randrange(length)))
        elif kind < 0.97:
            ins.append(VCopy(Const(rng.randrange(regs)), Const(rng.randrange(regs)),
                             Const(rng.randrange(0, 4))))
        else:
            ins.append(Halt())
    return Program(tuple(ins), name="fuzz")
