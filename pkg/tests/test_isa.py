import pytest

from logram.isa import (
    BinOp, Const, CyclicShift, Direct, Halt, Indirect, Input, JumpEq, MachineConfig, Not,
    Output, Program, VCopy, bit_length, ceil_log2, instruction_class, validate_program,
)


@pytest.mark.parametrize("v,expected", [(0, 1), (1, 1), (2, 2), (255, 8), (1024, 11)])
def test_bit_length(v, expected):
    assert bit_length(v) == expected


def test_bit_length_rejects_negative():
    with pytest.raises(ValueError):
        bit_length(-1)


@pytest.mark.parametrize("v,expected", [(0, 0), (1, 0), (2, 1), (3, 2), (4, 2), (5, 3), (4096, 12)])
def test_ceil_log2(v, expected):
    assert ceil_log2(v) == expected


def test_operands_reject_negative():
    for cls in (Const, Direct, Indirect):
        with pytest.raises(ValueError):
            cls(-1)


def test_bad_opcode_and_direction():
    with pytest.raises(ValueError):
        BinOp("nand", 1, Const(0), Const(0))
    with pytest.raises(ValueError):
        CyclicShift(1, 2, "up", Const(1), Const(8))


def test_instruction_classes():
    cases = [
        (BinOp("xor", 1, Direct(1), Const(3)), "boolean"),
        (Not(1, Direct(2)), "boolean"),
        (BinOp("sub", 1, Direct(1), Const(3)), "addsub"),
        (BinOp("div", 1, Direct(1), Const(3)), "muldiv"),
        (CyclicShift(1, 2, "left", Const(1), Const(8)), "shift"),
        (Input(1, Const(0), Const(7)), "io"),
        (Output(1, Const(8)), "io"),
        (JumpEq(Const(0), Const(0), 0), "jump"),
        (VCopy(Const(0), Const(8), Const(4)), "vcopy"),
        (Halt(), None),
    ]
    for ins, klass in cases:
        assert instruction_class(ins) == klass


def test_machine_config_derived_widths():
    cfg = MachineConfig(n=256, c=2)
    assert (cfg.w, cfg.W, cfg.lam) == (8, 16, 3)
    big = MachineConfig(n=1 << 20)
    assert (big.w, big.W, big.lam) == (20, 160, 5)
    assert MachineConfig(n=4096).lam == 4
    assert MachineConfig(n=2).lam == 1


@pytest.mark.parametrize("kwargs", [dict(n=1), dict(n=64, c=1), dict(n=64, model="bogus"),
                                    dict(n=64, block=0), dict(n=64, max_steps=-1)])
def test_machine_config_rejects(kwargs):
    with pytest.raises(ValueError):
        MachineConfig(**kwargs)


def test_config_replace_keeps_other_fields():
    cfg = MachineConfig(n=256, c=3, block=16).replace(model="depth")
    assert (cfg.n, cfg.c, cfg.block, cfg.model) == (256, 3, 16, "depth")


def test_validate_empty_program():
    assert validate_program(Program(()), MachineConfig(n=256)).ok


def test_validate_jump_target_out_of_range():
    p = Program((Halt(), JumpEq(Const(0), Const(0), 3)))
    report = validate_program(p, MachineConfig(n=256))
    assert not report.ok
    assert "target out of range" in report.violations[0]


def test_validate_argument_bound():
    cfg = MachineConfig(n=256, c=8)
    p = Program((Input(1, Const(0), Const(1 << cfg.W)),))
    report = validate_program(p, cfg)
    assert not report
    assert "argument bound exceeded" in report.violations[0]


def test_validate_is_pure():
    p = Program((Output(1, Const(10 ** 6)), JumpEq(Const(0), Const(0), 9)))
    cfg = MachineConfig(n=256)
    assert validate_program(p, cfg) == validate_program(p, cfg)


def test_program_equality_ignores_labels():
    a = Program((Halt(),), labels={"x": 0})
    b = Program([Halt()])
    assert a == b and len(a) == 1


def test_registers_used_counts_static_indices():
    p = Program((BinOp("add", 3, Indirect(9), Const(100)),
                 VCopy(Const(500), Direct(4), Const(2)), Output(2, Direct(7))))
    assert p.registers_used() == 9
