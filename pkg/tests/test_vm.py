import random

import pytest
from hypothesis import given, settings, strategies as st

from logram.asm import assemble
from logram.cost import CostParams, replay
from logram.isa import (
    BinOp, Const, CyclicShift, Direct, Halt, Indirect, Input, MachineConfig, Output, Program,
    VCopy,
)
from logram.vm import (
    LoadError, TrapKind, format_trace, load, read_output, run, step, tape_length,
)

from _progfuzz import random_program
from _traps import TRAP_CASES, TRAP_DIR, TRAP_MACHINE

GOLDEN = Program((
    Input(1, Const(0), Const(7)),
    BinOp("add", 2, Direct(1), Const(1)),
    Output(2, Const(8)),
    Halt(),
))


def test_golden_unit():
    res = run(load(GOLDEN, "00000101", MachineConfig(n=256, c=2)))
    assert res.reason == "halted"
    assert res.output == "00000110"
    d = res.ledger.as_dict()
    assert d["total_cost"] == 3
    assert (d["io"], d["addsub"], d["access_cost"], d["instruction_count"]) == (2, 1, 0, 4)


def test_golden_depth():
    cfg = MachineConfig(n=256, c=2, model="depth")
    assert (cfg.w, cfg.lam) == (8, 3)
    res = run(load(GOLDEN, "00000101", cfg), trace=True)
    assert [e.cost for e in res.trace] == [4, 5, 4, 0]
    assert res.ledger.total == 13
    assert res.ledger.access == 4


def test_empty_program_halts_immediately():
    res = run(load(Program(()), "", MachineConfig(n=64)))
    assert res.reason == "halted" and res.output == "" and res.ledger.total == 0


def test_read_output_concatenates():
    p = assemble("add R1, #10, #0\nadd R2, #11, #0\nout R1, #4\nout R2, #4\n")
    s = load(p, "", MachineConfig(n=64))
    assert read_output(s) == ""
    assert run(s).output == "10101011"


def test_r0_holds_n():
    p = assemble("out R0, #12\n")
    assert run(load(p, "", MachineConfig(n=1000))).output == format(1000, "012b")


@pytest.mark.parametrize("stem", sorted(TRAP_CASES))
@pytest.mark.parametrize("fast", [False, True])
def test_trap_fixtures(stem, fast):
    kind, pc, _ = TRAP_CASES[stem]
    p = assemble((TRAP_DIR / f"{stem}.lram").read_text())
    cfg = MachineConfig(**TRAP_MACHINE)
    res = run(load(p, "0" * tape_length(p.tape, cfg.n), cfg), fast=fast)
    assert res.reason == kind
    assert res.trap.kind == TrapKind(kind)
    assert res.trap.pc == pc
    assert res.state.pc == pc


def test_width_trap_threshold_is_exact():
    cfg = MachineConfig(n=256, c=2)
    ok = assemble("add R1, #65534, #1\n")
    assert run(load(ok, "", cfg)).state.reg(1) == 65535
    bad = assemble("add R1, #65535, #1\n")
    assert run(load(bad, "", cfg)).reason == "WidthOverflow"


def test_not_complements_low_w_bits():
    cfg = MachineConfig(n=256, c=2)
    res = run(load(assemble("not R1, #5\n"), "", cfg))
    assert res.state.reg(1) == 5 ^ 0xFFFF


def test_rotation_keeps_high_bits():
    p = assemble("add R1, #0x1F0F, #0\nrotl R2, R1, #4, #8\nrotr R3, R1, #12, #8\n")
    res = run(load(p, "", MachineConfig(n=256, c=2)))
    assert res.state.reg(2) == 0x1FF0
    assert res.state.reg(3) == 0x1FF0


def test_indirect_operands():
    p = assemble("add R5, #9, #0\nadd R9, #77, #0\nadd R1, @R5, #1\n")
    assert run(load(p, "", MachineConfig(n=256))).state.reg(1) == 78


def test_vcopy_overlap_matches_snapshot_copy():
    setup = [BinOp("add", i, Const(10 * i), Const(0)) for i in range(1, 10)]
    p = Program(tuple(setup) + (VCopy(Const(5), Const(6), Const(3)),))
    res = run(load(p, "", MachineConfig(n=256)))
    regs = [10 * i for i in range(10)]
    snap = regs[5:8]
    regs[6:9] = snap
    assert [res.state.reg(i) for i in range(1, 10)] == regs[1:10]


def test_tape_length_expressions():
    assert tape_length("2n", 64) == 128
    assert tape_length("n+1", 64) == 65
    assert tape_length("0", 64) == 0
    assert tape_length("3*n-2", 10) == 28
    with pytest.raises(LoadError):
        tape_length("n^2", 4)


def test_load_rejects_bad_tapes():
    p = assemble(".tape 2n\nhalt\n")
    with pytest.raises(LoadError):
        load(p, "0" * 10, MachineConfig(n=64))
    with pytest.raises(LoadError):
        load(Program(()), "0120", MachineConfig(n=64))


def test_step_refuses_halted_machine():
    s = run(load(Program((Halt(),)), "", MachineConfig(n=64))).state
    with pytest.raises(RuntimeError):
        step(s)


def _fuzz_case(seed, model="unit", big=False):
    rng = random.Random(seed)
    tape = format(rng.getrandbits(64), "064b")
    prog = random_program(rng, length=rng.randint(1, 40), big=big)
    cfg = MachineConfig(n=256, c=rng.choice([3, 4, 8]), model=model, max_steps=400)
    return prog, tape, cfg


def _snapshot(res):
    s = res.state
    return (s.status, s.pc, s.trap, dict(s.registers), bytes(s.output), res.ledger.as_dict())


@settings(max_examples=300, deadline=None)
@given(st.integers(0, 2 ** 32), st.sampled_from(["unit", "depth"]), st.booleans())
def test_fast_engine_matches_reference(seed, model, big):
    prog, tape, cfg = _fuzz_case(seed, model, big)
    slow = run(load(prog, tape, cfg), fast=False)
    fast = run(load(prog, tape, cfg), fast=True)
    assert _snapshot(slow) == _snapshot(fast)


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2 ** 32), st.sampled_from(["unit", "depth"]))
def test_trace_replay_and_trace_flag(seed, model):
    prog, tape, cfg = _fuzz_case(seed, model, big=True)
    traced = run(load(prog, tape, cfg), trace=True)
    plain = run(load(prog, tape, cfg), fast=False)
    assert _snapshot(traced) == _snapshot(plain)
    records = [(e.ins, e.operand_bits, e.position_bits, e.touched, e.vcopy_args)
               for e in traced.trace]
    again = replay(records, CostParams.for_config(cfg))
    assert again.as_dict() == traced.ledger.as_dict()
    assert sum(e.cost for e in traced.trace) == traced.ledger.total


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2 ** 32))
def test_registers_never_exceed_width(seed):
    prog, tape, cfg = _fuzz_case(seed, big=True)
    s = load(prog, tape, cfg)
    limit = 1 << cfg.W
    while s.status == "running":
        step(s)
        assert all(0 <= v < limit for v in s.registers.values())


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2 ** 32))
def test_runs_are_deterministic(seed):
    prog, tape, cfg = _fuzz_case(seed, "depth", big=True)
    a = run(load(prog, tape, cfg), trace=True)
    b = run(load(prog, tape, cfg), trace=True)
    assert _snapshot(a) == _snapshot(b)
    assert format_trace(a.trace) == format_trace(b.trace)


def test_trace_format():
    res = run(load(GOLDEN, "00000101", MachineConfig(n=256, c=2)), trace=True)
    assert format_trace(res.trace) == (
        "0\tin R1, #0, #7\t0,7\t1\n"
        "1\tadd R2, R1, #1\t5,1\t1\n"
        "2\tout R2, #8\t6,8\t1\n"
        "3\thalt\t\t0\n")
