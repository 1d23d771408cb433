import math
import random

import pytest

from logram.isa import MachineConfig, ceil_log2
from logram.mulgen import GenError
from logram.mulgen.ssf import gen_ssf, level_for, sqrt_piece, ssf_plan

from _mul import edge_pairs, program, run_pair, value

# n exponent -> levels (op_bits, b, K, t, m)
FROZEN = {
    12: [(4096, 64, 64, 7, 192)],
    13: [(8192, 128, 64, 7, 320), (320, 64, 5, 4, 192)],
    14: [(16384, 128, 128, 8, 384), (384, 64, 6, 4, 192)],
    15: [(32768, 192, 171, 9, 512), (512, 64, 8, 4, 192)],
    16: [(65536, 256, 256, 9, 768), (768, 64, 12, 5, 192)],
    17: [(131072, 384, 342, 10, 1024), (1024, 64, 16, 5, 192)],
    18: [(262144, 512, 512, 10, 1536), (1536, 64, 24, 6, 192)],
    19: [(524288, 768, 683, 11, 2048), (2048, 64, 32, 6, 192)],
    20: [(1048576, 1024, 1024, 11, 3072), (3072, 64, 48, 7, 192)],
}


def _levels(plan):
    return [(lv.op_bits, lv.b, lv.K, lv.t, lv.m) for lv in plan.chain()]


def _check_ring(lv):
    assert lv.L >= 2 * lv.K - 1
    assert lv.K * lv.b >= lv.op_bits
    # cyclic product coefficients stay below the modulus
    assert lv.m >= 2 * lv.b + ceil_log2(lv.K)
    # 2 has order 2m, so an L-th root of unity is a power of two
    assert (2 * lv.m) % lv.L == 0
    assert lv.m % 64 == 0 and lv.b % 64 == 0


@pytest.mark.parametrize("e", sorted(FROZEN))
def test_default_plans(e):
    n = 1 << e
    plan = ssf_plan(n, MachineConfig(n=n))
    assert _levels(plan) == FROZEN[e]
    for lv in plan.chain():
        _check_ring(lv)
    for parent, child in zip(plan.chain(), plan.chain()[1:]):
        assert child.op_bits == parent.m


def test_depth_at_2_20_from_metadata():
    meta = gen_ssf(1 << 20, MachineConfig(n=1 << 20)).meta
    assert meta["depth"] == 2
    assert (meta["level0_b"], meta["level1_b"], meta["level1_m"]) == (1024, 64, 192)


def test_sqrt_piece():
    assert [sqrt_piece(1 << e) for e in (12, 16, 20)] == [64, 256, 1024]
    assert sqrt_piece(3072) == 64


def test_level_for():
    lv = level_for(1000, 128)
    assert (lv.K, lv.t) == (8, 4)
    _check_ring(lv)
    with pytest.raises(GenError):
        level_for(4096, 100)
    with pytest.raises(GenError):
        level_for(64, 64)


def test_other_strategies():
    cfg = MachineConfig(n=1 << 14)
    cheap = ssf_plan(1 << 14, cfg, strategy="cheapest")
    assert _levels(cheap) == [(16384, 64, 256, 9, 256)]
    fixed = ssf_plan(1 << 14, cfg, b=256)
    assert _levels(fixed) == [(16384, 256, 64, 7, 576), (576, 64, 9, 5, 192)]
    with pytest.raises(GenError):
        ssf_plan(1 << 14, cfg, strategy="fastest")


def test_one_times_one():
    assert value("ssf", 4096, 1, 1) == 1


@pytest.mark.parametrize("n", [4096, 8192, 16384])
def test_random_pairs(n):
    rng = random.Random(n)
    for _ in range(20):
        run_pair("ssf", n, rng.getrandbits(n), rng.getrandbits(n))


@pytest.mark.parametrize("n", [4096, 8192])
def test_edge_operands(n):
    for a, b in edge_pairs(n):
        run_pair("ssf", n, a, b)


def test_alternative_plans_multiply_correctly():
    from logram.bench import execute
    n = 1 << 14
    cfg = MachineConfig(n=n)
    rng = random.Random("plans")
    a, b = rng.getrandbits(n), rng.getrandbits(n)
    for plan in (ssf_plan(n, cfg, strategy="cheapest"), ssf_plan(n, cfg, b=256)):
        prog = gen_ssf(n, cfg, plan).program()
        assert int(execute(prog, "ssf", n, a, b, cfg).output, 2) == a * b


def test_model_agnostic():
    rng = random.Random("ssf-models")
    a, b = rng.getrandbits(8192), rng.getrandbits(8192)
    unit = run_pair("ssf", 8192, a, b)
    depth = run_pair("ssf", 8192, a, b, model="depth")
    assert unit.output == depth.output
    assert unit.ledger.instructions == depth.ledger.instructions


def test_footprint():
    for e in (12, 14):
        n = 1 << e
        prog, _ = program("ssf", n)
        assert prog.registers_used() <= 7 * n / MachineConfig(n=n).w + 2000
