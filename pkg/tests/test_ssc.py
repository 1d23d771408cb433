import dataclasses
import math
import random

import pytest

from logram.bench import PrecisionExceeded, execute
from logram.isa import MachineConfig
from logram.mulgen import GenError
from logram.mulgen.ssc import (
    fft_lengths, fixed_cos_sin, gen_ssc, max_residual, radix_plan, ssc_params,
)
from logram.vm import load, run

from _mul import edge_pairs, program, run_pair, value

# n exponent -> (piece bits, transform length, fraction bits)
FROZEN = {12: (8, 1024, 20), 13: (9, 1920, 21), 14: (10, 3456, 22), 15: (11, 6144, 23),
          16: (11, 12288, 26), 17: (12, 23040, 27), 18: (13, 40960, 28), 19: (13, 81920, 31),
          20: (14, 153600, 32)}


@pytest.mark.parametrize("e", sorted(FROZEN))
def test_parameters(e):
    n = 1 << e
    cfg = MachineConfig(n=n)
    p = ssc_params(n, cfg)
    assert (p.b, p.K, p.f) == FROZEN[e]
    assert p.pieces == -(-n // p.b)
    assert p.K >= 2 * p.pieces - 1
    assert p.f >= cfg.w + 8
    assert math.prod(p.radices) == p.K
    # data registers hold sums of two values, products fit the accumulator
    assert 2 * p.M + 2 <= cfg.W - 1 and p.acc_bits <= cfg.W - 1
    # product coefficients cannot reach the offset
    assert p.pieces * (2 ** p.b - 1) ** 2 < 2 ** (p.M - 1 - p.f)


def test_fft_lengths_and_radices():
    assert fft_lengths(100, 200) == [120, 128, 144, 160, 192, 200]
    assert radix_plan(120) == (2, 2, 2, 3, 5)
    with pytest.raises(GenError):
        radix_plan(7 * 8)


def test_fixed_point_roots():
    assert fixed_cos_sin(0, 8, 20) == (1 << 20, 0)
    assert fixed_cos_sin(1, 4, 20) == (0, 1 << 20)
    c, s = fixed_cos_sin(1, 8, 30)
    assert c == s == round(math.sqrt(0.5) * 2 ** 30)


def test_rejects_bad_overrides():
    cfg = MachineConfig(n=4096)
    with pytest.raises(GenError):
        ssc_params(4096, cfg, K=1000)
    with pytest.raises(GenError):
        ssc_params(4096, cfg, b=12)
    with pytest.raises(GenError):
        gen_ssc(2048, MachineConfig(n=2048))


def test_explicit_piece_size():
    p = ssc_params(4096, MachineConfig(n=4096), b=6)
    assert p.b == 6 and p.K >= 2 * 683 - 1


def test_one_times_one():
    assert value("ssc", 4096, 1, 1) == 1


@pytest.mark.parametrize("n", [4096, 16384])
def test_random_pairs(n):
    rng = random.Random(n)
    _, meta = program("ssc", n)
    for _ in range(20):
        a, b = rng.getrandbits(n), rng.getrandbits(n)
        out = run_pair("ssc", n, a, b)
        assert int(out.output, 2) == a * b


def test_edge_operands():
    for a, b in edge_pairs(4096):
        run_pair("ssc", 4096, a, b)


def test_residual_margin():
    n = 4096
    prog, meta = program("ssc", n)
    cfg = MachineConfig(n=n)
    rng = random.Random("margin")
    worst = 0.0
    for a, b in edge_pairs(n)[:2] + [(rng.getrandbits(n), rng.getrandbits(n)) for _ in range(5)]:
        res = run(load(prog, format(a, f"0{n}b") + format(b, f"0{n}b"), cfg))
        assert int(res.output, 2) == a * b
        worst = max(worst, max_residual(res.state, meta))
    assert 0 < worst < 0.25 / 2


def test_lost_precision_is_reported_not_wrong():
    n = 4096
    cfg = MachineConfig(n=n)
    p = ssc_params(n, cfg)
    starved = gen_ssc(n, cfg, dataclasses.replace(p, f=p.f - 10)).program()
    rng = random.Random(3)
    with pytest.raises(PrecisionExceeded) as exc:
        execute(starved, "ssc", n, rng.getrandbits(n), rng.getrandbits(n), cfg)
    assert exc.value.exit_code == 10


def test_model_agnostic():
    rng = random.Random("ssc-models")
    a, b = rng.getrandbits(4096), rng.getrandbits(4096)
    unit = run_pair("ssc", 4096, a, b)
    depth = run_pair("ssc", 4096, a, b, model="depth")
    assert unit.output == depth.output
    assert unit.ledger.instructions == depth.ledger.instructions


def test_footprint_and_metadata():
    prog, meta = program("ssc", 4096)
    assert meta["precision_sentinel"] == "all-ones"
    assert prog.registers_used() < meta["registers"] <= 30 * 4096 / 12 + 2000
