"""Build-once helpers for running generated programs in tests."""

import functools
import random

from logram.bench import execute
from logram.isa import MachineConfig
from logram.mulgen import build


@functools.lru_cache(maxsize=None)
def program(alg, n, c=8):
    return build(alg, n, MachineConfig(n=n, c=c))


def run_pair(alg, n, a, b, model="unit", c=8):
    """Execute one pair, checked against the oracle; returns the Outcome."""
    prog, _ = program(alg, n, c)
    return execute(prog, alg, n, a, b, MachineConfig(n=n, c=c, model=model))


def value(alg, n, a, b, **kw):
    return int(run_pair(alg, n, a, b, **kw).output, 2)


def unit_cost(alg, n, seed=1):
    rng = random.Random(f"cost:{alg}:{n}:{seed}")
    return run_pair(alg, n, rng.getrandbits(n), rng.getrandbits(n)).ledger.total


def edge_pairs(n):
    top = (1 << n) - 1
    return [(0, 0), (top, top), (top, 1), (1, top), (1 << (n - 1), 1 << (n - 1)),
            (top, 0), (0x5555 % (1 << n), top)]
