"""Assembly emission helpers shared by the program generators.

Programs are produced as ``.lram`` text and then assembled, so everything a
generator emits can be inspected, cached and re-run from disk.
"""

from __future__ import annotations

from typing import Callable, Dict, List, Optional

from ..asm import assemble
from ..isa import Program


def R(i: int) -> str:
    return f"R{i}"


def C(v: int) -> str:
    return f"#{v}"


def I(i: int) -> str:  # noqa: E743 - mirrors the assembly syntax
    return f"@R{i}"


class GenError(ValueError):
    """Generation-time configuration error."""


class Emitter:
    """Collects assembly lines, hands out labels and registers."""

    def __init__(self, name: str, tape: str = "2n", first_register: int = 1):
        self.header = [f".name {name}", f".tape {tape}"]
        self.lines: List[str] = []
        self._labels = 0
        self.next_register = first_register
        self.meta: Dict[str, object] = {}

    # -- registers -------------------------------------------------------
    def alloc(self, count: int = 1) -> int:
        """Reserve ``count`` consecutive registers, returning the first index."""
        if count < 0:
            raise ValueError("negative register count")
        base = self.next_register
        self.next_register += count
        return base

    def scalars(self, *names: str) -> Dict[str, int]:
        return {nm: self.alloc() for nm in names}

    # -- code ------------------------------------------------------------
    def fresh(self, stem: str) -> str:
        self._labels += 1
        return f"{stem}_{self._labels}"

    def label(self, name: str):
        self.lines.append(f"{name}:")

    def __call__(self, mnemonic: str, *args: object):
        self.lines.append(f"    {mnemonic} " + ", ".join(str(a) for a in args)
                          if args else f"    {mnemonic}")

    def comment(self, text: str):
        self.lines.append(f"; {text}")

    def goto(self, label: str):
        self("jeq", C(0), C(0), label)

    def mov(self, dst: int, src: str):
        self("or", R(dst), src, C(0))

    def zero(self, dst: int):
        self("and", R(dst), R(dst), C(0))

    def loop(self, counter: int, start: int, stop: int, body: Callable[[], None]):
        """``for counter in range(start, stop)``; ``body`` emits the loop body."""
        if stop <= start:
            return
        top, done = self.fresh("loop"), self.fresh("done")
        self.mov(counter, C(start))
        self.label(top)
        body()
        self("add", R(counter), R(counter), C(1))
        self("jeq", R(counter), C(stop), done)
        self.goto(top)
        self.label(done)

    def source(self) -> str:
        return "\n".join(self.header + self.lines + ["    halt"]) + "\n"

    def program(self) -> Program:
        return assemble(self.source())


# -- long-number plumbing ---------------------------------------------------

def read_limbs(em: Emitter, offset_bits: int, n: int, base: int, s: int):
    """Load the n-bit operand starting at tape position ``offset_bits`` into
    ``ceil(n/s)`` s-bit limbs ``R[base] ..`` (least significant first)."""
    m = -(-n // s)
    top = n - (m - 1) * s
    t = em.scalars("stop", "start", "dst", "val")
    em.mov(t["stop"], C(offset_bits + n - 1))
    em.mov(t["dst"], C(base))

    def one(bits: int):
        em("sub", R(t["start"]), R(t["stop"]), C(bits - 1))
        em("in", R(t["val"]), R(t["start"]), R(t["stop"]))
        em("vcopy", C(t["val"]), R(t["dst"]), C(1))

    if m > 1:
        top_label, done = em.fresh("rd"), em.fresh("rd_done")
        em.label(top_label)
        one(s)
        em("add", R(t["dst"]), R(t["dst"]), C(1))
        em("sub", R(t["stop"]), R(t["stop"]), C(s))
        em("jeq", R(t["dst"]), C(base + m - 1), done)
        em.goto(top_label)
        em.label(done)
    one(top)
    return m


def normalize(em: Emitter, base: int, count: int, s: int):
    """Carry-propagate ``count`` coefficients in place into s-bit limbs.

    The caller guarantees the final carry out of the last register is zero.
    """
    t = em.scalars("ptr", "acc", "low", "carry")
    em.mov(t["carry"], C(0))
    em.mov(t["ptr"], C(base))
    top, done = em.fresh("norm"), em.fresh("norm_done")
    em.label(top)
    em("add", R(t["acc"]), I(t["ptr"]), R(t["carry"]))
    em("and", R(t["low"]), R(t["acc"]), C((1 << s) - 1))
    em("vcopy", C(t["low"]), R(t["ptr"]), C(1))
    em("div", R(t["carry"]), R(t["acc"]), C(1 << s))
    em("add", R(t["ptr"]), R(t["ptr"]), C(1))
    em("jeq", R(t["ptr"]), C(base + count), done)
    em.goto(top)
    em.label(done)


def write_limbs(em: Emitter, base: int, s: int, total_bits: int):
    """Output the low ``total_bits`` bits of the limb array, MSB first."""
    q = -(-total_bits // s) - 1
    top_bits = total_bits - q * s
    t = em.scalars("ptr", "val")
    em.mov(t["ptr"], C(base + q))
    em("vcopy", R(t["ptr"]), C(t["val"]), C(1))
    em("out", R(t["val"]), C(top_bits))
    if q > 0:
        top, done = em.fresh("wr"), em.fresh("wr_done")
        em.label(top)
        em("sub", R(t["ptr"]), R(t["ptr"]), C(1))
        em("vcopy", R(t["ptr"]), C(t["val"]), C(1))
        em("out", R(t["val"]), C(s))
        em("jeq", R(t["ptr"]), C(base), done)
        em.goto(top)
        em.label(done)
