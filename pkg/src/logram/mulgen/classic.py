"""Long addition, schoolbook, Karatsuba and Toom-3 program generators.

All multiplication programs share one layout: each operand is cut into
``s = w``-bit limbs held in consecutive registers, products are formed as
coefficient vectors without carries, and a final pass resolves carries and
writes the 2n-bit product.
"""

from __future__ import annotations

from typing import Dict, List

from ..isa import MachineConfig
from .emit import C, Emitter, GenError, I, R, normalize, read_limbs, write_limbs


def check_size(n: int, minimum: int):
    if n < minimum or n & (n - 1):
        raise GenError(f"n must be a power of two >= {minimum}, got {n}")


def _check_width(em: Emitter, bits: int, cfg: MachineConfig):
    if bits > cfg.W - 2:
        raise GenError(f"intermediate values need {bits} bits, arithmetic width is {cfg.W - 2}")
    em.meta["max_value_bits"] = max(bits, em.meta.get("max_value_bits", 0))


# -- addition ----------------------------------------------------------------

def gen_add(n: int, cfg: MachineConfig) -> Emitter:
    check_size(n, 64)
    s = cfg.w
    m = -(-n // s)
    top = n - (m - 1) * s
    em = Emitter(f"add_{n}", tape="2n")
    t = em.scalars("pa1", "pa0", "pb1", "pb0", "x", "y", "acc", "low", "carry", "dst", "ptr", "val")
    sums = em.alloc(m)
    em.meta.update(algorithm="add", limb_bits=s, limbs=m)
    _check_width(em, s + 1, cfg)

    em.mov(t["pa1"], C(n - 1))
    em.mov(t["pb1"], C(2 * n - 1))
    em.mov(t["dst"], C(sums))

    def limb(bits: int):
        em("sub", R(t["pa0"]), R(t["pa1"]), C(bits - 1))
        em("in", R(t["x"]), R(t["pa0"]), R(t["pa1"]))
        em("sub", R(t["pb0"]), R(t["pb1"]), C(bits - 1))
        em("in", R(t["y"]), R(t["pb0"]), R(t["pb1"]))
        em("add", R(t["acc"]), R(t["x"]), R(t["y"]))
        em("add", R(t["acc"]), R(t["acc"]), R(t["carry"]))
        em("and", R(t["low"]), R(t["acc"]), C((1 << bits) - 1))
        em("div", R(t["carry"]), R(t["acc"]), C(1 << bits))

    if m > 1:
        top_label, done = em.fresh("add"), em.fresh("add_done")
        em.label(top_label)
        limb(s)
        em("vcopy", C(t["low"]), R(t["dst"]), C(1))
        em("add", R(t["dst"]), R(t["dst"]), C(1))
        em("sub", R(t["pa1"]), R(t["pa1"]), C(s))
        em("sub", R(t["pb1"]), R(t["pb1"]), C(s))
        em("jeq", R(t["dst"]), C(sums + m - 1), done)
        em.goto(top_label)
        em.label(done)
    limb(top)
    em("out", R(t["carry"]), C(1))
    em("out", R(t["low"]), C(top))
    if m > 1:
        em.mov(t["ptr"], C(sums + m - 1))
        top_label, done = em.fresh("wr"), em.fresh("wr_done")
        em.label(top_label)
        em("sub", R(t["ptr"]), R(t["ptr"]), C(1))
        em("vcopy", R(t["ptr"]), C(t["val"]), C(1))
        em("out", R(t["val"]), C(s))
        em("jeq", R(t["ptr"]), C(sums), done)
        em.goto(top_label)
        em.label(done)
    em.meta["registers"] = em.next_register
    return em


# -- schoolbook --------------------------------------------------------------

def gen_school(n: int, cfg: MachineConfig) -> Emitter:
    check_size(n, 64)
    s = cfg.w
    m = -(-n // s)
    em = Emitter(f"school_{n}", tape="2n")
    t = em.scalars("ai", "prod", "pa", "pz")
    acc = em.alloc(m)
    a = em.alloc(m)
    b = em.alloc(m)
    z = em.alloc(2 * m)
    em.meta.update(algorithm="school", limb_bits=s, limbs=m)
    _check_width(em, 2 * s + m.bit_length(), cfg)

    read_limbs(em, 0, n, a, s)
    read_limbs(em, n, n, b, s)
    em.mov(t["pa"], C(a))
    em.mov(t["pz"], C(z))
    row, done = em.fresh("row"), em.fresh("row_done")
    em.label(row)
    # one row: stage z[i .. i+m) next to the row multiplier, add a_i * b in place
    em("vcopy", R(t["pa"]), C(t["ai"]), C(1))
    em("vcopy", R(t["pz"]), C(acc), C(m))
    for j in range(m):
        em("mul", R(t["prod"]), R(t["ai"]), R(b + j))
        em("add", R(acc + j), R(acc + j), R(t["prod"]))
    em("vcopy", C(acc), R(t["pz"]), C(m))
    em("add", R(t["pa"]), R(t["pa"]), C(1))
    em("add", R(t["pz"]), R(t["pz"]), C(1))
    em("jeq", R(t["pa"]), C(a + m), done)
    em.goto(row)
    em.label(done)
    normalize(em, z, 2 * m, s)
    write_limbs(em, z, s, 2 * n)
    em.meta["registers"] = em.next_register
    return em


# -- recursive splitting (Karatsuba, Toom-3) ---------------------------------

class _Proc:
    __slots__ = ("size", "x", "y", "z", "ret", "label", "sites", "tmp")

    def __init__(self, size, x, y, z, ret, label):
        self.size = size
        self.x, self.y, self.z = x, y, z
        self.ret = ret
        self.label = label
        self.sites: List[tuple] = []
        self.tmp = None


class _Recursive:
    """Emits one procedure per operand length.

    A procedure of length L multiplies the L-limb vectors in its X and Y
    buffers into its Z buffer (2L-1 coefficients, no carries).  Lengths
    strictly decrease down the recursion, so each buffer set is live at most
    once and a single return-tag register per length replaces a call stack.
    """

    def __init__(self, em: Emitter, cut: int, scheme: str, zero_region: int):
        self.em = em
        self.cut = cut
        self.scheme = scheme
        self.zero = zero_region
        self.procs: Dict[int, _Proc] = {}
        self.pending: List[_Proc] = []
        self.tags = 0
        self.tmp = em.alloc()
        self.depth: Dict[int, int] = {}

    def proc(self, L: int) -> _Proc:
        p = self.procs.get(L)
        if p is None:
            em = self.em
            p = _Proc(L, em.alloc(L), em.alloc(L), em.alloc(2 * L - 1), em.alloc(),
                      f"mul{L}")
            if self.scheme == "toom3" and L > self.cut:
                h = -(-L // 3)
                p.tmp = [em.alloc(2 * h - 1) for _ in range(3)]
            self.procs[L] = p
            self.pending.append(p)
        return p

    def call(self, L: int):
        em = self.em
        p = self.proc(L)
        self.tags += 1
        back = em.fresh(f"ret{L}")
        p.sites.append((self.tags, back))
        em.mov(p.ret, C(self.tags))
        em.goto(p.label)
        em.label(back)

    def load(self, child: _Proc, x_src: int, y_src: int, count: int):
        em = self.em
        em("vcopy", C(x_src), C(child.x), C(count))
        em("vcopy", C(y_src), C(child.y), C(count))
        if count < child.size:
            em("vcopy", C(self.zero), C(child.x + count), C(child.size - count))
            em("vcopy", C(self.zero), C(child.y + count), C(child.size - count))

    def emit_all(self):
        em = self.em
        while self.pending:
            p = self.pending.pop(0)
            em.label(p.label)
            if p.size <= self.cut:
                self._leaf(p)
            elif self.scheme == "karatsuba":
                self._karatsuba(p)
            else:
                self._toom3(p)
            em.goto(f"back{p.size}")
        for L, p in sorted(self.procs.items()):
            em.label(f"back{L}")
            for tag, back in p.sites:
                em("jeq", R(p.ret), C(tag), back)

    def levels(self, L: int) -> int:
        if L <= self.cut:
            return 0
        if self.scheme == "karatsuba":
            h = -(-L // 2)
            return 1 + self.levels(h)
        return 1 + self.levels(-(-L // 3))

    # -- bodies ----------------------------------------------------------
    def _leaf(self, p: _Proc):
        em, L = self.em, p.size
        for k in range(2 * L - 1):
            first = True
            for i in range(max(0, k - L + 1), min(k, L - 1) + 1):
                j = k - i
                if first:
                    em("mul", R(p.z + k), R(p.x + i), R(p.y + j))
                    first = False
                else:
                    em("mul", R(self.tmp), R(p.x + i), R(p.y + j))
                    em("add", R(p.z + k), R(p.z + k), R(self.tmp))

    def _karatsuba(self, p: _Proc):
        em, L = self.em, p.size
        h = -(-L // 2)
        l = L - h
        ch, cl = self.proc(h), self.proc(l)
        # low halves
        self.load(ch, p.x, p.y, h)
        self.call(h)
        em("vcopy", C(ch.z), C(p.z), C(2 * h - 1))
        em.zero(p.z + 2 * h - 1)
        # high halves
        self.load(cl, p.x + h, p.y + h, l)
        self.call(l)
        em("vcopy", C(cl.z), C(p.z + 2 * h), C(2 * l - 1))
        # (x0 + x1)(y0 + y1)
        for src, dst in ((p.x, ch.x), (p.y, ch.y)):
            for i in range(l):
                em("add", R(dst + i), R(src + i), R(src + h + i))
            for i in range(l, h):
                em.mov(dst + i, R(src + i))
        self.call(h)
        # middle = sum product - low - high, all coefficientwise nonnegative
        for i in range(2 * h - 1):
            em("sub", R(ch.z + i), R(ch.z + i), R(p.z + i))
            if i < 2 * l - 1:
                em("sub", R(ch.z + i), R(ch.z + i), R(p.z + 2 * h + i))
        for i in range(2 * h - 1):
            em("add", R(p.z + h + i), R(p.z + h + i), R(ch.z + i))

    def _toom3(self, p: _Proc):
        em, L = self.em, p.size
        h = -(-L // 3)
        l = L - 2 * h
        ch, cl = self.proc(h), self.proc(l)
        t1, t2, t3 = p.tmp
        tmp = self.tmp

        def part(base, k, i):
            # limb i of part k (zero past the short top part)
            if k == 2 and i >= l:
                return None
            return R(base + k * h + i)

        def evaluate(point: int, src: int, dst: int):
            for i in range(h):
                a0, a1, a2 = part(src, 0, i), part(src, 1, i), part(src, 2, i)
                if point == 1:
                    em("add", R(dst + i), a0, a1)
                    if a2:
                        em("add", R(dst + i), R(dst + i), a2)
                else:
                    em("mul", R(dst + i), a1, C(point))
                    if a2:
                        em("mul", R(tmp), a2, C(point * point))
                        em("add", R(dst + i), R(dst + i), R(tmp))
                    em("add", R(dst + i), R(dst + i), a0)

        # w(0) and w(inf)
        self.load(ch, p.x, p.y, h)
        self.call(h)
        em("vcopy", C(ch.z), C(p.z), C(2 * h - 1))
        em("vcopy", C(self.zero), C(p.z + 2 * h - 1), C(2 * h + 1))
        self.load(cl, p.x + 2 * h, p.y + 2 * h, l)
        self.call(l)
        em("vcopy", C(cl.z), C(p.z + 4 * h), C(2 * l - 1))
        # w(1), w(2), w(3)
        for point, store in ((1, t1), (2, t2), (3, t3)):
            evaluate(point, p.x, ch.x)
            evaluate(point, p.y, ch.y)
            self.call(h)
            em("vcopy", C(ch.z), C(store), C(2 * h - 1))
        # interpolation, one coefficient index at a time; t1..t3 become c1..c3
        for i in range(2 * h - 1):
            c0 = R(p.z + i)
            c4 = R(p.z + 4 * h + i) if i < 2 * l - 1 else None
            s1, s2, s3 = R(t1 + i), R(t2 + i), R(t3 + i)
            em("sub", s1, s1, c0)
            em("sub", s2, s2, c0)
            em("sub", s3, s3, c0)
            if c4:
                em("sub", s1, s1, c4)
                em("mul", R(tmp), c4, C(16))
                em("sub", s2, s2, R(tmp))
                em("mul", R(tmp), c4, C(81))
                em("sub", s3, s3, R(tmp))
            em("div", s2, s2, C(2))         # c1 + 2c2 + 4c3
            em("div", s3, s3, C(3))         # c1 + 3c2 + 9c3
            em("sub", s3, s3, s2)           # c2 + 5c3
            em("sub", s2, s2, s1)           # c2 + 3c3
            em("sub", s3, s3, s2)           # 2c3
            em("div", s3, s3, C(2))         # c3
            em("mul", R(tmp), s3, C(3))
            em("sub", s2, s2, R(tmp))       # c2
            em("sub", s1, s1, s2)
            em("sub", s1, s1, s3)           # c1
        for k, store in ((1, t1), (2, t2), (3, t3)):
            for i in range(2 * h - 1):
                em("add", R(p.z + k * h + i), R(p.z + k * h + i), R(store + i))


def _bits_bound(scheme: str, L: int, cut: int, op_bits: int) -> int:
    """Bit bound on every intermediate of a length-L recursive product."""
    if L <= cut:
        return 2 * op_bits + (L.bit_length())
    if scheme == "karatsuba":
        h = -(-L // 2)
        return max(_bits_bound(scheme, h, cut, op_bits + 1), 2 * op_bits + L.bit_length())
    h = -(-L // 3)
    return max(_bits_bound(scheme, h, cut, op_bits + 4) + 1, 2 * op_bits + L.bit_length() + 1)


def _gen_recursive(scheme: str, n: int, cfg: MachineConfig, cutoff_bits: int) -> Emitter:
    s = cfg.w
    m = -(-n // s)
    cut = max(2 if scheme == "karatsuba" else 3, cutoff_bits // s)
    em = Emitter(f"{scheme}_{n}", tape="2n")
    rec = _Recursive(em, cut, scheme, zero_region=0)
    rec.zero = em.alloc(m)
    _check_width(em, _bits_bound(scheme, m, cut, s), cfg)
    top = rec.proc(m)
    limbs = em.alloc(2 * m)
    read_limbs(em, 0, n, top.x, s)
    read_limbs(em, n, n, top.y, s)
    rec.call(m)
    em("vcopy", C(top.z), C(limbs), C(2 * m - 1))
    normalize(em, limbs, 2 * m, s)
    write_limbs(em, limbs, s, 2 * n)
    em("halt")
    rec.emit_all()
    em.meta.update(algorithm=scheme, limb_bits=s, limbs=m, leaf_limbs=cut,
                   recursion_depth=rec.levels(m), procedures=len(rec.procs),
                   registers=em.next_register)
    return em


def gen_karatsuba(n: int, cfg: MachineConfig, cutoff_bits: int = None) -> Emitter:
    check_size(n, 64)
    return _gen_recursive("karatsuba", n, cfg, cutoff_bits or 4 * cfg.w)


def gen_toom3(n: int, cfg: MachineConfig, cutoff_bits: int = None) -> Emitter:
    check_size(n, 256)
    return _gen_recursive("toom3", n, cfg, cutoff_bits or 4 * cfg.w)
