"""Fermat-ring multiplication (SS-F) program generator.

An operand is cut into K pieces of b bits.  The pieces are coefficients of a
polynomial over Z/(2^m + 1), zero-padded to a cyclic transform of length
L = 2^t >= 2K - 1, where 2 has order 2m so the root of unity 2^(2m/L) is a
power of two.  Butterflies therefore need only additions and rotations.
Pointwise products of m-bit residues are computed by the same construction
one level down, or by word schoolbook once another level would no longer
shorten them.

Residue format.  A slot holds q = m/64 limbs of 64 bits followed by two small
counters T and P; the value is ``limbs - T + P`` modulo 2^m + 1.  Additions
and subtractions push their carry out of the top limb into T (2^m = -1), so
butterflies never run a normalization pass.  NORM brings a slot to canonical
form (P = 0, T in {0, 1}, T = 1 only for the value 2^m) before a pointwise
product and before coefficients are read out.

Multiplication by 2^e, 0 < e < m, uses
``x * 2^e = C + 1 + (P - T - 1) * 2^e`` where C is the m-bit rotation of the
limbs by e with the e wrapped bits complemented.  The word part of the
rotation is two vcopies, the bit part a rotl per limb.

Each level is emitted once as straight-line kernels on low staging
registers; sweeps copy slots in and out with vcopy.  Lower levels are
procedures entered from the parent's pointwise loop.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

from ..isa import MachineConfig, ceil_log2
from .classic import check_size
from .emit import C, Emitter, GenError, I, R, write_limbs

S = 64
MASK = (1 << S) - 1
DIGIT = 32
_BIG = 1 << 20             # sign test offset for the small counters
_SUB_BIAS = 1 << 80        # borrow propagation bias
_BORROW_UNIT = 1 << 16     # _SUB_BIAS >> S


@dataclass(frozen=True)
class SSFLevel:
    """Parameters of one level: operands of ``op_bits`` bits, full product."""

    op_bits: int
    b: int
    K: int
    t: int
    m: int
    child: Optional["SSFLevel"] = None

    @property
    def L(self) -> int:
        return 1 << self.t

    @property
    def q(self) -> int:
        return self.m // S

    @property
    def u(self) -> int:
        return self.b // S

    @property
    def stride(self) -> int:
        return self.q + 2

    @property
    def op_limbs(self) -> int:
        return -(-self.op_bits // S)

    @property
    def depth(self) -> int:
        return 1 + (self.child.depth if self.child else 0)

    @property
    def acc_limbs(self) -> int:
        return max(2 * self.op_limbs, (2 * self.K - 2) * self.u + self.q + 1) + 1

    def chain(self) -> List["SSFLevel"]:
        out, lv = [], self
        while lv is not None:
            out.append(lv)
            lv = lv.child
        return out

    def as_dict(self, prefix: str = "") -> Dict[str, int]:
        return {f"{prefix}{k}": getattr(self, k) for k in ("op_bits", "b", "K", "t", "m")}


def level_for(op_bits: int, b: int) -> SSFLevel:
    """The smallest valid ring for b-bit pieces of an ``op_bits``-bit operand."""
    if b % S or b <= 0:
        raise GenError(f"piece length {b} is not a positive multiple of {S}")
    K = -(-op_bits // b)
    if K < 2:
        raise GenError("a level needs at least two pieces")
    t = max(2, ceil_log2(2 * K - 1))
    step = math.lcm(1 << (t - 1), S)
    need = 2 * b + ceil_log2(K)
    m = -(-need // step) * step
    return SSFLevel(op_bits, b, K, t, m)


def _limb_cost(w: int) -> int:
    return -(-S // w)


def estimate_level(lv: SSFLevel, w: int) -> float:
    """Rough unit cost of one call of ``lv`` (butterflies, sweeps, products).

    Measured ledgers of random operands come out at 0.75 to 0.8 times this.
    """
    k = _limb_cost(w)
    kd = -(-DIGIT // w)
    q, L, t = lv.q, lv.L, lv.t
    bfly = 3 * (L // 2) * t * (q * (23 * k + 8) + 60)
    sweeps = L * (q * (14 * k + 6) + 80) + 2 * lv.K * q * 8 * k
    if lv.child is None:
        base = L * ((2 * q) ** 2 * (kd * kd + k) + q * 40 * k)
    else:
        base = L * (estimate_level(lv.child, w) + 4 * q)
    return bfly + sweeps + base


def sqrt_piece(op_bits: int) -> int:
    """Piece length near sqrt(op_bits), rounded up to whole limbs."""
    return S * max(1, -(-(math.isqrt(op_bits - 1) + 1) // S))


def _sqrt_chain(op_bits: int, b: Optional[int] = None) -> SSFLevel:
    lv = level_for(op_bits, b or sqrt_piece(op_bits))
    try:
        sub = level_for(lv.m, sqrt_piece(lv.m))
    except GenError:
        return lv
    if sub.m >= lv.m:
        return lv
    return SSFLevel(lv.op_bits, lv.b, lv.K, lv.t, lv.m, _sqrt_chain(lv.m))


def _piece_lengths(op_bits: int) -> List[int]:
    """Candidate piece lengths: 64 * 2^i and 96 * 2^i, at most half the operand."""
    out = []
    for base in (S, 3 * S // 2):
        b = base
        while b <= max(S, op_bits // 2):
            out.append(b)
            b *= 2
    return sorted(out)


@functools.lru_cache(maxsize=None)
def _cheapest(op_bits: int, w: int, base_bits: int, depth_left: int) -> Tuple[float, SSFLevel]:
    best: Optional[Tuple[float, SSFLevel]] = None
    for b in _piece_lengths(op_bits):
        try:
            lv = level_for(op_bits, b)
        except GenError:
            continue
        if lv.m > base_bits:
            if depth_left < 2 or lv.m >= op_bits:
                continue
            try:
                sub = _cheapest(lv.m, w, base_bits, depth_left - 1)[1]
            except GenError:
                continue
            lv = SSFLevel(lv.op_bits, lv.b, lv.K, lv.t, lv.m, sub)
        c = estimate_level(lv, w)
        if best is None or c < best[0]:
            best = (c, lv)
    if best is None:
        raise GenError(f"no Fermat-ring level for {op_bits}-bit operands")
    return best


def ssf_plan(n: int, cfg: MachineConfig, b: Optional[int] = None,
             strategy: str = "sqrt") -> SSFLevel:
    """Level chain for n-bit operands.

    ``sqrt`` cuts every level into about sqrt(op_bits) pieces and recurses
    while one more level still shortens the residues; the last level then
    multiplies its residues with word schoolbook.  ``cheapest`` minimizes
    :func:`estimate_level` instead, allowing schoolbook on residues of up to
    three arithmetic words.  ``b`` fixes the top piece length.
    """
    if strategy == "sqrt":
        return _sqrt_chain(n, b)
    if strategy != "cheapest":
        raise GenError(f"unknown SS-F plan strategy {strategy!r}")
    limit = 3 * (cfg.W - 2)
    if b is None:
        return _cheapest(n, cfg.w, limit, 4)[1]
    lv = level_for(n, b)
    if lv.m <= limit:
        return lv
    if lv.m >= n:
        raise GenError(f"b = {b} leaves {lv.m}-bit residues with no smaller level")
    sub = _cheapest(lv.m, cfg.w, limit, 3)[1]
    return SSFLevel(lv.op_bits, lv.b, lv.K, lv.t, lv.m, sub)


class _Level:
    """Registers and kernels of one level."""

    def __init__(self, em: Emitter, lv: SSFLevel, idx: int):
        self.em, self.lv, self.idx = em, lv, idx
        q, st = lv.q, lv.stride
        self.s = em.scalars("v", "c", "lo", "t1", "t2", "ny", "u", "h", "amt", "ptr",
                            "ra", "rr", "LO", "HI", "one", "a", "r", "da", "dr", "inc",
                            "hh", "hs", "px", "py", "blk", "jend", "bend", "fb", "tb",
                            "k", "pa")
        self.SX, self.SY, self.ST, self.SR = (em.alloc(st) for _ in range(4))
        self.WB, self.NB = em.alloc(q), em.alloc(q)
        self.SA = em.alloc(q)
        if lv.child is None:
            self.XD, self.YD = em.alloc(2 * q), em.alloc(2 * q)
            self.COL = em.alloc(4 * q)
            self.PL = em.alloc(2 * q)
        if idx > 0:
            ol = lv.op_limbs
            self.IN_X, self.IN_Y = em.alloc(ol + 1), em.alloc(ol + 1)
            self.OUT = em.alloc(ol + 2)
        self.entry = f"ssf{idx}_entry"
        self.ret = f"ssf{idx}_ret"

    def place_arrays(self):
        lv = self.lv
        self.A = self.em.alloc(lv.L * lv.stride)
        self.B = self.em.alloc(lv.L * lv.stride)
        self.ACC = self.em.alloc(lv.acc_limbs)

    def r(self, name: str) -> str:
        return R(self.s[name])

    # -- carry chains --------------------------------------------------------
    def prop_add(self, end: int, done: str, overflow: str):
        """Add ``amt`` at limb R[ptr], carrying upward; a carry out of limb
        ``end - 1`` jumps to ``overflow`` with the carry left in ``amt``."""
        em, r = self.em, self.r
        top = em.fresh("pa")
        em.label(top)
        em("add", r("v"), I(self.s["ptr"]), r("amt"))
        em("and", r("lo"), r("v"), C(MASK))
        em("vcopy", C(self.s["lo"]), r("ptr"), C(1))
        em("rotr", r("amt"), r("v"), C(S), C(81))
        em("and", r("amt"), r("amt"), C((1 << 17) - 1))
        em("jeq", r("amt"), C(0), done)
        em("add", r("ptr"), r("ptr"), C(1))
        em("jeq", r("ptr"), C(end), overflow)
        em.goto(top)

    def prop_sub(self, end: int, done: str, overflow: str):
        """Subtract ``amt`` (< 2**80) at limb R[ptr], borrowing upward."""
        em, r = self.em, self.r
        top = em.fresh("ps")
        em.label(top)
        em("add", r("v"), I(self.s["ptr"]), C(_SUB_BIAS))
        em("sub", r("v"), r("v"), r("amt"))
        em("and", r("lo"), r("v"), C(MASK))
        em("vcopy", C(self.s["lo"]), r("ptr"), C(1))
        em("rotr", r("t1"), r("v"), C(S), C(81))
        em("and", r("t1"), r("t1"), C((1 << 17) - 1))
        em("sub", r("amt"), C(_BORROW_UNIT), r("t1"))
        em("jeq", r("amt"), C(0), done)
        em("add", r("ptr"), r("ptr"), C(1))
        em("jeq", r("ptr"), C(end), overflow)
        em.goto(top)

    # -- residue kernels -----------------------------------------------------
    def carry_out(self):
        em, r = self.em, self.r
        em("rotr", r("c"), r("v"), C(S), C(S + 3))
        em("and", r("c"), r("c"), C(7))

    def add(self, Z: int, X: int, Y: int, q: int):
        """Z = X + Y; Z may alias X or Y."""
        em, r = self.em, self.r
        em("add", r("c"), R(X + q + 1), R(Y + q + 1))
        for i in range(q):
            em("add", r("v"), R(X + i), R(Y + i))
            em("add", r("v"), r("v"), r("c"))
            em("and", R(Z + i), r("v"), C(MASK))
            self.carry_out()
        em("add", r("t1"), R(X + q), R(Y + q))
        em("add", R(Z + q), r("t1"), r("c"))
        em.zero(Z + q + 1)

    def sub(self, Z: int, X: int, Y: int, q: int):
        """Z = X - Y via the complement of Y; Z may alias X but not Y."""
        em, r = self.em, self.r
        assert Z != Y
        em("add", r("c"), R(Y + q), R(X + q + 1))
        em("add", r("c"), r("c"), C(2))
        em("add", r("t2"), R(X + q), R(Y + q + 1))
        for i in range(q):
            em("sub", r("ny"), C(MASK), R(Y + i))
            em("add", r("v"), R(X + i), r("ny"))
            em("add", r("v"), r("v"), r("c"))
            em("and", R(Z + i), r("v"), C(MASK))
            self.carry_out()
        em("add", R(Z + q), r("t2"), r("c"))
        em.zero(Z + q + 1)

    def neg(self, X: int, q: int):
        em, r = self.em, self.r
        for i in range(q):
            em("sub", R(X + i), C(MASK), R(X + i))
        em.mov(self.s["t1"], R(X + q))
        em.mov(X + q, R(X + q + 1))
        em("add", R(X + q + 1), r("t1"), C(2))

    def norm(self, X: int, q: int):
        """Canonical form: P = 0, T in {0, 1}, T = 1 only with zero limbs."""
        em, r = self.em, self.r
        T, P = X + q, X + q + 1
        neg, sub, fin, end = (em.fresh(x) for x in ("nneg", "nsub", "nfin", "nend"))
        ov1, ov2, ov3 = em.fresh("nov"), em.fresh("nov"), em.fresh("nov")
        em("add", r("u"), R(P), C(_BIG))
        em("sub", r("u"), r("u"), R(T))
        em("and", r("h"), r("u"), C(_BIG))
        em("jeq", r("h"), C(0), neg)
        em("sub", r("amt"), R(P), R(T))
        em("jeq", r("amt"), C(0), fin)
        em.mov(self.s["ptr"], C(X))
        self.prop_add(X + q, fin, ov1)
        em.label(ov1)
        em.goto(sub)
        em.label(neg)
        em("sub", r("amt"), R(T), R(P))
        em.label(sub)
        em.mov(self.s["ptr"], C(X))
        self.prop_sub(X + q, fin, ov2)
        em.label(ov2)
        em.mov(self.s["amt"], C(1))
        em.mov(self.s["ptr"], C(X))
        self.prop_add(X + q, fin, ov3)
        em.label(ov3)
        em.mov(T, C(1))
        em.zero(P)
        em.goto(end)
        em.label(fin)
        em.zero(T)
        em.zero(P)
        em.label(end)

    def set_masks(self):
        em, r = self.em, self.r
        em("rotl", r("LO"), r("one"), r("rr"), C(S))
        em("sub", r("LO"), r("LO"), C(1))
        em("xor", r("HI"), r("LO"), C(MASK))

    def rot(self, q: int):
        """SR = ST * 2**e, e = 64 * ra + rr in (0, m); masks set by set_masks."""
        em, r = self.em, self.r
        ST, SR, WB, NB = self.ST, self.SR, self.WB, self.NB
        for i in range(q):
            em("sub", R(NB + i), C(MASK), R(ST + i))
        em("add", r("t1"), r("ra"), C(WB))
        em("sub", r("t2"), C(q), r("ra"))
        em("vcopy", C(ST), r("t1"), r("t2"))
        em("add", r("t2"), r("t2"), C(NB))
        em("vcopy", r("t2"), C(WB), r("ra"))
        for i in range(q):
            em("rotl", R(WB + i), R(WB + i), r("rr"), C(S))
        em("and", r("t1"), R(WB + q - 1), r("LO"))
        em("sub", r("t1"), r("LO"), r("t1"))
        em("and", r("t2"), R(WB), r("HI"))
        em("or", R(SR), r("t1"), r("t2"))
        for i in range(1, q):
            em("and", r("t1"), R(WB + i), r("HI"))
            em("and", r("t2"), R(WB + i - 1), r("LO"))
            em("or", R(SR + i), r("t1"), r("t2"))
        # SR = C + 1 + (P - T - 1) * 2**e
        em.zero(SR + q)
        em.mov(SR + q + 1, C(1))
        pos, done, ovp, ovn = em.fresh("rpos"), em.fresh("rdone"), em.fresh("rov"), em.fresh("rov")
        em("add", r("u"), R(ST + q + 1), C(_BIG))
        em("sub", r("u"), r("u"), R(ST + q))
        em("sub", r("u"), r("u"), C(1))
        em("and", r("h"), r("u"), C(_BIG))
        em("add", r("ptr"), r("ra"), C(SR))
        em("jeq", r("h"), C(_BIG), pos)
        em("sub", r("amt"), C(_BIG), r("u"))
        em("rotl", r("amt"), r("amt"), r("rr"), C(96))
        self.prop_sub(SR + q, done, ovn)
        em.label(ovn)
        em("add", R(SR + q + 1), R(SR + q + 1), r("amt"))
        em.goto(done)
        em.label(pos)
        em("sub", r("amt"), r("u"), C(_BIG))
        em("jeq", r("amt"), C(0), done)
        em("rotl", r("amt"), r("amt"), r("rr"), C(96))
        self.prop_add(SR + q, done, ovp)
        em.label(ovp)
        em("add", R(SR + q), R(SR + q), r("amt"))
        em.label(done)

    def mulmod_base(self, X: int, Y: int, q: int):
        """X = X * Y mod 2**m + 1 for canonical X, Y by 32-bit digit schoolbook."""
        em, r = self.em, self.r
        XD, YD, COL, PL = self.XD, self.YD, self.COL, self.PL
        sx, sy, end = em.fresh("mx"), em.fresh("my"), em.fresh("mend")
        em("jeq", R(X + q), C(1), sx)
        em("jeq", R(Y + q), C(1), sy)
        dmask = (1 << DIGIT) - 1
        for src, dst in ((X, XD), (Y, YD)):
            for i in range(q):
                em("and", R(dst + 2 * i), R(src + i), C(dmask))
                em("rotr", r("t1"), R(src + i), C(DIGIT), C(S))
                em("and", R(dst + 2 * i + 1), r("t1"), C(dmask))
        nd = 2 * q
        for k in range(2 * nd - 1):
            terms = [(i, k - i) for i in range(max(0, k - nd + 1), min(k, nd - 1) + 1)]
            i0, j0 = terms[0]
            em("mul", R(COL + k), R(XD + i0), R(YD + j0))
            for i, j in terms[1:]:
                em("mul", r("t1"), R(XD + i), R(YD + j))
                em("add", R(COL + k), R(COL + k), r("t1"))
        em.zero(COL + 2 * nd - 1)
        em.zero(self.s["c"])
        for k in range(2 * nd):
            em("add", r("v"), R(COL + k), r("c"))
            em("and", R(COL + k), r("v"), C(dmask))
            em("rotr", r("c"), r("v"), C(DIGIT), C(80))
            em("and", r("c"), r("c"), C((1 << 48) - 1))
        for i in range(2 * q):
            em("rotl", r("t1"), R(COL + 2 * i + 1), C(DIGIT), C(S))
            em("or", R(PL + i), R(COL + 2 * i), r("t1"))
        # X = low - high
        em.mov(self.s["c"], C(2))
        for i in range(q):
            em("sub", r("ny"), C(MASK), R(PL + q + i))
            em("add", r("v"), R(PL + i), r("ny"))
            em("add", r("v"), r("v"), r("c"))
            em("and", R(X + i), r("v"), C(MASK))
            self.carry_out()
        em.mov(X + q, r("c"))
        em.zero(X + q + 1)
        self.norm(X, q)
        em.goto(end)
        em.label(sx)
        em("vcopy", C(Y), C(X), C(q + 2))
        em.label(sy)
        self.neg(X, q)
        self.norm(X, q)
        em.label(end)

    # -- sweeps ----------------------------------------------------------------
    def transform(self, inverse: bool):
        """In-place length-L transform of the array whose base is in ``fb``."""
        em, r, lv = self.em, self.r, self.lv
        q, L, m, st = lv.q, lv.L, lv.m, lv.stride
        SX, SY, ST, SR = self.SX, self.SY, self.ST, self.SR
        tag = "inv" if inverse else "fwd"
        stage_top, stages_done = em.fresh(tag + "_st"), em.fresh(tag + "_sd")
        blk_top, blk_done = em.fresh(tag + "_bk"), em.fresh(tag + "_bd")
        j_top, j_done, j0, j_next = (em.fresh(tag + x) for x in ("_j", "_jd", "_j0", "_jn"))
        if inverse:
            em.mov(self.s["hh"], C(1))
            em.mov(self.s["inc"], C(m))
        else:
            em.mov(self.s["hh"], C(L // 2))
            em.mov(self.s["inc"], C(2 * m // L))
        em("add", r("bend"), r("fb"), C(L * st))
        em.label(stage_top)
        em("div", r("da"), r("inc"), C(S))
        em("and", r("dr"), r("inc"), C(S - 1))
        em("mul", r("hs"), r("hh"), C(st))
        em.mov(self.s["px"], r("fb"))
        em.label(blk_top)
        em.mov(self.s["blk"], r("px"))
        em("add", r("jend"), r("px"), r("hs"))
        em.zero(self.s["a"])
        em.zero(self.s["r"])
        em.label(j_top)
        em("add", r("py"), r("px"), r("hs"))
        em("vcopy", r("px"), C(SX), C(st))
        em("vcopy", r("py"), C(SY), C(st))
        if not inverse:
            self.sub(ST, SX, SY, q)
            self.add(SX, SX, SY, q)
            em("vcopy", C(SX), r("px"), C(st))
            em("jeq", r("px"), r("blk"), j0)
            em.mov(self.s["ra"], r("a"))
            em.mov(self.s["rr"], r("r"))
            self.set_masks()
            self.rot(q)
            em("vcopy", C(SR), r("py"), C(st))
            em.goto(j_next)
            em.label(j0)
            em("vcopy", C(ST), r("py"), C(st))
        else:
            em("jeq", r("px"), r("blk"), j0)
            # rotate by m - e
            rz = em.fresh("rz")
            em("sub", r("ra"), C(q), r("a"))
            em.zero(self.s["rr"])
            em("jeq", r("r"), C(0), rz)
            em("sub", r("ra"), r("ra"), C(1))
            em("sub", r("rr"), C(S), r("r"))
            em.label(rz)
            self.set_masks()
            em("vcopy", C(SY), C(ST), C(st))
            self.rot(q)
            self.sub(ST, SX, SR, q)
            self.add(SX, SX, SR, q)
            em("vcopy", C(ST), r("px"), C(st))
            em("vcopy", C(SX), r("py"), C(st))
            em.goto(j_next)
            em.label(j0)
            self.sub(ST, SX, SY, q)
            self.add(SX, SX, SY, q)
            em("vcopy", C(SX), r("px"), C(st))
            em("vcopy", C(ST), r("py"), C(st))
        em.label(j_next)
        em("add", r("px"), r("px"), C(st))
        em("add", r("r"), r("r"), r("dr"))
        em("add", r("a"), r("a"), r("da"))
        nowrap = em.fresh("nw")
        em("and", r("tb"), r("r"), C(S))
        em("jeq", r("tb"), C(0), nowrap)
        em("sub", r("r"), r("r"), C(S))
        em("add", r("a"), r("a"), C(1))
        em.label(nowrap)
        em("jeq", r("px"), r("jend"), j_done)
        em.goto(j_top)
        em.label(j_done)
        em("add", r("px"), r("px"), r("hs"))
        em("jeq", r("px"), r("bend"), blk_done)
        em.goto(blk_top)
        em.label(blk_done)
        if inverse:
            em("jeq", r("hh"), C(L // 2), stages_done)
            em("add", r("hh"), r("hh"), r("hh"))
            em("div", r("inc"), r("inc"), C(2))
        else:
            em("jeq", r("hh"), C(1), stages_done)
            em("div", r("hh"), r("hh"), C(2))
            em("add", r("inc"), r("inc"), r("inc"))
        em.goto(stage_top)
        em.label(stages_done)

    def coefficients(self):
        """ACC = sum_k c_k 2**(k b), c_k = -(A_k * 2**(m - t)) canonical."""
        em, r, lv = self.em, self.r, self.lv
        q, st, u, t, m = lv.q, lv.stride, lv.u, lv.t, lv.m
        e = m - t
        em.mov(self.s["ra"], C(e // S))
        em.mov(self.s["rr"], C(e % S))
        self.set_masks()
        em.mov(self.s["px"], C(self.A))
        em.mov(self.s["pa"], C(self.ACC))
        top, done = em.fresh("cf"), em.fresh("cfd")
        em.label(top)
        em("vcopy", r("px"), C(self.ST), C(st))
        self.rot(q)
        self.neg(self.SR, q)
        self.norm(self.SR, q)
        em("vcopy", r("pa"), C(self.SA), C(q))
        em.zero(self.s["c"])
        for i in range(q):
            em("add", r("v"), R(self.SA + i), R(self.SR + i))
            em("add", r("v"), r("v"), r("c"))
            em("and", R(self.SA + i), r("v"), C(MASK))
            self.carry_out()
        em("vcopy", C(self.SA), r("pa"), C(q))
        nc = em.fresh("nc")
        em("jeq", r("c"), C(0), nc)
        em.mov(self.s["amt"], r("c"))
        em("add", r("ptr"), r("pa"), C(q))
        self.prop_add(self.ACC + lv.acc_limbs, nc, nc)
        em.label(nc)
        em("add", r("px"), r("px"), C(st))
        em("add", r("pa"), r("pa"), C(u))
        em("jeq", r("px"), C(self.A + (2 * lv.K - 1) * st), done)
        em.goto(top)
        em.label(done)

    def read_tape(self, base: int, offset: int, n: int):
        """Pieces of the n-bit operand at tape ``offset`` into slots of ``base``."""
        em, r, lv = self.em, self.r, self.lv
        u, st = lv.u, lv.stride
        total = n // S
        em.mov(self.s["a"], C(offset + n - 1))
        em.mov(self.s["px"], C(base))
        em.zero(self.s["k"])
        top, nxt, done = em.fresh("rt"), em.fresh("rtn"), em.fresh("rtd")
        em.label(top)
        em.mov(self.s["ptr"], r("px"))
        em.zero(self.s["r"])
        inner = em.fresh("rti")
        em.label(inner)
        em("sub", r("t1"), r("a"), C(S - 1))
        em("in", r("v"), r("t1"), r("a"))
        em("vcopy", C(self.s["v"]), r("ptr"), C(1))
        em("add", r("k"), r("k"), C(1))
        em("jeq", r("k"), C(total), done)
        em("sub", r("a"), r("a"), C(S))
        em("add", r("ptr"), r("ptr"), C(1))
        em("add", r("r"), r("r"), C(1))
        em("jeq", r("r"), C(u), nxt)
        em.goto(inner)
        em.label(nxt)
        em("add", r("px"), r("px"), C(st))
        em.goto(top)
        em.label(done)


class _Gen:
    def __init__(self, top: SSFLevel, em: Emitter, n: int):
        self.em, self.n = em, n
        chain = top.chain()
        self.levels: List[_Level] = [None] * len(chain)
        for idx in reversed(range(len(chain))):
            self.levels[idx] = _Level(em, chain[idx], idx)
        zero = max(max(lv.L * lv.stride, lv.acc_limbs) for lv in chain[1:]) if len(chain) > 1 else 0
        self.ZERO = em.alloc(zero)
        for lvg in reversed(self.levels):
            lvg.place_arrays()

    def level_body(self, g: _Level):
        em = self.em
        child = self.levels[g.idx + 1] if g.idx + 1 < len(self.levels) else None
        em.mov(g.s["one"], C(1))
        em.mov(g.s["fb"], C(g.A))
        for base in (g.A, g.B):
            em.mov(g.s["fb"], C(base))
            g.transform(inverse=False)
        self.pointwise(g, child)
        em.mov(g.s["fb"], C(g.A))
        g.transform(inverse=True)
        g.coefficients()

    def pointwise(self, g: _Level, child: Optional[_Level]):
        em, lv = self.em, g.lv
        q, L, st = lv.q, lv.L, lv.stride
        r = g.r
        SX, SY = g.SX, g.SY
        top, done = em.fresh("pw"), em.fresh("pwd")
        em.mov(g.s["px"], C(g.A))
        em.mov(g.s["py"], C(g.B))
        em.label(top)
        em("vcopy", r("px"), C(SX), C(st))
        em("vcopy", r("py"), C(SY), C(st))
        g.norm(SX, q)
        g.norm(SY, q)
        if child is None:
            g.mulmod_base(SX, SY, q)
        else:
            em("vcopy", C(SX), C(child.IN_X), C(q + 1))
            em("vcopy", C(SY), C(child.IN_Y), C(q + 1))
            em.goto(child.entry)
            em.label(child.ret)
            em("vcopy", C(child.OUT), C(SX), C(q + 2))
        em("vcopy", C(SX), r("px"), C(st))
        em("add", r("px"), r("px"), C(st))
        em("add", r("py"), r("py"), C(st))
        em("jeq", r("px"), C(g.A + L * st), done)
        em.goto(top)
        em.label(done)

    def child_procedure(self, g: _Level):
        em, lv = self.em, g.lv
        ol, st, u = lv.op_limbs, lv.stride, lv.u
        em.label(g.entry)
        sx, sy = em.fresh("csx"), em.fresh("csy")
        em("jeq", R(g.IN_X + ol), C(1), sx)
        em("jeq", R(g.IN_Y + ol), C(1), sy)
        em("vcopy", C(self.ZERO), C(g.A), C(lv.L * st))
        em("vcopy", C(self.ZERO), C(g.B), C(lv.L * st))
        em("vcopy", C(self.ZERO), C(g.ACC), C(lv.acc_limbs))
        for src, dst in ((g.IN_X, g.A), (g.IN_Y, g.B)):
            for i in range(lv.K):
                cnt = min(u, ol - i * u)
                em("vcopy", C(src + i * u), C(dst + i * st), C(cnt))
        self.level_body(g)
        # OUT = ACC_lo - ACC_hi
        r = g.r
        em.mov(g.s["c"], C(2))
        for i in range(ol):
            em("sub", r("ny"), C(MASK), R(g.ACC + ol + i))
            em("add", r("v"), R(g.ACC + i), r("ny"))
            em("add", r("v"), r("v"), r("c"))
            em("and", R(g.OUT + i), r("v"), C(MASK))
            g.carry_out()
        em.mov(g.OUT + ol, r("c"))
        em.zero(g.OUT + ol + 1)
        g.norm(g.OUT, ol)
        em.goto(g.ret)
        em.label(sx)
        em("vcopy", C(g.IN_Y), C(g.OUT), C(ol + 1))
        em.goto(sy + "_n")
        em.label(sy)
        em("vcopy", C(g.IN_X), C(g.OUT), C(ol + 1))
        em.label(sy + "_n")
        em.zero(g.OUT + ol + 1)
        g.neg(g.OUT, ol)
        g.norm(g.OUT, ol)
        em.goto(g.ret)

    def build(self):
        em, n = self.em, self.n
        g = self.levels[0]
        g.read_tape(g.A, 0, n)
        g.read_tape(g.B, n, n)
        self.level_body(g)
        write_limbs(em, g.ACC, S, 2 * n)
        em("halt")
        for child in self.levels[1:]:
            self.child_procedure(child)


def gen_ssf(n: int, cfg: MachineConfig, plan: Optional[SSFLevel] = None) -> Emitter:
    check_size(n, 4096)
    top = plan or ssf_plan(n, cfg)
    if top.op_bits != n:
        raise GenError(f"plan is for {top.op_bits}-bit operands, not {n}")
    if cfg.W < 96:
        raise GenError(f"SS-F needs registers of at least 96 bits (W = {cfg.W})")
    em = Emitter(f"ssf_{n}", tape="2n")
    gen = _Gen(top, em, n)
    gen.build()
    meta = {"algorithm": "ssf", "depth": top.depth, "registers": em.next_register}
    for i, lv in enumerate(top.chain()):
        meta.update(lv.as_dict(f"level{i}_"))
    em.meta.update(meta)
    return em
