"""Complex-FFT multiplication (SS-C) program generator.

Operands are cut into b-bit pieces that become the real parts of complex
fixed-point numbers.  Two forward transforms, a pointwise product and one
inverse transform give the acyclic convolution, which is rounded, checked
and carried into the 2n-bit product.

Number format.  A real value v is held as the unsigned register value
``v * 2**f + Z`` with ``Z = 2**(M-1)`` (offset binary), so every register
stays nonnegative and fits in M bits.  Twiddle factors are stored as
magnitudes ``(C, S) = (|cos|, |sin|) * 2**g`` of an angle in the first
quadrant plus a quadrant tag q; the rotation by ``(-i)**q`` is applied with a
four-way branch on q.

Transform.  Lengths K = 2^a 3^y 5^z.  The forward transform is mixed-radix
decimation in frequency, the inverse is decimation in time, so the digit
reversal of one cancels the other and no permutation pass is needed.  Every
sweep copies blocks of the big arrays into low registers with vcopy, works
there, and copies them back.

Twiddles are computed by the program itself: a first-octant table of
``exp(-2 pi i e / K)`` by repeated multiplication with one embedded root,
mirrored to a quarter table, then gathered into one contiguous table per
stage.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import mpmath

from ..isa import MachineConfig, ceil_log2
from .classic import check_size
from .emit import C, Emitter, GenError, R, normalize, write_limbs

_MAX_THREES = 3
_MAX_FIVES = 2


def fft_lengths(lo: int, hi: int) -> List[int]:
    """Transform lengths 2^a 3^y 5^z (a >= 3) in [lo, hi]."""
    out = []
    for y in range(_MAX_THREES + 1):
        for z in range(_MAX_FIVES + 1):
            v = 8 * 3 ** y * 5 ** z
            while v <= hi:
                if v >= lo:
                    out.append(v)
                v *= 2
    return sorted(out)


def radix_plan(K: int) -> Tuple[int, ...]:
    """Stage radices in sweep order, smallest first.

    The last sweep needs no twiddles and short sweeps get static ones, so
    the expensive odd butterflies go at the end.
    """
    out = []
    for r in (2, 3, 5):
        while K % r == 0:
            out.append(r)
            K //= r
    if K != 1:
        raise GenError("transform length must be 2^a 3^y 5^z")
    return tuple(out)


def fixed_cos_sin(num: int, den: int, bits: int) -> Tuple[int, int]:
    """round(cos(2 pi num/den) * 2**bits), round(sin(...) * 2**bits)."""
    with mpmath.workprec(bits + 64):
        x = 2 * mpmath.pi * num / den
        scale = mpmath.mpf(2) ** bits
        return int(mpmath.nint(mpmath.cos(x) * scale)), int(mpmath.nint(mpmath.sin(x) * scale))


@dataclass(frozen=True)
class SSCParams:
    n: int
    w: int
    W: int
    b: int           # bits per piece
    pieces: int      # pieces per operand
    K: int           # transform length
    radices: Tuple[int, ...]
    M: int           # data register bits (offset Z = 2**(M-1))
    f: int           # fraction bits of data
    g: int           # fraction bits of twiddles and constants
    G: int           # working precision of the twiddle recurrence
    acc_bits: int    # bound on products accumulated before a shift
    chunk: int       # complex points per staged slice

    @property
    def Z(self) -> int:
        return 1 << (self.M - 1)

    def as_dict(self) -> Dict[str, object]:
        d = asdict(self)
        d["radices"] = "x".join(map(str, self.radices))
        return d


def ssc_precision_need(b: int, pieces: int) -> Tuple[int, int]:
    """(f, g) needed at piece size b with ``pieces`` pieces per operand.

    Measured worst residuals follow ``2**(b + log2(pieces) - f - c)`` with
    c between 4.7 and 7, so ``f = b + log2(pieces)`` leaves the residual
    near 2**-4.7, well inside the 1/4 rejection threshold.  Twiddle error
    has the same shape scaled by 2**b, so g takes b more bits.
    """
    lg = math.log2(pieces)
    return math.ceil(b + lg), math.ceil(2 * b + lg + 4)


def cost_features(p: SSCParams) -> Dict[str, int]:
    """Work counts that the unit ledger is (nearly) linear in.

    Butterfly work is counted per radix; twiddle multiplies are split into
    those with a runtime quadrant branch (long sweeps) and static ones
    (short sweeps, where j = 0 needs none).  Sweeps run three times.
    """
    feats = {"points": p.K, "pieces": p.pieces, "k2": 0, "k3": 0, "k5": 0,
             "tw_dyn": 0, "tw_static": 0}
    L = p.K
    for r in p.radices:
        s = L // r
        feats[f"k{r}"] += 3 * p.K
        if s > 1:
            blocks = p.K // L
            if s >= p.chunk:
                feats["tw_dyn"] += 3 * blocks * s * (r - 1)
            else:
                feats["tw_static"] += 3 * blocks * (s - 1) * (r - 1)
        L = s
    return feats


# Unit-ledger cost per feature.  Butterfly and twiddle weights were measured by
# ablation (cost difference over count); the per-point and per-piece terms
# were then fitted on runs over n = 2^12..2^14 (worst error 0.93%).  Costs are
# in pinned words, so they carry over to every n.  Kernel weights include
# 8.7 per point for staging copies.
_COST_WEIGHTS = {"points": 413.9, "pieces": 114.5, "k2": 21.8, "k3": 60.7, "k5": 110.2,
                 "tw_dyn": 145.0, "tw_static": 147.0}


def estimate_cost(p: SSCParams) -> float:
    return sum(_COST_WEIGHTS[k] * v for k, v in cost_features(p).items())


def ssc_params(n: int, cfg: MachineConfig, b: Optional[int] = None, K: Optional[int] = None,
               data_words: int = 4, twiddle_words: int = 3) -> SSCParams:
    """Choose piece size and transform length for SS-C.

    Register widths are pinned to whole cost words (M = data_words*w - 2,
    g = twiddle_words*w - 2) so every instruction's charge is independent of
    n.  Among the (b, K) pairs these widths can carry with at least w + 8
    fraction bits, the one with the lowest estimated ledger wins.
    """
    w, W = cfg.w, cfg.W
    M = data_words * w - 2
    g = twiddle_words * w - 2
    G = W // 2 - 2
    acc_bits = M + g + 3
    if acc_bits > W - 1 or 2 * M + 2 > W - 1:
        raise GenError(f"register width {W} too small for {data_words}+{twiddle_words} words")

    def make(bb: int, KK: int) -> Optional[SSCParams]:
        N = -(-n // bb)
        if KK < max(8, 2 * N - 1):
            return None
        # product coefficients stay below N * (2**b - 1)**2 < 2**(M-1-f)
        f = M - 1 - math.ceil(2 * bb + math.log2(N))
        f_need, g_need = ssc_precision_need(bb, N)
        if f < max(f_need, w + 8) or g < g_need or G < g + ceil_log2(KK // 8) + 3:
            return None
        return SSCParams(n=n, w=w, W=W, b=bb, pieces=N, K=KK, radices=radix_plan(KK), M=M,
                         f=f, g=g, G=G, acc_bits=acc_bits, chunk=max(1, cfg.block // 4))

    if K is not None and K not in fft_lengths(K, K):
        raise GenError(f"transform length {K} is not 2^a 3^y 5^z with a >= 3")
    bs = [b] if b is not None else range(2, w + 1)
    best = None
    for bb in bs:
        N = -(-n // bb)
        lo = max(8, 2 * N - 1)
        Ks = [K] if K is not None else fft_lengths(lo, 2 * lo)
        for KK in Ks:
            p = make(bb, KK)
            if p is not None:
                est = estimate_cost(p)
                if best is None or est < best[0]:
                    best = (est, p)
    if best is None:
        raise GenError(f"no admissible SS-C parameters at n={n}"
                       + (f" with piece size {b}" if b is not None else ""))
    return best[1]


class _Gen:
    def __init__(self, p: SSCParams, em: Emitter):
        self.p = p
        self.em = em
        self.Z = p.Z
        self.top = 1 << p.M
        self.mask_shift = (1 << (p.acc_bits - p.g)) - 1
        rmax = max(p.radices)
        c = p.chunk
        self.s = em.scalars("pblk", "bend", "pj", "jend", "ptw", "ta", "fbase", "fret",
                            "cnt", "e", "q", "ep", "src", "dst", "t", "cg", "sg", "a", "a2",
                            "bb", "bad", "u", "qq", "rem", "h", "v", "v2", "ones")
        # accumulator, product temp, twiddle results and negation; the last
        # three double as radix-5 scratch (never live at the same time)
        self.acc = em.alloc(5)
        self.tmp, self.pre, self.pim, self.neg = self.acc + 1, self.acc + 2, self.acc + 3, self.acc + 4
        self.kernel_tmp = em.alloc(28)        # odd-radix butterfly temporaries
        self.ytmp = em.alloc(2 * (rmax - 1))
        self.u = em.alloc(4)                  # twiddle-table scratch
        self.pw = em.alloc(6)                 # pointwise scratch
        self.SD = em.alloc(2 * rmax * c)
        self.ST = em.alloc(4 * (rmax - 1) * c)
        K = p.K
        self.Q = em.alloc(3 * (K // 4))
        self.stages = []
        L = K
        tab = 0
        for r in p.radices:
            s = L // r
            self.stages.append((L, r, s, tab))
            if s > 1:
                tab += 4 * (r - 1) * s
            L = s
        self.TAB = em.alloc(tab)
        self.X = em.alloc(2 * K)
        self.Y = em.alloc(2 * K + 2)
        self._dft_consts: Dict[Tuple[int, int], Tuple[int, int]] = {}

    # -- small helpers ---------------------------------------------------
    def flat_chunk(self) -> int:
        """Points per slice in whole-array passes: a power of two dividing K."""
        c = self.p.chunk
        while self.p.K % c:
            c //= 2
        return c

    def r(self, name: str) -> str:
        return R(self.s[name])

    def mov(self, dst: str, src: str):
        self.em("or", dst, src, C(0))

    def off_add(self, d: str, a: str, b: str):
        self.em("add", d, a, b)
        self.em("sub", d, d, C(self.Z))

    def off_sub(self, d: str, a: str, b: str):
        assert d != b
        self.em("add", d, a, C(self.Z))
        self.em("sub", d, d, b)

    def off_neg(self, d: str, a: str):
        self.em("sub", d, C(self.top), a)

    def off_scale_down(self, d: str, a: str, j: int):
        """d = a / 2**j in offset form: (A + (2**j - 1) Z) >> j."""
        p = self.p
        self.em("add", d, a, C(((1 << j) - 1) * self.Z))
        self.em("rotr", d, d, C(j), C(p.M + j))
        self.em("and", d, d, C((1 << p.M) - 1))

    def shr_g(self, d: str, acc: str):
        p = self.p
        self.em("rotr", d, acc, C(p.g), C(p.acc_bits))
        self.em("and", d, d, C(self.mask_shift))

    def loop_until(self, reg: str, end: str, top: str):
        done = self.em.fresh("done")
        self.em("jeq", reg, end, done)
        self.em.goto(top)
        self.em.label(done)

    def dft_const(self, num: int, den: int) -> Tuple[int, int]:
        key = (num % den, den)
        if key not in self._dft_consts:
            self._dft_consts[key] = fixed_cos_sin(key[0], den, self.p.g)
        return self._dft_consts[key]

    # -- arithmetic blocks -------------------------------------------------
    def scaled(self, dst: str, terms: Sequence[Tuple[int, str]]) -> int:
        """dst = floor(sum(C_t X_t) / 2**g) for offset-Z inputs X_t.

        Returns the constant offset of the result, ``sum(C_t) * Z / 2**g``.
        """
        em = self.em
        acc, tmp = R(self.acc), R(self.tmp)
        em("mul", acc, terms[0][1], C(terms[0][0]))
        for c, x in terms[1:]:
            em("mul", tmp, x, C(c))
            em("add", acc, acc, tmp)
        self.shr_g(dst, acc)
        return sum(c for c, _ in terms) * (self.Z >> self.p.g)

    def twiddle(self, yre: str, yim: str, T: int, dre: str, dim: str, inverse: bool,
                q_static: Optional[int] = None):
        """(dre, dim) = y * w, w = table entry T (conjugated when inverse)."""
        em = self.em
        Cc, Ss, Ee = R(T), R(T + 1), R(T + 2)
        acc, tmp, pre, pim, ng = R(self.acc), R(self.tmp), R(self.pre), R(self.pim), R(self.neg)
        if not inverse:
            self.off_neg(ng, yre)
            plan = ((yre, yim, pre), (yim, ng, pim))
        else:
            self.off_neg(ng, yim)
            plan = ((yre, ng, pre), (yim, yre, pim))
        for a1, a2, out in plan:
            em("mul", acc, a1, Cc)
            em("mul", tmp, a2, Ss)
            em("add", acc, acc, tmp)
            em("add", acc, acc, Ee)
            self.shr_g(out, acc)
            em("sub", out, out, C(self.Z))
        # rotation by (-i)^q forward, i^q inverse
        rot = {0: ((pre, False), (pim, False)),
               2: ((pre, True), (pim, True))}
        if not inverse:
            rot[1] = ((pim, False), (pre, True))
            rot[3] = ((pim, True), (pre, False))
        else:
            rot[1] = ((pim, True), (pre, False))
            rot[3] = ((pim, False), (pre, True))

        def put(q):
            for (src, negate), d in zip(rot[q], (dre, dim)):
                if negate:
                    self.off_neg(d, src)
                else:
                    self.mov(d, src)

        if q_static is not None:
            put(q_static)
            return
        labels = [em.fresh(f"q{q}") for q in range(3)]
        end = em.fresh("qend")
        for q in range(3):
            em("jeq", R(T + 3), C(q), labels[q])
        put(3)
        em.goto(end)
        for q in range(3):
            em.label(labels[q])
            put(q)
            if q < 2:
                em.goto(end)
        em.label(end)

    def dft(self, r: int, ins: List[Tuple[str, str]], outs: List[Tuple[str, str]], inverse: bool):
        """outs[k] = sum_m ins[m] * exp(-+2 pi i m k / r).

        outs[k >= 1] may alias ins[k >= 1]; outs[0] may alias ins[0].
        """
        em = self.em
        if r == 2:
            t = (R(self.ytmp), R(self.ytmp + 1))
            d1 = outs[1] if outs[1] not in ins else t
            for c in range(2):
                self.off_sub(d1[c], ins[0][c], ins[1][c])
            for c in range(2):
                self.off_add(outs[0][c], ins[0][c], ins[1][c])
            if d1 is not outs[1]:
                for c in range(2):
                    self.mov(outs[1][c], d1[c])
            return
        if r == 3:
            self._dft3(ins, outs, inverse)
        else:
            self._dft5(ins, outs, inverse)

    def _emit_pair(self, outs, lo: int, hi: int, A, B, alpha: int, beta: int):
        """outs[lo] = A - iB, outs[hi] = A + iB with offsets A: alpha, B: beta.

        alpha = Z + beta, so the two differences need no correction.
        """
        em, Z = self.em, self.Z
        (are, aim), (bre, bim) = A, B
        fix = alpha + beta - Z
        em("add", outs[lo][0], are, bim)
        em("sub", outs[lo][0], outs[lo][0], C(fix))
        em("sub", outs[lo][1], aim, bre)
        em("sub", outs[hi][0], are, bim)
        em("add", outs[hi][1], aim, bre)
        em("sub", outs[hi][1], outs[hi][1], C(fix))

    def _dft3(self, ins, outs, inverse: bool):
        # y1,2 = x0 - S/2 -+ i (sqrt3/2) D,  S = x1 + x2, D = x1 - x2
        em, Z, M = self.em, self.Z, self.p.M
        t = self.kernel_tmp
        sin = self.dft_const(1, 3)[1]
        A, B = [None, None], [None, None]
        beta = 0
        for c in range(2):
            S, D, H = R(t + 5 * c), R(t + 5 * c + 1), R(t + 5 * c + 2)
            A[c], B[c] = R(t + 5 * c + 3), R(t + 5 * c + 4)
            em("add", S, ins[1][c], ins[2][c])                 # offset 2Z
            em("add", D, ins[1][c], C(Z))
            em("sub", D, D, ins[2][c])                         # offset Z
            em("rotr", H, S, C(1), C(M + 1))
            em("and", H, H, C((1 << M) - 1))                   # S/2, offset Z
            beta = self.scaled(B[c], [(sin, D)])
            em("add", A[c], ins[0][c], C(Z + beta))
            em("sub", A[c], A[c], H)                           # offset Z + beta
        lo, hi = (1, 2) if not inverse else (2, 1)
        self._emit_pair(outs, lo, hi, A, B, Z + beta, beta)
        for c in range(2):
            S = R(t + 5 * c)
            em("add", outs[0][c], ins[0][c], S)
            em("sub", outs[0][c], outs[0][c], C(2 * Z))

    def _dft5(self, ins, outs, inverse: bool):
        # A_{1,2} = x0 - (S1+S2)/4 +- ((c1-c2)/2)(S1-S2)
        # B_1 = s1 D1 + s2 D2,  B_2 = s2 D1 - s1 D2
        em, Z, M = self.em, self.Z, self.p.M
        t = self.kernel_tmp
        c1, s1 = self.dft_const(1, 5)
        c2, s2 = self.dft_const(2, 5)
        cm = round((c1 - c2) / 2)
        A1, A2, B1, B2 = [None, None], [None, None], [None, None], [None, None]
        beta = 0
        for c in range(2):
            regs = [R(t + 14 * c + i) for i in range(14)]
            S1, S2, D1, D2, T1, Q, T2, m, base, nD2 = regs[:10]
            A1[c], A2[c], B1[c], B2[c] = regs[10:]
            em("add", S1, ins[1][c], ins[4][c])                # 2Z
            em("add", S2, ins[2][c], ins[3][c])                # 2Z
            em("add", D1, ins[1][c], C(Z))
            em("sub", D1, D1, ins[4][c])                       # Z
            em("add", D2, ins[2][c], C(Z))
            em("sub", D2, D2, ins[3][c])                       # Z
            em("add", T1, S1, S2)                              # 4Z
            em("rotr", Q, T1, C(2), C(M + 2))
            em("and", Q, Q, C((1 << M) - 1))                   # T1/4, Z
            em("add", T2, S1, C(Z))
            em("sub", T2, T2, S2)                              # Z
            kappa = self.scaled(m, [(cm, T2)])
            em("sub", nD2, C(2 * Z), D2)                       # -d2, Z
            beta = self.scaled(B1[c], [(s1, D1), (s2, D2)])
            self.scaled(B2[c], [(s2, D1), (s1, nD2)])
            gamma = Z + beta + kappa
            em("add", base, ins[0][c], C(gamma))
            em("sub", base, base, Q)                           # gamma
            em("sub", A2[c], base, m)                          # Z + beta
            em("add", A1[c], base, m)
            em("sub", A1[c], A1[c], C(2 * kappa))              # Z + beta
        for k, A, B in ((1, A1, B1), (2, A2, B2)):
            lo, hi = (k, 5 - k) if not inverse else (5 - k, k)
            self._emit_pair(outs, lo, hi, A, B, Z + beta, beta)
        for c in range(2):
            T1 = R(t + 14 * c + 4)
            em("add", outs[0][c], ins[0][c], T1)
            em("sub", outs[0][c], outs[0][c], C(4 * Z))

    def point(self, r: int, xs: List[int], tws: List[Optional[Tuple[int, Optional[int]]]],
              inverse: bool):
        """One radix-r butterfly on staged points xs (register of re; im follows)."""
        cpx = [(R(x), R(x + 1)) for x in xs]
        ytmp = [(R(self.ytmp + 2 * i), R(self.ytmp + 2 * i + 1)) for i in range(r - 1)]
        if not inverse:
            outs = [cpx[0]] + [ytmp[k - 1] if tws[k - 1] else cpx[k] for k in range(1, r)]
            self.dft(r, cpx, outs, inverse=False)
            for k in range(1, r):
                if tws[k - 1]:
                    T, qs = tws[k - 1]
                    self.twiddle(*ytmp[k - 1], T, *cpx[k], inverse=False, q_static=qs)
        else:
            ins = [cpx[0]]
            for k in range(1, r):
                if tws[k - 1]:
                    T, qs = tws[k - 1]
                    self.twiddle(*cpx[k], T, *ytmp[k - 1], inverse=True, q_static=qs)
                    ins.append(ytmp[k - 1])
                else:
                    ins.append(cpx[k])
            self.dft(r, ins, cpx, inverse=True)

    # -- sweeps ----------------------------------------------------------
    def stage(self, L: int, r: int, s: int, tab: int, inverse: bool):
        em, p = self.em, self.p
        c_max = p.chunk
        K = p.K
        has_tw = s > 1
        base = self.r("fbase")
        if s >= c_max:
            c = c_max
            while s % c:
                c //= 2
            em("add", self.r("bend"), base, C(2 * K))
            self.mov(self.r("pblk"), base)
            blk = em.fresh("blk")
            em.label(blk)
            em("add", self.r("jend"), self.r("pblk"), C(2 * s))
            self.mov(self.r("pj"), self.r("pblk"))
            if has_tw:
                self.mov(self.r("ptw"), C(self.TAB + tab))
            jl = em.fresh("jl")
            em.label(jl)
            for m in range(r):
                em("add", self.r("ta"), self.r("pj"), C(2 * m * s))
                em("vcopy", self.r("ta"), C(self.SD + 2 * m * c), C(2 * c))
            if has_tw:
                for k in range(1, r):
                    em("add", self.r("ta"), self.r("ptw"), C(4 * (k - 1) * s))
                    em("vcopy", self.r("ta"), C(self.ST + 4 * (k - 1) * c), C(4 * c))
            for i in range(c):
                xs = [self.SD + 2 * m * c + 2 * i for m in range(r)]
                tws = [(self.ST + 4 * (k - 1) * c + 4 * i, None) if has_tw else None
                       for k in range(1, r)]
                self.point(r, xs, tws, inverse)
            for m in range(r):
                em("add", self.r("ta"), self.r("pj"), C(2 * m * s))
                em("vcopy", C(self.SD + 2 * m * c), self.r("ta"), C(2 * c))
            em("add", self.r("pj"), self.r("pj"), C(2 * c))
            if has_tw:
                em("add", self.r("ptw"), self.r("ptw"), C(4 * c))
            self.loop_until(self.r("pj"), self.r("jend"), jl)
            em("add", self.r("pblk"), self.r("pblk"), C(2 * L))
            self.loop_until(self.r("pblk"), self.r("bend"), blk)
            return
        # short stages: whole blocks per chunk, twiddles staged once
        blocks = K // L
        nb = 1
        for d in range(1, blocks + 1):
            if blocks % d == 0 and d * L <= r * c_max:
                nb = d
        if has_tw:
            for k in range(1, r):
                em("vcopy", C(self.TAB + tab + 4 * (k - 1) * s),
                   C(self.ST + 4 * (k - 1) * c_max), C(4 * s))
        em("add", self.r("bend"), base, C(2 * K))
        self.mov(self.r("pblk"), base)
        top = em.fresh("chunk")
        em.label(top)
        em("vcopy", self.r("pblk"), C(self.SD), C(2 * nb * L))
        for bi in range(nb):
            for j in range(s):
                xs = [self.SD + 2 * (bi * L + j + m * s) for m in range(r)]
                tws = []
                for k in range(1, r):
                    if not has_tw or j == 0:
                        tws.append(None)
                    else:
                        tws.append((self.ST + 4 * (k - 1) * c_max + 4 * j, (4 * j * k) // L))
                self.point(r, xs, tws, inverse)
        em("vcopy", C(self.SD), self.r("pblk"), C(2 * nb * L))
        em("add", self.r("pblk"), self.r("pblk"), C(2 * nb * L))
        self.loop_until(self.r("pblk"), self.r("bend"), top)

    # -- program parts ---------------------------------------------------
    def twiddle_tables(self):
        em, p = self.em, self.p
        K, g, G = p.K, p.g, p.G
        c1, s1 = fixed_cos_sin(1, K, G)
        U = self.u
        r = self.r
        em.mov(self.s["cg"], C(1 << G))
        em.mov(self.s["sg"], C(0))
        em.mov(self.s["dst"], C(self.Q))
        em.mov(self.s["cnt"], C(0))
        top = em.fresh("oct")
        em.label(top)
        sh = G - g
        em("add", r("t"), r("cg"), C(1 << (sh - 1)))
        em("div", R(U), r("t"), C(1 << sh))
        em("add", r("t"), r("sg"), C(1 << (sh - 1)))
        em("div", R(U + 1), r("t"), C(1 << sh))
        em("sub", r("t"), C(1 << (g + 1)), R(U))
        em("sub", r("t"), r("t"), R(U + 1))
        em("mul", R(U + 2), r("t"), C(self.Z))
        em("add", R(U + 2), R(U + 2), C(1 << (g - 1)))
        em("vcopy", C(U), r("dst"), C(3))
        em("add", r("dst"), r("dst"), C(3))
        em("mul", r("a"), r("cg"), C(c1))
        em("mul", r("bb"), r("sg"), C(s1))
        em("add", r("a"), r("a"), C(1 << (G - 1)))
        em("sub", r("a"), r("a"), r("bb"))
        em("div", r("a2"), r("a"), C(1 << G))
        em("mul", r("a"), r("sg"), C(c1))
        em("mul", r("bb"), r("cg"), C(s1))
        em("add", r("a"), r("a"), r("bb"))
        em("add", r("a"), r("a"), C(1 << (G - 1)))
        em("div", r("sg"), r("a"), C(1 << G))
        self.mov(r("cg"), r("a2"))
        em("add", r("cnt"), r("cnt"), C(1))
        self.loop_until(r("cnt"), C(K // 8 + 1), top)
        # second octant by symmetry: entry e <- swap(entry K/4 - e)
        if K // 8 > 1:
            em.mov(self.s["src"], C(self.Q + 3 * (K // 8 - 1)))
            top = em.fresh("mir")
            em.label(top)
            em("vcopy", r("src"), C(U + 1), C(3))
            self.mov(R(U), R(U + 2))
            self.mov(R(U + 2), R(U + 3))
            em("vcopy", C(U), r("dst"), C(3))
            em("add", r("dst"), r("dst"), C(3))
            em("sub", r("src"), r("src"), C(3))
            self.loop_until(r("dst"), C(self.Q + 3 * (K // 4)), top)
        # per-stage tables: entry j of slice k is exp(-2 pi i jk/L)
        for L, rr, s, tab in self.stages:
            if s <= 1:
                continue
            for k in range(1, rr):
                em.mov(self.s["e"], C(0))
                em.mov(self.s["dst"], C(self.TAB + tab + 4 * (k - 1) * s))
                top = em.fresh("gather")
                em.label(top)
                em("div", r("q"), r("e"), C(K // 4))
                em("mul", r("t"), r("q"), C(K // 4))
                em("sub", r("ep"), r("e"), r("t"))
                em("mul", r("t"), r("ep"), C(3))
                em("add", r("src"), r("t"), C(self.Q))
                em("vcopy", r("src"), r("dst"), C(3))
                em("add", r("t"), r("dst"), C(3))
                em("vcopy", C(self.s["q"]), r("t"), C(1))
                em("add", r("dst"), r("dst"), C(4))
                em("add", r("e"), r("e"), C(k * K // L))
                self.loop_until(r("dst"), C(self.TAB + tab + 4 * (k - 1) * s + 4 * s), top)

    def read_operand(self, tape_offset: int, base: int):
        """Fill ``base`` with the offset-form complex pieces of one operand."""
        em, p = self.em, self.p
        r = self.r
        K, b, n, N = p.K, p.b, p.n, p.pieces
        # all points = complex zero, by doubling copies
        em.mov(self.s["t"], C(self.Z))
        em("vcopy", C(self.s["t"]), C(base), C(1))
        em("vcopy", C(self.s["t"]), C(base + 1), C(1))
        filled = 2
        while filled < 2 * K:
            step = min(filled, 2 * K - filled)
            em("vcopy", C(base), C(base + filled), C(step))
            filled += step
        top_bits = n - (N - 1) * b
        em.mov(self.s["a"], C(tape_offset + n - 1))      # stop position
        em.mov(self.s["dst"], C(base))

        def piece(bits):
            em("sub", r("a2"), r("a"), C(bits - 1))
            em("in", r("v"), r("a2"), r("a"))
            em("mul", r("v"), r("v"), C(1 << p.f))
            em("add", r("v"), r("v"), C(self.Z))
            em("vcopy", C(self.s["v"]), r("dst"), C(1))

        if N > 1:
            top = em.fresh("rd")
            em.label(top)
            piece(b)
            em("sub", r("a"), r("a"), C(b))
            em("add", r("dst"), r("dst"), C(2))
            self.loop_until(r("dst"), C(base + 2 * (N - 1)), top)
        piece(top_bits)

    def pointwise(self):
        em, p = self.em, self.p
        K, M, f = p.K, p.M, p.f
        c = self.flat_chunk()
        r = self.r
        X2, Y2 = self.SD, self.SD + 2 * c
        div = K << f
        half = div >> 1
        k_re = ((1 << (2 * M + 1)) + half) // div - self.Z
        k_im = ((3 << (2 * M - 1)) + half) // div - self.Z
        d, acc, t, sm, ore, oim = (R(self.pw + i) for i in range(6))
        em.mov(self.s["pblk"], C(self.X))
        em.mov(self.s["pj"], C(self.Y))
        top = em.fresh("pw")
        em.label(top)
        em("vcopy", r("pblk"), C(X2), C(2 * c))
        em("vcopy", r("pj"), C(Y2), C(2 * c))
        for i in range(c):
            Are, Aim = R(X2 + 2 * i), R(X2 + 2 * i + 1)
            Bre, Bim = R(Y2 + 2 * i), R(Y2 + 2 * i + 1)
            em("add", d, Aim, Bim)
            em("add", d, d, C(1 << (M + 1)))
            em("sub", d, d, Are)
            em("sub", d, d, Bre)
            em("mul", acc, d, C(self.Z))
            em("mul", t, Are, Bre)
            em("add", acc, acc, t)
            em("add", acc, acc, C((1 << (2 * M)) + half))
            em("mul", t, Aim, Bim)
            em("sub", acc, acc, t)
            em("div", ore, acc, C(div))
            em("sub", ore, ore, C(k_re))
            em("add", sm, Are, Bim)
            em("add", sm, sm, Aim)
            em("add", sm, sm, Bre)
            em("mul", sm, sm, C(self.Z))
            em("mul", acc, Are, Bim)
            em("mul", t, Aim, Bre)
            em("add", acc, acc, t)
            em("add", acc, acc, C((1 << (2 * M + 1)) + half))
            em("sub", acc, acc, sm)
            em("div", oim, acc, C(div))
            em("sub", Aim, oim, C(k_im))
            self.mov(Are, ore)
        em("vcopy", C(X2), r("pblk"), C(2 * c))
        em("add", r("pblk"), r("pblk"), C(2 * c))
        em("add", r("pj"), r("pj"), C(2 * c))
        self.loop_until(r("pblk"), C(self.X + 2 * K), top)

    def round_and_check(self):
        """Y[i] <- nearest integer to Re X[i]; ``bad`` records any residual >= 1/4."""
        em, p = self.em, self.p
        K, M, f = p.K, p.M, p.f
        c = self.flat_chunk()
        r = self.r
        OUT = self.SD + 2 * c
        em.mov(self.s["bad"], C(0))
        em.mov(self.s["pblk"], C(self.X))
        em.mov(self.s["pj"], C(self.Y))
        top = em.fresh("rnd")
        em.label(top)
        em("vcopy", r("pblk"), C(self.SD), C(2 * c))
        for i in range(c):
            V = R(self.SD + 2 * i)
            em("add", r("u"), V, C((1 << (f - 1)) + self.Z))
            em("div", r("qq"), r("u"), C(1 << f))
            em("and", r("rem"), r("u"), C((1 << f) - 1))
            em("div", r("h"), r("qq"), C(1 << (M - f)))
            em("xor", r("h"), r("h"), C(1))
            em("or", r("bad"), r("bad"), r("h"))
            em("add", r("v"), r("rem"), C((1 << (f - 2)) - 1))
            em("div", r("v"), r("v"), C(1 << (f - 1)))
            em("add", r("v2"), r("rem"), C(1 << (f - 2)))
            em("div", r("v2"), r("v2"), C(1 << (f - 1)))
            em("add", r("v"), r("v"), r("v2"))
            em("xor", r("v"), r("v"), C(2))
            em("or", r("bad"), r("bad"), r("v"))
            em("and", R(OUT + i), r("qq"), C((1 << (M - f)) - 1))
        em("vcopy", C(OUT), r("pj"), C(c))
        em("add", r("pblk"), r("pblk"), C(2 * c))
        em("add", r("pj"), r("pj"), C(c))
        self.loop_until(r("pblk"), C(self.X + 2 * K), top)

    def forward_procedure(self):
        em = self.em
        em.label("fwd")
        for L, rr, s, tab in self.stages:
            self.stage(L, rr, s, tab, inverse=False)
        em("jeq", self.r("fret"), C(1), "fwd_ret1")
        em.goto("fwd_ret2")

    def build(self):
        em, p = self.em, self.p
        n = p.n
        self.twiddle_tables()
        self.read_operand(0, self.X)
        self.read_operand(n, self.Y)
        for tag, base in ((1, self.X), (2, self.Y)):
            em.mov(self.s["fbase"], C(base))
            em.mov(self.s["fret"], C(tag))
            em.goto("fwd")
            em.label(f"fwd_ret{tag}")
        self.pointwise()
        em.mov(self.s["fbase"], C(self.X))
        for L, rr, s, tab in reversed(self.stages):
            self.stage(L, rr, s, tab, inverse=True)
        self.round_and_check()
        ok = em.fresh("ok")
        em("jeq", self.r("bad"), C(0), ok)
        # precision failure: all-ones sentinel
        em.mov(self.s["ones"], C(0xFFFF))
        em.mov(self.s["cnt"], C(0))
        top = em.fresh("sent")
        em.label(top)
        em("out", self.r("ones"), C(16))
        em("add", self.r("cnt"), self.r("cnt"), C(1))
        self.loop_until(self.r("cnt"), C(2 * n // 16), top)
        em("halt")
        em.label(ok)
        limbs = -(-2 * n // p.b)
        for extra in range(p.K, limbs):
            em.zero(self.Y + extra)
        normalize(em, self.Y, max(p.K, limbs), p.b)
        write_limbs(em, self.Y, p.b, 2 * n)
        em("halt")
        self.forward_procedure()


def max_residual(state, meta) -> float:
    """Largest distance to the nearest integer among the product coefficients.

    Reads the real parts left in the transform array of a finished run of a
    program generated with metadata ``meta``; the rejection threshold is 1/4.
    """
    x_base, f, M = int(meta["x_base"]), int(meta["f"]), int(meta["M"])
    Z = 1 << (M - 1)
    worst = 0.0
    for i in range(2 * int(meta["pieces"]) - 1):
        v = state.reg(x_base + 2 * i) - Z
        q, r = divmod(v, 1 << f)
        dist = min(r, (1 << f) - r) / (1 << f)
        worst = max(worst, dist)
    return worst


def gen_ssc(n: int, cfg: MachineConfig, params: Optional[SSCParams] = None) -> Emitter:
    check_size(n, 4096)
    p = params or ssc_params(n, cfg)
    em = Emitter(f"ssc_{n}", tape="2n")
    gen = _Gen(p, em)
    gen.build()
    em.meta.update(algorithm="ssc", **p.as_dict())
    em.meta.update(x_base=gen.X, registers=em.next_register, precision_sentinel="all-ones")
    return em
