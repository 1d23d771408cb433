"""numba execution engine for log-RAM programs.

Registers are held as ``NL`` little-endian uint64 limbs, so any value below
``2**(64*NL)`` runs natively.  Whenever an instruction would trap, touch a
register outside the dense file, or otherwise leave the fast path, the engine
stops *before* executing it and the reference interpreter in :mod:`logram.vm`
continues from that exact state.  Ledgers are identical between engines.
"""

from __future__ import annotations

import numpy as np
from numba import njit

from .isa import (
    BinOp, Const, CyclicShift, Direct, Halt, Input, JumpEq, Not, Output, VCopy,
    INSTRUCTION_CLASSES,
)

NL = 4
CAP_BITS = 64 * NL
_MASK64 = (1 << 64) - 1

U64 = np.uint64
_ZERO = U64(0)
_ONE = U64(1)
_ALL = U64(0xFFFFFFFFFFFFFFFF)
_M32 = U64(0xFFFFFFFF)

OP_HALT, OP_OR, OP_AND, OP_XOR, OP_ADD, OP_SUB, OP_MUL, OP_DIV = range(8)
OP_NOT, OP_ROTL, OP_ROTR, OP_IN, OP_OUT, OP_JEQ, OP_VCOPY = range(8, 15)

_BINOP_CODES = {"or": OP_OR, "and": OP_AND, "xor": OP_XOR, "add": OP_ADD,
                "sub": OP_SUB, "mul": OP_MUL, "div": OP_DIV}
_CLASS_INDEX = {c: i for i, c in enumerate(INSTRUCTION_CLASSES)}

# ledger slots: 7 class totals, access, total, instruction count
_L_ACCESS, _L_TOTAL, _L_COUNT = 7, 8, 9

_MAX_DENSE = 1 << 23


@njit(cache=True, inline="always")
def _bl64(x):
    if x == _ZERO:
        return 0
    n = 1
    if x >> U64(32):
        n += 32
        x >>= U64(32)
    if x >> U64(16):
        n += 16
        x >>= U64(16)
    if x >> U64(8):
        n += 8
        x >>= U64(8)
    if x >> U64(4):
        n += 4
        x >>= U64(4)
    if x >> U64(2):
        n += 2
        x >>= U64(2)
    if x >> U64(1):
        n += 1
    return n


@njit(cache=True)
def _bl(x):
    for i in range(NL - 1, -1, -1):
        if x[i] != _ZERO:
            return 64 * i + _bl64(x[i])
    return 0


@njit(cache=True, inline="always")
def _is_zero(x):
    for i in range(NL):
        if x[i] != _ZERO:
            return False
    return True


@njit(cache=True, inline="always")
def _small(x, limit):
    """x as int64 if below ``limit`` (< 2**62), else -1."""
    for i in range(1, NL):
        if x[i] != _ZERO:
            return -1
    if x[0] >= U64(limit):
        return -1
    return np.int64(x[0])


@njit(cache=True)
def _cmp(x, y):
    for i in range(NL - 1, -1, -1):
        if x[i] != y[i]:
            return -1 if x[i] < y[i] else 1
    return 0


@njit(cache=True)
def _add(x, y, out):
    """out = x + y; returns True on overflow past NL limbs."""
    carry = _ZERO
    for i in range(NL):
        s = x[i] + y[i]
        c1 = _ONE if s < x[i] else _ZERO
        s2 = s + carry
        c2 = _ONE if s2 < s else _ZERO
        out[i] = s2
        carry = c1 | c2
    return carry != _ZERO


@njit(cache=True)
def _sub(x, y, out):
    """out = x - y, assuming x >= y."""
    borrow = _ZERO
    for i in range(NL):
        d = x[i] - y[i]
        b1 = _ONE if x[i] < y[i] else _ZERO
        d2 = d - borrow
        b2 = _ONE if d < borrow else _ZERO
        out[i] = d2
        borrow = b1 | b2


@njit(cache=True, inline="always")
def _mul64(a, b):
    a0 = a & _M32
    a1 = a >> U64(32)
    b0 = b & _M32
    b1 = b >> U64(32)
    p00 = a0 * b0
    p01 = a0 * b1
    p10 = a1 * b0
    p11 = a1 * b1
    mid = (p00 >> U64(32)) + (p01 & _M32) + (p10 & _M32)
    lo = (p00 & _M32) | (mid << U64(32))
    hi = p11 + (p01 >> U64(32)) + (p10 >> U64(32)) + (mid >> U64(32))
    return hi, lo


@njit(cache=True)
def _mul(x, y, out, wide):
    """out = x * y; returns True if the product needs more than NL limbs."""
    for i in range(2 * NL):
        wide[i] = _ZERO
    for i in range(NL):
        if x[i] == _ZERO:
            continue
        carry = _ZERO
        for j in range(NL):
            hi, lo = _mul64(x[i], y[j])
            t = wide[i + j] + lo
            c1 = _ONE if t < lo else _ZERO
            t2 = t + carry
            c2 = _ONE if t2 < t else _ZERO
            wide[i + j] = t2
            carry = hi + c1 + c2
        k = i + NL
        while carry != _ZERO:
            t = wide[k] + carry
            carry = _ONE if t < carry else _ZERO
            wide[k] = t
            k += 1
    for i in range(NL):
        out[i] = wide[i]
    for i in range(NL, 2 * NL):
        if wide[i] != _ZERO:
            return True
    return False


@njit(cache=True)
def _shr(x, s, out):
    q = s // 64
    r = s % 64
    for i in range(NL):
        src = i + q
        v = _ZERO
        if src < NL:
            v = x[src] >> U64(r)
            if r != 0 and src + 1 < NL:
                v |= x[src + 1] << U64(64 - r)
        out[i] = v


@njit(cache=True)
def _shl(x, s, out):
    q = s // 64
    r = s % 64
    for i in range(NL - 1, -1, -1):
        src = i - q
        v = _ZERO
        if src >= 0:
            v = x[src] << U64(r)
            if r != 0 and src - 1 >= 0:
                v |= x[src - 1] >> U64(64 - r)
        out[i] = v


@njit(cache=True)
def _mask(bits, out):
    for i in range(NL):
        lo = 64 * i
        if bits >= lo + 64:
            out[i] = _ALL
        elif bits <= lo:
            out[i] = _ZERO
        else:
            out[i] = (_ONE << U64(bits - lo)) - _ONE


@njit(cache=True)
def _div(x, y, out, rem, tmp):
    """out = floor(x / y) for y != 0."""
    nb = _bl(y)
    if nb <= 32:
        d = y[0]
        r = _ZERO
        for i in range(NL - 1, -1, -1):
            hi = (r << U64(32)) | (x[i] >> U64(32))
            qh = hi // d
            r = hi - qh * d
            lo = (r << U64(32)) | (x[i] & _M32)
            ql = lo // d
            r = lo - ql * d
            out[i] = (qh << U64(32)) | ql
        return
    # power of two
    pw = True
    for i in range(NL):
        if y[i] != _ZERO and (y[i] & (y[i] - _ONE)) != _ZERO:
            pw = False
    if pw:
        _shr(x, nb - 1, out)
        return
    for i in range(NL):
        out[i] = _ZERO
        rem[i] = _ZERO
    for b in range(_bl(x) - 1, -1, -1):
        _shl(rem, 1, tmp)
        tmp[0] |= (x[b // 64] >> U64(b % 64)) & _ONE
        if _cmp(tmp, y) >= 0:
            _sub(tmp, y, rem)
            out[b // 64] |= _ONE << U64(b % 64)
        else:
            for i in range(NL):
                rem[i] = tmp[i]


@njit(cache=True, inline="always")
def _clog2_small(v):
    # ceil(log2 v) for a nonnegative int64; 0 for v <= 1
    if v <= 1:
        return 0
    return _bl64(U64(v - 1))


@njit(cache=True)
def _clog2(x, tmp):
    # ceil(log2 x) for a multi-limb value; 0 for x <= 1
    if _bl(x) <= 1:
        return 0
    for i in range(NL):
        tmp[i] = x[i]
    i = 0
    while tmp[i] == _ZERO:
        tmp[i] = _ALL
        i += 1
    tmp[i] -= _ONE
    return _bl(tmp)


@njit(cache=True, inline="always")
def _access(i):
    b = _bl64(U64(i)) - 1
    return b if b > 1 else 1


@njit(cache=True)
def _run(code, vals, regs, tape, out, out_len, ledger, pc, W, w, lam, unit, max_steps):
    """Returns (status, pc, out_len); status 1 = halted, 0 = handed back."""
    n_ins = code.shape[0]
    R = regs.shape[0]
    tape_len = tape.shape[0]
    out_cap = out.shape[0]
    touched = np.empty(8, dtype=np.int64)
    opv = np.zeros((3, NL), dtype=np.uint64)
    res = np.zeros(NL, dtype=np.uint64)
    wmask = np.zeros(NL, dtype=np.uint64)
    lmask = np.zeros(NL, dtype=np.uint64)
    t1 = np.zeros(NL, dtype=np.uint64)
    t2 = np.zeros(NL, dtype=np.uint64)
    t3 = np.zeros(NL, dtype=np.uint64)
    wide = np.zeros(2 * NL, dtype=np.uint64)
    _mask(W, wmask)
    tmp = np.empty((0, NL), dtype=np.uint64)
    while True:
        if pc >= n_ins:
            return 1, pc, out_len
        if ledger[_L_COUNT] >= max_steps:
            return 0, pc, out_len
        op = code[pc, 0]
        if op == OP_HALT:
            ledger[_L_COUNT] += 1
            return 1, pc, out_len
        nt = 0
        bail = False
        for k in range(3):
            kind = code[pc, 2 + k]
            if kind < 0:
                continue
            if kind == 0:
                for i in range(NL):
                    opv[k, i] = vals[pc, k, i]
                continue
            idx = np.int64(vals[pc, k, 0])
            touched[nt] = idx
            nt += 1
            if kind == 2:
                j = _small(regs[idx], R)
                if j < 0:
                    bail = True
                    break
                idx = j
                touched[nt] = idx
                nt += 1
            for i in range(NL):
                opv[k, i] = regs[idx, i]
        if bail:
            return 0, pc, out_len

        klass = -1
        lp = 0
        lpp = 0
        vcount = 0
        vc_cost = 0
        vcopy = False
        dst = code[pc, 1]
        write = False
        next_pc = pc + 1
        a = opv[0]
        b = opv[1]

        if op >= OP_OR and op <= OP_DIV:
            b1 = _bl(a)
            b2 = _bl(b)
            lp = max(max(b1, b2), 1)
            if op <= OP_XOR:
                for i in range(NL):
                    if op == OP_OR:
                        res[i] = a[i] | b[i]
                    elif op == OP_AND:
                        res[i] = a[i] & b[i]
                    else:
                        res[i] = a[i] ^ b[i]
                klass = 0
            elif op == OP_ADD:
                if _add(a, b, res):
                    return 0, pc, out_len
                klass = 1
            elif op == OP_SUB:
                if _cmp(a, b) < 0:
                    return 0, pc, out_len
                _sub(a, b, res)
                klass = 1
            elif op == OP_MUL:
                if b1 + b2 > CAP_BITS + 1:
                    return 0, pc, out_len
                if _mul(a, b, res, wide):
                    return 0, pc, out_len
                klass = 2
            else:
                if b2 == 0:
                    return 0, pc, out_len
                _div(a, b, res, t1, t2)
                klass = 2
            write = True
        elif op == OP_NOT:
            if W > CAP_BITS:
                return 0, pc, out_len
            lp = max(_bl(a), 1)
            for i in range(NL):
                res[i] = a[i] ^ wmask[i]
            klass = 0
            write = True
        elif op == OP_ROTL or op == OP_ROTR:
            # operand 0 is the source register, 1 the amount, 2 the length
            length = _small(opv[2], 1 << 40)
            amount = _small(b, 1 << 62)
            if length <= 0 or length > W or length > CAP_BITS or amount < 0:
                return 0, pc, out_len
            lp = max(_bl(a), 1)
            lpp = max(_clog2_small(amount), _clog2_small(length))
            r = amount % length
            _mask(length, lmask)
            if r == 0:
                for i in range(NL):
                    res[i] = a[i]
            else:
                if op == OP_ROTR:
                    r = length - r
                for i in range(NL):
                    t1[i] = a[i] & lmask[i]
                _shl(t1, r, t2)
                _shr(t1, length - r, t3)
                for i in range(NL):
                    res[i] = (a[i] & ~lmask[i]) | ((t2[i] | t3[i]) & lmask[i])
            klass = 3
            write = True
        elif op == OP_IN:
            start = _small(a, 1 << 62)
            stop = _small(b, 1 << 62)
            if start < 0 or stop < 0 or start > stop or stop >= tape_len:
                return 0, pc, out_len
            span = stop - start + 1
            if span > W or span > CAP_BITS:
                return 0, pc, out_len
            lpp = _clog2_small(span)
            for i in range(NL):
                res[i] = _ZERO
            for p in range(start, stop + 1):
                bitpos = stop - p
                if tape[p] != 0:
                    res[bitpos // 64] |= _ONE << U64(bitpos % 64)
            klass = 4
            write = True
        elif op == OP_OUT:
            length = _small(b, 1 << 40)
            if length < 0 or length > W or out_len + length > out_cap:
                return 0, pc, out_len
            lp = max(_bl(a), 1)
            lpp = _clog2_small(length)
            for i in range(length - 1, -1, -1):
                bit = 0
                if i < CAP_BITS:
                    bit = np.int64((a[i // 64] >> U64(i % 64)) & _ONE)
                out[out_len] = bit
                out_len += 1
            klass = 4
        elif op == OP_JEQ:
            if _cmp(a, b) == 0:
                next_pc = code[pc, 5]
            klass = 5
        else:
            # vcopy
            src = _small(a, R)
            dstart = _small(b, R)
            count = _small(opv[2], R + 1)
            if src < 0 or dstart < 0 or count < 0 or src + count > R or dstart + count > R:
                return 0, pc, out_len
            if count > 0:
                if tmp.shape[0] < count:
                    tmp = np.empty((count, NL), dtype=np.uint64)
                for i in range(count):
                    for j in range(NL):
                        tmp[i, j] = regs[src + i, j]
                for i in range(count):
                    for j in range(NL):
                        regs[dstart + i, j] = tmp[i, j]
            vcopy = True
            vcount = count
            klass = 6
            nt = 0
            ba = _bl64(U64(src))
            bb = _bl64(U64(dstart))
            vc_cost = max(max(ba if ba > 0 else 1, bb if bb > 0 else 1), count)

        if write:
            if _bl(res) > W:
                return 0, pc, out_len
            for i in range(NL):
                regs[dst, i] = res[i]
            touched[nt] = dst
            nt += 1

        ledger[_L_COUNT] += 1
        if unit:
            if vcopy:
                cost = vcount
            elif klass == 5:
                cost = 1
            else:
                if lpp == 0:
                    span = 0
                elif lpp > 62:
                    span = W
                else:
                    span = 1 << lpp
                if span > W:
                    span = W
                ell = lp if lp > span else span
                k = (ell + w - 1) // w
                if k < 1:
                    k = 1
                cost = k * k if klass == 2 else k
            ledger[klass] += cost
            ledger[_L_TOTAL] += cost
        elif vcopy:
            ledger[klass] += vc_cost
            ledger[_L_TOTAL] += vc_cost
        else:
            opc = 1 if klass == 0 else lam
            acc = 0
            for i in range(nt):
                dup = False
                for j in range(i):
                    if touched[j] == touched[i]:
                        dup = True
                        break
                if not dup:
                    acc += _access(touched[i])
            ledger[klass] += opc
            ledger[_L_ACCESS] += acc
            ledger[_L_TOTAL] += opc + acc
        pc = next_pc


def _limbs(v: int, dest) -> bool:
    if v >> CAP_BITS:
        return False
    for i in range(NL):
        dest[i] = (v >> (64 * i)) & _MASK64
    return True


class _Encoded:
    __slots__ = ("code", "vals", "top")

    def __init__(self, code, vals, top):
        self.code = code
        self.vals = vals
        self.top = top


_ENCODE_CACHE: dict = {}


def _encode(program):
    key = id(program)
    hit = _ENCODE_CACHE.get(key)
    if hit is not None and hit[0] is program:
        return hit[1]
    enc = _encode_uncached(program)
    if len(_ENCODE_CACHE) > 32:
        _ENCODE_CACHE.clear()
    _ENCODE_CACHE[key] = (program, enc)
    return enc


def _encode_uncached(program):
    n = len(program.instructions)
    code = np.full((max(n, 1), 6), -1, dtype=np.int64)
    vals = np.zeros((max(n, 1), 3, NL), dtype=np.uint64)
    top = 0

    def put(i, k, op):
        nonlocal top
        if isinstance(op, Const):
            code[i, 2 + k] = 0
            return _limbs(op.value, vals[i, k])
        code[i, 2 + k] = 1 if isinstance(op, Direct) else 2
        vals[i, k, 0] = op.index
        top = max(top, op.index)
        return True

    def dst(i, r):
        nonlocal top
        code[i, 1] = r
        top = max(top, r)

    for i, ins in enumerate(program.instructions):
        ok = True
        if isinstance(ins, BinOp):
            code[i, 0] = _BINOP_CODES[ins.op]
            dst(i, ins.dst)
            ok = put(i, 0, ins.a) and put(i, 1, ins.a2)
        elif isinstance(ins, Not):
            code[i, 0] = OP_NOT
            dst(i, ins.dst)
            ok = put(i, 0, ins.a)
        elif isinstance(ins, CyclicShift):
            code[i, 0] = OP_ROTL if ins.direction == "left" else OP_ROTR
            dst(i, ins.dst)
            ok = put(i, 0, Direct(ins.src)) and put(i, 1, ins.amount) and put(i, 2, ins.length)
        elif isinstance(ins, Input):
            code[i, 0] = OP_IN
            dst(i, ins.dst)
            ok = put(i, 0, ins.start) and put(i, 1, ins.stop)
        elif isinstance(ins, Output):
            code[i, 0] = OP_OUT
            ok = put(i, 0, Direct(ins.src)) and put(i, 1, ins.length)
        elif isinstance(ins, JumpEq):
            code[i, 0] = OP_JEQ
            code[i, 5] = ins.target
            ok = put(i, 0, ins.a) and put(i, 1, ins.a2)
        elif isinstance(ins, VCopy):
            code[i, 0] = OP_VCOPY
            ok = put(i, 0, ins.src) and put(i, 1, ins.dst) and put(i, 2, ins.count)
        elif isinstance(ins, Halt):
            code[i, 0] = OP_HALT
        if not ok or top >= _MAX_DENSE:
            return None
    return _Encoded(code[:n], vals[:n], top)


def run_fast(s, registers_hint: int = 0) -> int:
    """Advance ``s`` in place as far as the fast engine can take it.

    Returns the number of instructions executed.
    """
    if s.status != "running":
        return 0
    enc = _encode(s.program)
    if enc is None:
        return 0
    regs = s.registers
    size = max(enc.top, registers_hint, max(regs) if regs else 0) + 1
    size = max(2 * size, 1024)
    if size > _MAX_DENSE:
        return 0
    dense = np.zeros((size, NL), dtype=np.uint64)
    for i, v in regs.items():
        if not _limbs(v, dense[i]):
            return 0
    tape = np.frombuffer(s.tape, dtype=np.uint8) if s.tape else np.zeros(0, dtype=np.uint8)
    out = np.zeros(len(s.output) + 4 * len(s.tape) + 4096, dtype=np.uint8)
    out[:len(s.output)] = np.frombuffer(bytes(s.output), dtype=np.uint8)
    ledger = np.zeros(10, dtype=np.int64)
    lg = s.ledger
    for c, i in _CLASS_INDEX.items():
        ledger[i] = lg.per_class[c]
    ledger[_L_ACCESS] = lg.access
    ledger[_L_TOTAL] = lg.total
    ledger[_L_COUNT] = lg.instructions
    before = lg.instructions
    cfg = s.cfg
    status, pc, out_len = _run(
        enc.code, enc.vals, dense, tape, out, len(s.output), ledger, s.pc,
        cfg.W, cfg.w, cfg.lam, cfg.model == "unit", min(cfg.max_steps, 1 << 62))

    nz = np.nonzero(dense.any(axis=1))[0]
    new = {}
    for i in nz.tolist():
        v = 0
        for j, limb in enumerate(dense[i].tolist()):
            v |= limb << (64 * j)
        new[i] = v
    s.registers = new
    s.output = bytearray(out[:out_len].tobytes())
    for c, i in _CLASS_INDEX.items():
        lg.per_class[c] = int(ledger[i])
    lg.access = int(ledger[_L_ACCESS])
    lg.total = int(ledger[_L_TOTAL])
    lg.instructions = int(ledger[_L_COUNT])
    s.pc = int(pc)
    if status == 1:
        s.status = "halted"
    return lg.instructions - before
