"""Reference bignum arithmetic used to check VM products.

Deliberately plain: schoolbook multiplication on limb vectors, ripple-carry
addition.  Nothing here is shared with :mod:`logram.mulgen`.
"""

from __future__ import annotations

from typing import Iterable, Tuple

import numpy as np

LIMB_BITS = 64
_LIMB_MASK = (1 << LIMB_BITS) - 1


class OracleError(ValueError):
    pass


class BigNat(tuple):
    """Little-endian tuple of 64-bit limbs with no leading zero limbs."""

    def __new__(cls, limbs: Iterable[int] = ()):
        limbs = list(limbs)
        for x in limbs:
            if not 0 <= x <= _LIMB_MASK:
                raise OracleError(f"limb out of range: {x}")
        while limbs and limbs[-1] == 0:
            limbs.pop()
        return super().__new__(cls, limbs)

    @classmethod
    def from_int(cls, v: int) -> "BigNat":
        if v < 0:
            raise OracleError("negative value")
        limbs = []
        while v:
            limbs.append(v & _LIMB_MASK)
            v >>= LIMB_BITS
        return cls(limbs)

    def to_int(self) -> int:
        v = 0
        for x in reversed(self):
            v = (v << LIMB_BITS) | x
        return v

    def bit_length(self) -> int:
        if not self:
            return 0
        return (len(self) - 1) * LIMB_BITS + self[-1].bit_length()

    def __repr__(self):
        return f"BigNat({hex(self.to_int())})"


def _as_big(x) -> BigNat:
    if isinstance(x, BigNat):
        return x
    if isinstance(x, int):
        return BigNat.from_int(x)
    return BigNat(x)


def o_add(a, b) -> BigNat:
    a, b = _as_big(a), _as_big(b)
    out = []
    carry = 0
    for i in range(max(len(a), len(b))):
        t = (a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0) + carry
        out.append(t & _LIMB_MASK)
        carry = t >> LIMB_BITS
    if carry:
        out.append(carry)
    return BigNat(out)


def o_cmp(a, b) -> str:
    a, b = _as_big(a), _as_big(b)
    if len(a) != len(b):
        return "lt" if len(a) < len(b) else "gt"
    for x, y in zip(reversed(a), reversed(b)):
        if x != y:
            return "lt" if x < y else "gt"
    return "eq"


def o_sub(a, b) -> BigNat:
    a, b = _as_big(a), _as_big(b)
    if o_cmp(a, b) == "lt":
        raise OracleError("o_sub: a < b")
    out = []
    borrow = 0
    for i in range(len(a)):
        t = a[i] - (b[i] if i < len(b) else 0) - borrow
        borrow = 1 if t < 0 else 0
        out.append(t + (borrow << LIMB_BITS))
    return BigNat(out)


# The product is formed on 16-bit digits: every digit product fits in 32 bits,
# so a column of up to 2**31 of them sums exactly in an int64 accumulator.
_D = 16


def _digits(a: BigNat) -> np.ndarray:
    d = np.zeros(4 * len(a), dtype=np.int64)
    for i, x in enumerate(a):
        for j in range(4):
            d[4 * i + j] = (x >> (_D * j)) & 0xFFFF
    return d


def o_mul_school(a, b) -> BigNat:
    """Exact product by the quadratic digit-by-digit method."""
    a, b = _as_big(a), _as_big(b)
    if not a or not b:
        return BigNat()
    da, db = _digits(a), _digits(b)
    cols = np.zeros(len(da) + len(db), dtype=np.int64)
    # row by row: cols[i + j] += da[i] * db[j]
    for i in np.nonzero(da)[0]:
        cols[i:i + len(db)] += da[i] * db
    out = []
    carry = 0
    word = 0
    for k, c in enumerate(cols.tolist()):
        t = c + carry
        word |= (t & 0xFFFF) << (_D * (k % 4))
        carry = t >> _D
        if k % 4 == 3:
            out.append(word)
            word = 0
    # the product fits in len(cols) digits, so nothing is left over
    assert carry == 0 and word == 0
    return BigNat(out)


def bits_to_bignat(bits: str, msb_first: bool = True) -> BigNat:
    if any(ch not in "01" for ch in bits):
        raise OracleError("bit string may only contain 0 and 1")
    if not msb_first:
        bits = bits[::-1]
    return BigNat.from_int(int(bits, 2) if bits else 0)


def bignat_to_bits(v, width: int) -> str:
    v = _as_big(v)
    if v.bit_length() > width:
        raise OracleError(f"value needs {v.bit_length()} bits, width is {width}")
    if width == 0:
        return ""
    return format(v.to_int(), f"0{width}b")


def split_tape(bits: str, n: int) -> Tuple[BigNat, BigNat]:
    """The two n-bit operands of a ``2n``-bit multiplication tape."""
    if len(bits) != 2 * n:
        raise OracleError(f"tape has {len(bits)} bits, expected {2 * n}")
    return bits_to_bignat(bits[:n]), bits_to_bignat(bits[n:])
