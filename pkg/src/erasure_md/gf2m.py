"""Arithmetic in GF(2^m), 1 <= m <= 16, via log/antilog tables.

Elements are plain integers: bit ``i`` is the coefficient of ``x**i``.
Addition is XOR. The primitive element is ``x`` (the integer 2, or 1 when
m == 1).
"""

from __future__ import annotations

from functools import cached_property, lru_cache

import numpy as np

from .errors import DimensionError, DomainError, UnsupportedDegreeError

MAX_DEGREE = 16

# One primitive polynomial per degree, bit i = coefficient of x^i.
PRIMITIVE_POLYS: dict[int, int] = {
    1: 0b11,  # x + 1
    2: 0b111,  # x^2 + x + 1
    3: 0b1011,  # x^3 + x + 1
    4: 0b10011,  # x^4 + x + 1
    5: 0b100101,  # x^5 + x^2 + 1
    6: 0b1000011,  # x^6 + x + 1
    7: 0b10001001,  # x^7 + x^3 + 1
    8: 0x11D,  # x^8 + x^4 + x^3 + x^2 + 1
    9: 0x211,  # x^9 + x^4 + 1
    10: 0x409,  # x^10 + x^3 + 1
    11: 0x805,  # x^11 + x^2 + 1
    12: 0x1053,  # x^12 + x^6 + x^4 + x + 1
    13: 0x201B,  # x^13 + x^4 + x^3 + x + 1
    14: 0x4443,  # x^14 + x^10 + x^6 + x + 1
    15: 0x8003,  # x^15 + x + 1
    16: 0x1100B,  # x^16 + x^12 + x^3 + x + 1
}


class Field:
    """GF(2^m) with precomputed discrete-log tables.

    Instances are immutable; use :func:`field_construct` to get a cached one.
    """

    def __init__(self, m: int):
        if not isinstance(m, (int, np.integer)) or not 1 <= m <= MAX_DEGREE:
            raise UnsupportedDegreeError(f"extension degree must be in 1..{MAX_DEGREE}, got {m!r}")
        self.m = int(m)
        self.primitive_poly = PRIMITIVE_POLYS[self.m]
        self.order = 1 << self.m
        group = self.order - 1

        exp = np.zeros(2 * group, dtype=np.int64)
        log = np.zeros(self.order, dtype=np.int64)
        x = 1
        for i in range(group):
            exp[i] = x
            log[x] = i
            x <<= 1
            if x & self.order:
                x ^= self.primitive_poly
        if x != 1 or len(set(exp[:group].tolist())) != group:
            raise DomainError(f"polynomial {self.primitive_poly:#x} is not primitive")
        exp[group:] = exp[:group]
        exp.setflags(write=False)
        log.setflags(write=False)
        self.antilog_table = exp
        self.log_table = log

    def __repr__(self) -> str:
        return f"Field(m={self.m}, poly={self.primitive_poly:#x})"

    @property
    def q(self) -> int:
        return self.order

    def _check(self, a: int) -> int:
        if not 0 <= a < self.order:
            raise DomainError(f"{a} is not an element of GF(2^{self.m})")
        return a

    # scalar operations

    def add(self, a: int, b: int) -> int:
        return a ^ b

    def mul(self, a: int, b: int) -> int:
        if a == 0 or b == 0:
            return 0
        return int(self.antilog_table[self.log_table[a] + self.log_table[b]])

    def inv(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("zero has no multiplicative inverse")
        return int(self.antilog_table[(self.order - 1 - self.log_table[a]) % (self.order - 1)])

    def div(self, a: int, b: int) -> int:
        return self.mul(a, self.inv(b))

    def power(self, a: int, e: int) -> int:
        if e == 0:
            return 1
        if a == 0:
            return 0
        return int(self.antilog_table[(self.log_table[a] * e) % (self.order - 1)])

    def alpha_power(self, e: int) -> int:
        """The primitive element raised to ``e``."""
        return int(self.antilog_table[e % (self.order - 1)])

    # array operations

    def mul_array(self, a, b) -> np.ndarray:
        """Elementwise product with numpy broadcasting."""
        a = np.asarray(a, dtype=np.int64)
        b = np.asarray(b, dtype=np.int64)
        out = self.antilog_table[self.log_table[a] + self.log_table[b]]
        return np.where((a == 0) | (b == 0), 0, out)

    @cached_property
    def mul_table(self) -> np.ndarray | None:
        """Full q x q product table, built only for m <= 8."""
        if self.m > 8:
            return None
        elems = np.arange(self.order)
        table = self.mul_array(elems[:, None], elems[None, :])
        table.setflags(write=False)
        return table

    def matmul(self, p, g) -> np.ndarray:
        """Row vectors times a matrix: ``p`` is (..., k), ``g`` is (k, n)."""
        p = np.asarray(p, dtype=np.int64)
        g = np.asarray(g, dtype=np.int64)
        if p.shape[-1] != g.shape[0]:
            raise DimensionError(f"cannot multiply (..., {p.shape[-1]}) by {g.shape}")
        out = np.zeros(p.shape[:-1] + (g.shape[1],), dtype=np.int64)
        table = self.mul_table
        for t in range(g.shape[0]):
            if table is not None:
                out ^= table[:, g[t]][p[..., t]]
            else:
                out ^= self.mul_array(p[..., t, None], g[t])
        return out

    def inv_matrix(self, a) -> np.ndarray:
        """Inverse of a square matrix by Gauss-Jordan elimination.

        Raises ``ZeroDivisionError`` if the matrix is singular.
        """
        rows = [list(map(int, r)) for r in np.asarray(a)]
        size = len(rows)
        if any(len(r) != size for r in rows):
            raise DimensionError("matrix must be square")
        aug = [r + [1 if i == j else 0 for j in range(size)] for i, r in enumerate(rows)]
        for col in range(size):
            pivot = next((r for r in range(col, size) if aug[r][col]), None)
            if pivot is None:
                raise ZeroDivisionError("matrix is singular over GF(2^m)")
            aug[col], aug[pivot] = aug[pivot], aug[col]
            scale = self.inv(aug[col][col])
            aug[col] = [self.mul(v, scale) for v in aug[col]]
            for r in range(size):
                factor = aug[r][col]
                if r != col and factor:
                    aug[r] = [v ^ self.mul(factor, w) for v, w in zip(aug[r], aug[col])]
        return np.array([r[size:] for r in aug], dtype=np.int64).reshape(size, size)

    def det(self, a) -> int:
        """Determinant (characteristic 2, so row swaps carry no sign)."""
        rows = [list(map(int, r)) for r in np.asarray(a)]
        size = len(rows)
        result = 1
        for col in range(size):
            pivot = next((r for r in range(col, size) if rows[r][col]), None)
            if pivot is None:
                return 0
            rows[col], rows[pivot] = rows[pivot], rows[col]
            piv = rows[col][col]
            result = self.mul(result, piv)
            scale = self.inv(piv)
            for r in range(col + 1, size):
                factor = self.mul(rows[r][col], scale)
                if factor:
                    rows[r] = [v ^ self.mul(factor, w) for v, w in zip(rows[r], rows[col])]
        return result


@lru_cache(maxsize=None)
def field_construct(m: int) -> Field:
    return Field(m)


def gf_mul(a: int, b: int, f: Field) -> int:
    return f.mul(f._check(a), f._check(b))


def gf_inv(a: int, f: Field) -> int:
    return f.inv(f._check(a))


def bits_to_symbols(bits: np.ndarray, m: int) -> np.ndarray:
    """Pack groups of ``m`` bits (first bit most significant) into integers.

    The last axis of ``bits`` must be a multiple of ``m``.
    """
    bits = np.asarray(bits, dtype=np.int64)
    grouped = bits.reshape(bits.shape[:-1] + (bits.shape[-1] // m, m))
    weights = 1 << np.arange(m - 1, -1, -1, dtype=np.int64)
    return grouped @ weights


def symbols_to_bits(symbols: np.ndarray, m: int) -> np.ndarray:
    """Inverse of :func:`bits_to_symbols`; returns uint8 bits."""
    symbols = np.asarray(symbols, dtype=np.int64)
    shifts = np.arange(m - 1, -1, -1, dtype=np.int64)
    bits = (symbols[..., None] >> shifts) & 1
    return bits.reshape(symbols.shape[:-1] + (symbols.shape[-1] * m,)).astype(np.uint8)
