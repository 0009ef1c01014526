"""Punctured systematic Reed-Solomon codes and erasure decoding.

The mother code is the (q-1, k) Reed-Solomon evaluation code at the points
alpha^0, ..., alpha^(q-2). Puncturing keeps the first ``n`` coordinates and
row reduction brings the generator to the form ``[I_k | A]``.
"""

from __future__ import annotations

from itertools import combinations
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    DimensionError,
    DomainError,
    FieldTooSmallError,
    InconsistentCodewordError,
    InsufficientSymbolsError,
)
from .gf2m import Field


def build_systematic_generator(n: int, k: int, f: Field) -> np.ndarray:
    """Return the k x n systematic generator ``[I_k | A]`` of an (n, k) MDS code."""
    if k < 1 or n < 1:
        raise DimensionError(f"need n, k >= 1, got n={n}, k={k}")
    if k > n:
        raise DimensionError(f"dimension k={k} exceeds length n={n}")
    if n > f.order - 1:
        raise FieldTooSmallError(
            f"length {n} needs a field with at least {n + 1} elements, GF({f.order}) is too small"
        )
    vander = np.array(
        [[f.alpha_power(i * t) for i in range(n)] for t in range(k)], dtype=np.int64
    )
    g = f.matmul(f.inv_matrix(vander[:, :k]), vander)
    g.setflags(write=False)
    return g


def shift_generator(g: np.ndarray, i: int) -> np.ndarray:
    """Rotate columns right by ``i``: output column j is input column (j - i) mod n."""
    n = g.shape[1]
    if not 0 <= i < n:
        raise IndexError(f"shift {i} out of range for n={n}")
    out = np.roll(g, i, axis=1)
    out.setflags(write=False)
    return out


def is_mds(g: np.ndarray, f: Field) -> bool:
    """Exhaustively check that every k x k column submatrix is nonsingular."""
    k, n = g.shape
    return all(f.det(g[:, list(cols)]) != 0 for cols in combinations(range(n), k))


class GeneratorSet:
    """The n column-rotated copies of one systematic generator.

    ``g[i]`` is ``g[0]`` rotated right by ``i`` columns (0-based), so part
    ``j`` (1-based) of the erased source is encoded with ``g[j - 1]``.
    """

    def __init__(self, n: int, k: int, field: Field):
        self.n = n
        self.k = k
        self.field = field
        base = build_systematic_generator(n, k, field)
        self.g = tuple(shift_generator(base, i) for i in range(n))
        self._inverses: dict[tuple[int, ...], np.ndarray] = {}

    def __repr__(self) -> str:
        return f"GeneratorSet(n={self.n}, k={self.k}, field={self.field!r})"

    @property
    def base(self) -> np.ndarray:
        return self.g[0]

    def submatrix_inverse(self, shift: int, positions: Sequence[int]) -> np.ndarray:
        """Inverse of ``g[shift][:, positions]``.

        Cached by the corresponding columns of ``g[0]``, which every rotated
        generator shares, so at most C(n, k) inversions ever happen.
        """
        key = tuple((p - shift) % self.n for p in positions)
        inv = self._inverses.get(key)
        if inv is None:
            inv = self.field.inv_matrix(self.base[:, list(key)])
            inv.setflags(write=False)
            self._inverses[key] = inv
        return inv


def erasure_decode(
    received: Iterable[tuple[int, int]], g: np.ndarray, f: Field
) -> np.ndarray:
    """Recover the message ``p`` with ``p @ g`` matching every received symbol.

    The k lowest received positions determine ``p``; any further symbols are
    checked against the re-encoded codeword.
    """
    k, n = g.shape
    symbols: dict[int, int] = {}
    for pos, value in received:
        if not 0 <= pos < n:
            raise DomainError(f"position {pos} outside [0, {n})")
        if not 0 <= value < f.order:
            raise DomainError(f"{value} is not an element of GF({f.order})")
        if symbols.setdefault(pos, value) != value:
            raise InconsistentCodewordError(f"conflicting symbols at position {pos}")
    if len(symbols) < k:
        raise InsufficientSymbolsError(f"need {k} distinct positions, got {len(symbols)}")
    order = sorted(symbols)
    chosen, extra = order[:k], order[k:]
    inv = f.inv_matrix(g[:, chosen])
    p = f.matmul(np.array([symbols[c] for c in chosen]), inv)
    if extra:
        check = f.matmul(p, g[:, extra])
        if any(int(c) != symbols[e] for c, e in zip(check, extra)):
            raise InconsistentCodewordError("received symbols are not a codeword")
    return p
