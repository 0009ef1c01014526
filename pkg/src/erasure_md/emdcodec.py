"""Erasure multiple-descriptions codec.

Two regimes, selected by comparing the k-description distortion ``d_k`` with
``1 - k/n``:

* ``uncoded``: the source is cut into n contiguous parts and description i
  carries the first ``l*R`` bits of part i.
* ``mds``: each part keeps ``alpha*m*k`` leading bits and erases its last
  ``erased_per_part`` bits. The erased tail of part i travels uncoded in
  description i; the kept bits of part j become ``alpha`` length-k vectors over
  GF(2^m), each multiplied by the j-th rotated systematic generator. Description
  i carries coordinate i of all ``alpha*n`` codewords.

Distortions are exact :class:`fractions.Fraction` values throughout.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache
from itertools import combinations
from math import lcm
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    ContradictionError,
    DomainError,
    IntegrityError,
    ParameterInfeasibleError,
)
from .gf2m import MAX_DEGREE, Field, bits_to_symbols, field_construct, symbols_to_bits
from .mdscode import GeneratorSet

UNCODED = "uncoded"
MDS = "mds"

ERASED = -1
_SYMBOL_CHARS = {0: "+", 1: "-", ERASED: "0"}


def as_fraction(value) -> Fraction:
    """Coerce ints, Fractions and strings like ``"1/4"`` to a Fraction."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        raise DomainError("distortions must be exact rationals, not floats; pass '1/4' or Fraction(1, 4)")
    return Fraction(value)


@dataclass(frozen=True)
class MdParams:
    """A validated (n, k, d_k) configuration and its derived block structure.

    ``payload_bits`` is the per-description bit count ``l*R``. In the uncoded
    regime ``m`` and ``erased_per_part`` are zero.
    """

    n: int
    k: int
    d_k: Fraction
    alpha: int
    regime: str
    rate: Fraction
    m: int
    l: int
    part_len: int
    erased_per_part: int
    payload_bits: int

    @property
    def q(self) -> int:
        return 1 << self.m if self.m else 0

    @property
    def kept_per_part(self) -> int:
        return self.part_len - self.erased_per_part if self.regime == MDS else self.payload_bits

    @property
    def parity_count(self) -> int:
        """Field symbols per description (``alpha*n`` in the mds regime)."""
        return self.alpha * self.n if self.regime == MDS else 0

    @property
    def uncoded_len(self) -> int:
        return self.erased_per_part if self.regime == MDS else self.payload_bits

    @cached_property
    def field(self) -> Field | None:
        return field_construct(self.m) if self.regime == MDS else None

    @cached_property
    def layout(self) -> "_Layout":
        return _Layout(self)


def _smallest_degree(n: int) -> int:
    m = 1
    while (1 << m) - 1 < n:
        m += 1
    return m


def derive_params(n: int, k: int, d_k, alpha: int | None = 1) -> MdParams:
    """Pick the regime, field degree and blocklength for ``(n, k, d_k)``.

    With ``alpha=None`` the smallest multiplier that makes the block structure
    integral for the smallest admissible field is chosen automatically.
    """
    if not (isinstance(n, int) and isinstance(k, int)) or not 1 <= k <= n:
        raise DomainError(f"need integers 1 <= k <= n, got n={n!r}, k={k!r}")
    if n > 255:
        raise DomainError("at most 255 descriptions fit the packet header")
    d = as_fraction(d_k)
    if not 0 <= d <= 1:
        raise DomainError(f"d_k must lie in [0, 1], got {d}")
    if alpha is not None and (not isinstance(alpha, int) or alpha < 1):
        raise DomainError(f"alpha must be a positive integer, got {alpha!r}")
    rate = (1 - d) / k

    if d >= 1 - Fraction(k, n):
        a = 1 if alpha is None else alpha
        l = a * lcm(n, rate.denominator)
        return MdParams(n, k, d, a, UNCODED, rate, 0, l, l // n, 0, int(l * rate))

    slack = n * (1 - d) - k  # > 0 in this regime
    m0 = _smallest_degree(n)

    def block(m: int, a: int) -> tuple[Fraction, Fraction]:
        l = a * m * n * k * (n - k) / slack
        return l, l * d / (n - k)

    if alpha is None:
        l1, e1 = block(m0, 1)
        a = lcm(l1.denominator, e1.denominator)
        if m0 > MAX_DEGREE:
            raise ParameterInfeasibleError(f"n={n} needs a field larger than GF(2^{MAX_DEGREE})")
        candidates = [(m0, a)]
    else:
        candidates = [(m, alpha) for m in range(m0, MAX_DEGREE + 1)]
    for m, a in candidates:
        l, e = block(m, a)
        if l.denominator == 1 and e.denominator == 1:
            l, e = int(l), int(e)
            params = MdParams(n, k, d, a, MDS, rate, m, l, l // n, e, a * m * n + e)
            assert params.payload_bits == l * rate and params.kept_per_part == a * m * k
            return params
    raise ParameterInfeasibleError(
        f"no field degree <= {MAX_DEGREE} gives an integral blocklength for "
        f"n={n}, k={k}, d_k={d}, alpha={alpha}; try alpha=None"
    )


def closed_form_distortion(p: MdParams, received: int) -> Fraction:
    """Worst-case distortion the scheme achieves with ``received`` descriptions."""
    if not 0 <= received <= p.n:
        raise DomainError(f"received count {received} outside [0, {p.n}]")
    if p.regime == UNCODED:
        return 1 - received * p.rate
    if received < p.k:
        return 1 - Fraction(received, p.n)
    return Fraction(p.n - received, p.n - p.k) * p.d_k


@lru_cache(maxsize=64)
def _generator_set(n: int, k: int, m: int) -> GeneratorSet:
    return GeneratorSet(n, k, field_construct(m))


def generator_set_for(p: MdParams) -> GeneratorSet | None:
    if p.regime != MDS:
        return None
    return _generator_set(p.n, p.k, p.m)


class _Layout:
    """Bit positions of every payload element inside the length-l block."""

    def __init__(self, p: MdParams):
        n, L = p.n, p.part_len
        starts = np.arange(n, dtype=np.int64)[:, None] * L
        if p.regime == UNCODED:
            self.uncoded = starts + np.arange(p.payload_bits, dtype=np.int64)
            return
        kept = p.kept_per_part
        self.uncoded = starts + kept + np.arange(p.erased_per_part, dtype=np.int64)
        self.kept = starts + np.arange(kept, dtype=np.int64)
        # (part j, block a, symbol s, bit) -> position
        self.symbols = self.kept.reshape(n, p.alpha, p.k, p.m)


@dataclass(frozen=True)
class Description:
    """One channel's payload.

    ``parity_symbols[a*n + (j-1)]`` is coordinate ``index`` of the codeword
    built from block ``a`` of part ``j``.
    """

    index: int
    uncoded_bits: tuple[int, ...]
    parity_symbols: tuple[int, ...] = ()

    def bit_length(self, m: int) -> int:
        return len(self.uncoded_bits) + m * len(self.parity_symbols)

    def payload_bits(self, m: int) -> list[int]:
        """Uncoded bits followed by each parity symbol, m bits MSB-first."""
        bits = list(self.uncoded_bits)
        for sym in self.parity_symbols:
            bits.extend((sym >> (m - 1 - b)) & 1 for b in range(m))
        return bits


class TernaryString:
    """A sequence over {bit 0, bit 1, erasure}; rendered as '+', '-', '0'."""

    __slots__ = ("symbols",)

    def __init__(self, symbols):
        arr = np.asarray(symbols, dtype=np.int8)
        if arr.ndim != 1 or np.any((arr != 0) & (arr != 1) & (arr != ERASED)):
            raise DomainError("ternary symbols must be 0, 1 or ERASED")
        self.symbols = arr

    @classmethod
    def parse(cls, text: str) -> "TernaryString":
        lookup = {v: k for k, v in _SYMBOL_CHARS.items()}
        try:
            return cls([lookup[c] for c in text.strip()])
        except KeyError as exc:
            raise DomainError(f"unexpected character {exc.args[0]!r}") from None

    def __len__(self) -> int:
        return len(self.symbols)

    def __eq__(self, other) -> bool:
        return isinstance(other, TernaryString) and np.array_equal(self.symbols, other.symbols)

    def __str__(self) -> str:
        return "".join(_SYMBOL_CHARS[int(v)] for v in self.symbols)

    def __repr__(self) -> str:
        text = str(self)
        return f"TernaryString({text[:40]!r}{'...' if len(text) > 40 else ''})"

    @property
    def erasures(self) -> int:
        return int(np.count_nonzero(self.symbols == ERASED))

    def revealed(self) -> np.ndarray:
        return np.flatnonzero(self.symbols != ERASED)

    def contradicts(self, source) -> bool:
        source = np.asarray(source)
        return bool(np.any((self.symbols != ERASED) & (self.symbols != source)))

    def distortion(self, source) -> Fraction:
        """Per-letter erasure distortion against ``source``.

        A wrong symbol has infinite distortion, reported as ContradictionError.
        """
        if len(source) != len(self):
            raise DomainError("source and reconstruction lengths differ")
        if self.contradicts(source):
            raise ContradictionError("reconstruction contradicts the source")
        return Fraction(self.erasures, len(self))


def _check_sources(p: MdParams, sources) -> np.ndarray:
    arr = np.asarray(sources)
    if arr.ndim != 2 or arr.shape[1] != p.l:
        raise DomainError(f"expected sources of shape (batch, {p.l}), got {arr.shape}")
    if np.any((arr != 0) & (arr != 1)):
        raise DomainError("sources must be binary")
    return arr.astype(np.uint8)


def encode_batch(
    p: MdParams, sources, gs: GeneratorSet | None = None
) -> tuple[np.ndarray, np.ndarray]:
    """Encode a batch of sources.

    Returns ``(uncoded, parity)`` with shapes (batch, n, uncoded_len) and
    (batch, n, parity_count); row i of axis 1 is description i + 1.
    """
    src = _check_sources(p, sources)
    batch = src.shape[0]
    parts = src.reshape(batch, p.n, p.part_len)
    if p.regime == UNCODED:
        return parts[:, :, : p.payload_bits].copy(), np.zeros((batch, p.n, 0), dtype=np.int64)
    gs = gs or generator_set_for(p)
    _check_generators(p, gs)
    kept = p.kept_per_part
    uncoded = parts[:, :, kept:].copy()
    msgs = bits_to_symbols(parts[:, :, :kept], p.m).reshape(batch, p.n, p.alpha, p.k)
    codewords = np.empty((batch, p.n, p.alpha, p.n), dtype=np.int64)  # (s, j, a, i)
    for j in range(p.n):
        codewords[:, j] = gs.field.matmul(msgs[:, j], gs.g[j])
    parity = codewords.transpose(0, 3, 2, 1).reshape(batch, p.n, p.alpha * p.n)
    return uncoded, parity


def _check_generators(p: MdParams, gs: GeneratorSet | None) -> None:
    if gs is None or (gs.n, gs.k, gs.field.m) != (p.n, p.k, p.m):
        raise DomainError(f"generator set {gs!r} does not match n={p.n}, k={p.k}, m={p.m}")


def decode_batch(
    p: MdParams,
    indices: Sequence[int],
    uncoded,
    parity,
    gs: GeneratorSet | None = None,
) -> np.ndarray:
    """Decode a batch of receptions sharing the same received index set.

    ``uncoded`` and ``parity`` are (batch, c, ...) arrays whose axis-1 order
    follows ``indices`` (1-based). Returns (batch, l) int8 with ERASED marks.
    """
    indices = [int(i) for i in indices]
    c = len(indices)
    if c == 0:
        raise DomainError("at least one description is required")
    if len(set(indices)) != c:
        raise DomainError(f"duplicate description indices in {indices}")
    if any(not 1 <= i <= p.n for i in indices):
        raise DomainError(f"description indices must lie in [1, {p.n}]")
    uncoded = np.asarray(uncoded)
    parity = np.asarray(parity, dtype=np.int64)
    batch = uncoded.shape[0]
    if uncoded.shape != (batch, c, p.uncoded_len) or parity.shape != (batch, c, p.parity_count):
        raise DomainError("payload shapes do not match the parameters")
    lay = p.layout
    out = np.full((batch, p.l), ERASED, dtype=np.int8)
    for r, i in enumerate(indices):
        out[:, lay.uncoded[i - 1]] = uncoded[:, r]
    if p.regime == UNCODED:
        return out

    gs = gs or generator_set_for(p)
    _check_generators(p, gs)
    n, k, m = p.n, p.k, p.m
    par = parity.reshape(batch, c, p.alpha, n)  # (s, r, a, j)
    if c < k:
        # Coordinate i lies in the identity block of g[j] for the k parts
        # j = i-k+1..i (mod n); it carries symbol (i - j) mod n of p_j verbatim.
        for r, i in enumerate(indices):
            for back in range(k):
                j = (i - 1 - back) % n
                out[:, lay.symbols[j, :, back, :].ravel()] = symbols_to_bits(par[:, r, :, j], m)
        return out

    order = sorted(range(c), key=lambda r: indices[r])
    chosen, extra = order[:k], order[k:]
    positions = [indices[r] - 1 for r in chosen]
    extra_pos = [indices[r] - 1 for r in extra]
    field = gs.field
    msgs = np.empty((batch, n, p.alpha, k), dtype=np.int64)
    for j in range(n):
        inv = gs.submatrix_inverse(j, positions)
        msgs[:, j] = field.matmul(par[:, chosen][..., j].transpose(0, 2, 1), inv)
        if extra:
            recheck = field.matmul(msgs[:, j], gs.g[j][:, extra_pos])
            if not np.array_equal(recheck, par[:, extra][..., j].transpose(0, 2, 1)):
                raise IntegrityError(f"parity for part {j + 1} is inconsistent across descriptions")
    out[:, lay.kept.ravel()] = symbols_to_bits(msgs.reshape(batch, -1), m)
    return out


def encode(p: MdParams, source, gs: GeneratorSet | None = None) -> list[Description]:
    """Split one length-l source into n descriptions."""
    src = np.asarray(source)
    if src.ndim != 1 or src.shape[0] != p.l:
        raise DomainError(f"source must have length {p.l}, got {src.shape}")
    uncoded, parity = encode_batch(p, src[None, :], gs)
    return [
        Description(i + 1, tuple(int(b) for b in uncoded[0, i]), tuple(int(s) for s in parity[0, i]))
        for i in range(p.n)
    ]


def decode(
    p: MdParams, received: Iterable[Description], gs: GeneratorSet | None = None
) -> TernaryString:
    """Reconstruct from any nonempty set of descriptions."""
    received = list(received)
    for d in received:
        if len(d.uncoded_bits) != p.uncoded_len or len(d.parity_symbols) != p.parity_count:
            raise DomainError(f"description {d.index} has the wrong payload size for these parameters")
    if p.regime == MDS and any(not 0 <= s < p.q for d in received for s in d.parity_symbols):
        raise DomainError("parity symbol outside the field")
    uncoded = np.array([[d.uncoded_bits for d in received]], dtype=np.uint8).reshape(
        1, len(received), p.uncoded_len
    )
    parity = np.array([[d.parity_symbols for d in received]], dtype=np.int64).reshape(
        1, len(received), p.parity_count
    )
    out = decode_batch(p, [d.index for d in received], uncoded, parity, gs)
    return TernaryString(out[0])


def all_subsets(n: int, size: int | None = None):
    """Nonempty subsets of 1..n as sorted tuples (all sizes when ``size`` is None)."""
    sizes = range(1, n + 1) if size is None else [size]
    for c in sizes:
        yield from combinations(range(1, n + 1), c)


def subset_erasures(
    p: MdParams, encoded: tuple[np.ndarray, np.ndarray], sources, subset: Sequence[int], gs=None
) -> np.ndarray:
    """Erasure count per source when ``subset`` is received.

    Raises ContradictionError if any reconstruction disagrees with its source.
    """
    uncoded, parity = encoded
    rows = [i - 1 for i in subset]
    out = decode_batch(p, subset, uncoded[:, rows], parity[:, rows], gs)
    if np.any((out != ERASED) & (out != sources)):
        raise ContradictionError(f"decoding {tuple(subset)} contradicts the source")
    return np.count_nonzero(out == ERASED, axis=1)


def probe_sources(p: MdParams, trials: int, seed) -> np.ndarray:
    """``trials`` uniform random sources plus the all-zero and all-one strings."""
    rng = np.random.default_rng(seed)
    random = rng.integers(0, 2, size=(trials, p.l), dtype=np.uint8)
    fixed = np.vstack([np.zeros(p.l, dtype=np.uint8), np.ones(p.l, dtype=np.uint8)])
    return np.vstack([random, fixed])


def worst_case_distortion(
    p: MdParams, subset_size: int, trials: int = 100, seed=0, gs: GeneratorSet | None = None
) -> Fraction:
    """Maximum per-letter distortion over all subsets of ``subset_size`` and sources."""
    if not 1 <= subset_size <= p.n:
        raise DomainError(f"subset size must lie in [1, {p.n}]")
    gs = gs or generator_set_for(p)
    sources = probe_sources(p, trials, seed)
    encoded = encode_batch(p, sources, gs)
    worst = 0
    for subset in all_subsets(p.n, subset_size):
        worst = max(worst, int(subset_erasures(p, encoded, sources, subset, gs).max()))
    return Fraction(worst, p.l)
