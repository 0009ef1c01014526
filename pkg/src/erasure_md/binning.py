"""Random-binning erasure multiple descriptions for the average-case setting.

Every encoder sends its whole contiguous part of the source plus a bin index
of the source's erased version (each part with its last ``l*d_k/(n-k)`` bits
erased). A decoder holding at least k messages enumerates every erased
version consistent with the parts it received and keeps the ones whose bins
match. Exactly one survivor means success; anything else is reported as the
all-erasure string.

Bins come from a keyed 64-bit mixing hash of (erased version, encoder index,
seed). The erased version's kept bits are packed MSB-first into uint64 words
and folded through a splitmix64 finalizer chain.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from itertools import combinations
from math import comb, sqrt
from typing import Iterable, Sequence

import numpy as np

from .emdcodec import ERASED, TernaryString, as_fraction
from .errors import DomainError, TooLargeError

MAX_FREE_BITS = 24
MAX_BIN_BITS = 64

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)


def _mix_scalar(z: int) -> int:
    z &= _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def _mix(z: np.ndarray) -> np.ndarray:
    """In-place splitmix64 finalizer; uint64 products wrap modulo 2^64."""
    z ^= z >> np.uint64(30)
    z *= _M1
    z ^= z >> np.uint64(27)
    z *= _M2
    z ^= z >> np.uint64(31)
    return z


@dataclass(frozen=True)
class BinningConfig:
    """Parameters of the binning scheme; ``bin_bits`` is ``l * r_prime``."""

    n: int
    k: int
    d_k: Fraction
    epsilon: Fraction
    l: int
    seed: int = 0

    def __post_init__(self):
        n, k = self.n, self.k
        if not (isinstance(n, int) and isinstance(k, int)) or not 1 <= k < n:
            raise DomainError(f"need integers 1 <= k < n, got n={n!r}, k={k!r}")
        d = as_fraction(self.d_k)
        eps = as_fraction(self.epsilon)
        object.__setattr__(self, "d_k", d)
        object.__setattr__(self, "epsilon", eps)
        if not 0 <= d < 1 - Fraction(k, n):
            raise DomainError(f"binning needs 0 <= d_k < 1 - k/n, got {d}")
        if eps < 0:
            raise DomainError("epsilon must be nonnegative")
        if not isinstance(self.l, int) or self.l < 1 or self.l % n:
            raise DomainError(f"blocklength {self.l!r} must be a positive multiple of n={n}")
        if (self.l * d / (n - k)).denominator != 1:
            raise DomainError("l*d_k/(n-k) must be an integer")
        if self.r_prime <= 0 or (self.l * self.r_prime).denominator != 1:
            raise DomainError(f"l*r_prime = {self.l * self.r_prime} must be a positive integer")
        if self.bin_bits > MAX_BIN_BITS:
            raise TooLargeError(f"bin index of {self.bin_bits} bits exceeds {MAX_BIN_BITS}")
        if not 0 <= self.seed <= _MASK64:
            raise DomainError("seed must fit in 64 bits")

    @cached_property
    def r_prime(self) -> Fraction:
        return (1 - self.d_k) / self.k - Fraction(1, self.n) + self.epsilon

    @property
    def rate(self) -> Fraction:
        """Bits per source symbol on each channel."""
        return Fraction(1, self.n) + self.r_prime

    @cached_property
    def part_len(self) -> int:
        return self.l // self.n

    @cached_property
    def erased_per_part(self) -> int:
        return int(self.l * self.d_k / (self.n - self.k))

    @cached_property
    def kept_per_part(self) -> int:
        return self.part_len - self.erased_per_part

    @cached_property
    def bin_bits(self) -> int:
        return int(self.l * self.r_prime)

    @property
    def bins_per_set(self) -> int:
        return 1 << self.bin_bits

    @cached_property
    def keys(self) -> tuple[int, ...]:
        """Per-encoder hash keys derived from the seed."""
        return tuple(_mix_scalar(self.seed + (i + 1) * _GOLDEN) for i in range(self.n))

    @cached_property
    def kept_positions(self) -> np.ndarray:
        starts = np.arange(self.n)[:, None] * self.part_len
        return (starts + np.arange(self.kept_per_part)).ravel()


def candidate_count(cfg: BinningConfig, received: int | None = None) -> int:
    """Erased versions consistent with ``received`` whole parts (default k)."""
    c = cfg.k if received is None else received
    return 1 << ((cfg.n - c) * cfg.kept_per_part)


def error_bound(cfg: BinningConfig) -> float:
    """Union bound C(n,k) * 2^(-l*k*epsilon) on the decoding error probability."""
    return comb(cfg.n, cfg.k) * 2.0 ** float(-cfg.l * cfg.k * cfg.epsilon)


@dataclass(frozen=True)
class BinMessage:
    index: int
    part_bits: tuple[int, ...]
    bin_index: int


def _pack_words(kept: np.ndarray) -> np.ndarray:
    """Pack (..., K) bits MSB-first into (..., ceil(K/64)) uint64 words."""
    K = kept.shape[-1]
    words = -(-K // 64)
    padded = np.zeros(kept.shape[:-1] + (words * 64,), dtype=np.uint64)
    padded[..., :K] = kept
    grouped = padded.reshape(kept.shape[:-1] + (words, 64))
    weights = np.uint64(1) << np.arange(63, -1, -1, dtype=np.uint64)
    return np.bitwise_or.reduce(grouped * weights, axis=-1)


def _hash_words(words: np.ndarray, key: int) -> np.ndarray:
    h = _mix(words[..., 0] ^ np.uint64(key))
    for t in range(1, words.shape[-1]):
        h = _mix(h ^ words[..., t])
    return h


def _bins(cfg: BinningConfig, words: np.ndarray, encoder: int) -> np.ndarray:
    h = _hash_words(words, cfg.keys[encoder])
    if cfg.bin_bits == 0:
        return np.zeros_like(h)
    return h >> np.uint64(64 - cfg.bin_bits)


def _check_source(cfg: BinningConfig, source) -> np.ndarray:
    src = np.asarray(source)
    if src.ndim != 1 or src.shape[0] != cfg.l:
        raise DomainError(f"source must have length {cfg.l}, got shape {src.shape}")
    if np.any((src != 0) & (src != 1)):
        raise DomainError("source must be binary")
    return src.astype(np.uint8)


def encode_bin(cfg: BinningConfig, source) -> list[BinMessage]:
    """Split the source into n parts and attach each encoder's bin index."""
    src = _check_source(cfg, source)
    words = _pack_words(src[cfg.kept_positions])[None, :]
    parts = src.reshape(cfg.n, cfg.part_len)
    return [
        BinMessage(i + 1, tuple(int(b) for b in parts[i]), int(_bins(cfg, words, i)[0]))
        for i in range(cfg.n)
    ]


class _FreePattern:
    """XOR masks over the packed erased version for every filling of the free parts."""

    def __init__(self, cfg: BinningConfig, known_parts: Sequence[int]):
        free = [j for j in range(cfg.n) if j not in set(known_parts)]
        kept = cfg.kept_per_part
        self.free_bits = len(free) * kept
        if self.free_bits > MAX_FREE_BITS:
            raise TooLargeError(
                f"{self.free_bits} free bits means 2^{self.free_bits} candidates; "
                f"the enumeration cap is 2^{MAX_FREE_BITS}"
            )
        # slot of every free bit inside the packed kept-bit vector
        slots = np.array([j * kept + b for j in free for b in range(kept)], dtype=np.int64)
        self.slots = slots
        words = -(-cfg.n * kept // 64)
        index = np.arange(1 << self.free_bits, dtype=np.uint64)
        masks = np.zeros((index.size, words), dtype=np.uint64)
        # candidate index bit (free_bits - 1 - t) fills slot t
        for t, slot in enumerate(slots.tolist()):
            on = (index >> np.uint64(self.free_bits - 1 - t)) & np.uint64(1)
            masks[:, slot // 64] |= on << np.uint64(63 - slot % 64)
        self.masks = masks

    def fill(self, candidate: int) -> np.ndarray:
        """Free-slot bits of one candidate, in slot order."""
        shifts = np.arange(self.free_bits - 1, -1, -1)
        return ((candidate >> shifts) & 1).astype(np.uint8)


def _survivors(
    cfg: BinningConfig,
    kept_bits: np.ndarray,
    pattern: _FreePattern,
    encoders: Sequence[int],
    bins: Sequence[int],
) -> np.ndarray:
    """Candidate indices whose bins match ``bins`` at every listed encoder.

    ``kept_bits`` is the packed-order kept vector with free slots ignored.
    """
    base = kept_bits.copy()
    base[pattern.slots] = 0
    cand = _pack_words(base)[None, :] ^ pattern.masks
    alive = np.flatnonzero(_bins(cfg, cand, encoders[0]) == np.uint64(bins[0]))
    for enc, b in zip(encoders[1:], bins[1:]):
        if alive.size == 0:
            break
        alive = alive[_bins(cfg, cand[alive], enc) == np.uint64(b)]
    return alive


def decode_bin(cfg: BinningConfig, received: Iterable[BinMessage]) -> TernaryString:
    """Reconstruct from any nonempty set of messages."""
    msgs = sorted(received, key=lambda m: m.index)
    if not msgs:
        raise DomainError("at least one message is required")
    idx = [m.index for m in msgs]
    if len(set(idx)) != len(idx) or any(not 1 <= i <= cfg.n for i in idx):
        raise DomainError(f"message indices {idx} must be distinct and lie in [1, {cfg.n}]")
    L = cfg.part_len
    for m in msgs:
        if len(m.part_bits) != L or any(b not in (0, 1) for b in m.part_bits):
            raise DomainError(f"message {m.index} does not carry {L} bits")
    out = np.full(cfg.l, ERASED, dtype=np.int8)
    for m in msgs:
        out[(m.index - 1) * L : m.index * L] = m.part_bits
    if len(msgs) < cfg.k:
        return TernaryString(out)

    known = [i - 1 for i in idx]
    pattern = _FreePattern(cfg, known)
    kept_bits = np.where(out[cfg.kept_positions] == ERASED, 0, out[cfg.kept_positions]).astype(np.uint8)
    alive = _survivors(cfg, kept_bits, pattern, known, [m.bin_index for m in msgs])
    if alive.size != 1:
        return TernaryString(np.full(cfg.l, ERASED, dtype=np.int8))
    kept_bits[pattern.slots] = pattern.fill(int(alive[0]))
    out[cfg.kept_positions] = kept_bits
    return TernaryString(out)


@dataclass(frozen=True)
class ErrorEstimate:
    errors: int
    trials: int
    rate: float
    half_width: float
    bound: float

    @property
    def within_bound(self) -> bool:
        return self.rate <= self.bound + self.half_width


def trial_source(cfg: BinningConfig, seed: int, t: int) -> np.ndarray:
    """Source for trial ``t``, independent of how trials are sharded."""
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(t,)))
    return rng.integers(0, 2, cfg.l, dtype=np.uint8)


def estimate_error_prob(
    cfg: BinningConfig, trials: int, seed: int = 0, start: int = 0
) -> ErrorEstimate:
    """Fraction of sources for which some k-subset leaves more than one survivor.

    The half-width is three binomial standard deviations.
    """
    if trials < 1:
        raise DomainError("trials must be >= 1")
    subsets = list(combinations(range(cfg.n), cfg.k))
    patterns = [_FreePattern(cfg, s) for s in subsets]
    errors = 0
    for t in range(start, start + trials):
        src = trial_source(cfg, seed, t)
        kept_bits = src[cfg.kept_positions]
        words = _pack_words(kept_bits)[None, :]
        bins = [int(_bins(cfg, words, i)[0]) for i in range(cfg.n)]
        for s, pattern in zip(subsets, patterns):
            alive = _survivors(cfg, kept_bits, pattern, s, [bins[i] for i in s])
            if alive.size != 1:
                errors += 1
                break
    rate = errors / trials
    return ErrorEstimate(errors, trials, rate, 3 * sqrt(rate * (1 - rate) / trials), error_bound(cfg))
