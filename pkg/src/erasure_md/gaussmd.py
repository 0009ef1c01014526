"""Layered Gaussian multiple descriptions: quantize, then carry the indices
with the erasure codec at ``d_k = 0``.

Each quantizer index occupies exactly one codec symbol, so a sample is either
fully revealed or fully erased. Revealed samples reconstruct at their cell
midpoint and erased samples at the prior mean 0.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from math import comb, log2, sqrt

import numpy as np

from .emdcodec import ERASED, MDS, MdParams, closed_form_distortion, decode_batch, derive_params, encode_batch
from .errors import ConfigurationError, DomainError
from .gf2m import bits_to_symbols, symbols_to_bits
from .infoverify import golden_section

CLIP_SIGMAS = 4.0


def scalar_rd_rate(d: float, sigma2: float) -> float:
    """Gaussian rate-distortion function in bits per sample."""
    if sigma2 <= 0 or not 0 < d <= sigma2:
        raise DomainError(f"need 0 < d <= sigma2, got d={d}, sigma2={sigma2}")
    return 0.5 * log2(sigma2 / d)


def quantize(x, bits: int, sigma2: float = 1.0) -> np.ndarray:
    """Uniform mid-rise cell index with 2^bits cells over +-4 sigma, clipped."""
    if bits < 1:
        raise DomainError("need at least one bit per sample")
    sigma = sqrt(sigma2)
    step = 2 * CLIP_SIGMAS * sigma / (1 << bits)
    idx = np.floor((np.asarray(x, dtype=float) + CLIP_SIGMAS * sigma) / step)
    return np.clip(idx, 0, (1 << bits) - 1).astype(np.int64)


def dequantize(idx, bits: int, sigma2: float = 1.0) -> np.ndarray:
    sigma = sqrt(sigma2)
    step = 2 * CLIP_SIGMAS * sigma / (1 << bits)
    return -CLIP_SIGMAS * sigma + (np.asarray(idx) + 0.5) * step


@dataclass(frozen=True)
class GaussParams:
    """``k`` is the codec's subset size; ``bits_per_sample`` must fit its symbols."""

    n: int
    k: int
    sigma2: float = 1.0
    bits_per_sample: int = 3
    samples: int = 100_000
    seed: int = 0

    def __post_init__(self):
        if self.sigma2 <= 0:
            raise DomainError("sigma2 must be positive")
        if self.bits_per_sample < 1:
            raise DomainError("bits_per_sample must be >= 1")
        per_block = self.samples_per_block
        if self.samples < 1 or self.samples % per_block:
            raise ConfigurationError(f"samples must be a positive multiple of {per_block}")

    @property
    def codec(self) -> MdParams:
        """Codec parameters at d_k = 0 aligned so one symbol holds one sample."""
        b = self.bits_per_sample
        base = derive_params(self.n, self.k, 0)
        if base.regime == MDS:
            if base.m != b:
                raise ConfigurationError(
                    f"bits_per_sample={b} must equal the field degree m={base.m} for n={self.n}"
                )
            return base
        # uncoded at d_k = 0 means k = n: one sample per part per block
        return derive_params(self.n, self.k, 0, alpha=b)

    @property
    def samples_per_block(self) -> int:
        return self.codec.l // self.bits_per_sample


def predicted_mse(p: GaussParams, received: int, d_q: float) -> float:
    """Time-sharing between the quantizer and the prior mean.

    The erased fraction of samples equals the codec's distortion D_m, which is
    ``1 - m/n`` below k receptions and 0 from k on.
    """
    erased = float(closed_form_distortion(p.codec, received))
    return (1 - erased) * d_q + erased * p.sigma2


@dataclass(frozen=True)
class LayeredResult:
    received: int
    d_q: float
    mse_mean: float
    mse_worst: float
    mse_best: float
    predicted: float
    subsets: int


def _samples(p: GaussParams) -> np.ndarray:
    return np.random.default_rng(p.seed).normal(0.0, sqrt(p.sigma2), p.samples)


def layered_roundtrip(p: GaussParams, received: int) -> LayeredResult:
    """Quantize, encode, decode every ``received``-subset, and measure MSE."""
    cp = p.codec
    if not 1 <= received <= p.n:
        raise DomainError(f"received must lie in [1, {p.n}]")
    b = p.bits_per_sample
    x = _samples(p)
    idx = quantize(x, b, p.sigma2)
    xq = dequantize(idx, b, p.sigma2)
    d_q = float(np.mean((x - xq) ** 2))

    per_block = p.samples_per_block
    bits = symbols_to_bits(idx.reshape(-1, per_block), b)
    uncoded, parity = encode_batch(cp, bits)
    mses = []
    for subset in combinations(range(1, p.n + 1), received):
        rows = [i - 1 for i in subset]
        out = decode_batch(cp, subset, uncoded[:, rows], parity[:, rows])
        cells = out.reshape(-1, per_block, b)
        shown = cells != ERASED
        whole = shown.all(axis=2)
        if np.any(shown.any(axis=2) & ~whole):
            raise ConfigurationError("a sample index was only partly revealed")
        decoded = bits_to_symbols(np.where(shown, cells, 0).reshape(-1, per_block * b), b).ravel()
        mask = whole.ravel()
        xhat = np.where(mask, dequantize(decoded, b, p.sigma2), 0.0)
        mses.append(float(np.mean((x - xhat) ** 2)))
    return LayeredResult(
        received,
        d_q,
        float(np.mean(mses)),
        max(mses),
        min(mses),
        predicted_mse(p, received, d_q),
        comb(p.n, received),
    )


def theorem10_bound(n: int, k: int, d_n: float, sigma2: float) -> float:
    """Smallest k-receiver distortion compatible with no excess rate at n receivers."""
    if not 1 <= k <= n:
        raise DomainError(f"need 1 <= k <= n, got n={n}, k={k}")
    if sigma2 <= 0 or not 0 < d_n <= sigma2:
        raise DomainError(f"need 0 < d_n <= sigma2, got d_n={d_n}, sigma2={sigma2}")
    return (k / n) * d_n + ((n - k) / n) * sigma2


def _sum_rate_objective(lam: float, n: int, k: int, d_k: float, d_n: float, sigma2: float) -> float:
    r = n / k
    return 0.5 * (
        log2(sigma2)
        + (r - 1) * log2(sigma2 + lam)
        + log2(d_n + lam)
        - log2(d_n)
        - r * log2(d_k + lam)
    )


def vw_sum_rate_scalar(
    n: int, k: int, d_k: float, d_n: float, sigma2: float = 1.0, grid: int = 801
) -> float:
    """Scalar sum-rate lower bound: supremum over lambda > 0 of the objective,
    taken as the larger of a refined log-spaced scan and the lambda -> inf limit."""
    if not 1 <= k <= n:
        raise DomainError(f"need 1 <= k <= n, got n={n}, k={k}")
    if not 0 < d_n <= d_k <= sigma2:
        raise DomainError(f"need 0 < d_n <= d_k <= sigma2, got {d_n}, {d_k}, {sigma2}")
    limit = 0.5 * log2(sigma2 / d_n)

    def obj(t: float) -> float:
        return _sum_rate_objective(10.0**t, n, k, d_k, d_n, sigma2)

    ts = np.linspace(-12, 12, grid)
    vals = [obj(t) for t in ts]
    i = int(np.argmax(vals))
    lo, hi = ts[max(i - 1, 0)], ts[min(i + 1, grid - 1)]
    t = golden_section(lambda s: -obj(s), float(lo), float(hi), tol=1e-10)
    return max(limit, obj(t), vals[i])
