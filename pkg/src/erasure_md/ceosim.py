"""Robust binary-erasure CEO quantities and the per-bit reveal simulator."""

from __future__ import annotations

from dataclasses import dataclass
from math import log2, sqrt

import numpy as np

from .errors import DomainError, InfeasibleDistortionError

_CHUNK = 1 << 20


def binary_entropy(x: float) -> float:
    if not 0 <= x <= 1:
        raise DomainError(f"binary entropy needs x in [0, 1], got {x}")
    if x in (0, 1):
        return 0.0
    return -x * log2(x) - (1 - x) * log2(1 - x)


def g_func(x: float, p: float) -> float:
    """h(x) - (1-p) h((x-p)/(1-p)) on [p, 1], and 0 beyond 1."""
    if not 0 < p < 1:
        raise DomainError(f"need 0 < p < 1, got {p}")
    if x < p:
        raise DomainError(f"g is defined for x >= p={p}, got {x}")
    if x >= 1:
        return 0.0
    return binary_entropy(x) - (1 - p) * binary_entropy((x - p) / (1 - p))


def ceo_rate(k: int, d_k: float, p: float) -> float:
    """Symmetric per-message rate (1 - d_k)/k + g(d_k^(1/k))."""
    if k < 1:
        raise DomainError("k must be >= 1")
    if not 0 < p < 1:
        raise DomainError(f"need 0 < p < 1, got {p}")
    if not d_k <= 1:
        raise DomainError(f"d_k must not exceed 1, got {d_k}")
    if d_k < p**k:
        raise InfeasibleDistortionError(f"d_k={d_k} is below the floor p^k={p**k}")
    # p^k <= d_k keeps d_k^(1/k) >= p up to rounding
    return (1 - d_k) / k + g_func(max(d_k ** (1 / k), p), p)


def tradeoff_bound(d_k: float, k: int, ell: int) -> float:
    """Lower bound d_k^(ell/k) on the ell-message distortion, ell >= k."""
    if k < 1 or ell < k:
        raise DomainError(f"need ell >= k >= 1, got k={k}, ell={ell}")
    if not 0 <= d_k <= 1:
        raise DomainError(f"d_k must lie in [0, 1], got {d_k}")
    return d_k ** (ell / k)


@dataclass(frozen=True)
class CeoParams:
    """``blocklength`` source bits per trial; each message misses a bit with
    probability ``q_reveal``."""

    n: int
    k: int
    p: float
    q_reveal: float
    trials: int = 100_000
    seed: int = 0
    blocklength: int = 1

    def __post_init__(self):
        if not 1 <= self.k <= self.n:
            raise DomainError(f"need 1 <= k <= n, got n={self.n}, k={self.k}")
        if not 0 < self.p < 1:
            raise DomainError(f"need 0 < p < 1, got {self.p}")
        if not 0 <= self.q_reveal <= 1:
            raise DomainError(f"q_reveal must lie in [0, 1], got {self.q_reveal}")
        if self.trials < 1 or self.blocklength < 1:
            raise DomainError("trials and blocklength must be >= 1")


@dataclass(frozen=True)
class RevealEstimate:
    ell: int
    measured: float
    expected: float
    sigma: float
    bits: int

    @property
    def within_3sigma(self) -> bool:
        return abs(self.measured - self.expected) <= 3 * self.sigma


def simulate_reveal_scheme(cp: CeoParams, ell: int) -> RevealEstimate:
    """Fraction of source bits that none of ``ell`` messages reveals.

    ``sigma`` is the binomial standard deviation of the estimate under the
    model q^ell.
    """
    if not 1 <= ell <= cp.n:
        raise DomainError(f"ell must lie in [1, {cp.n}]")
    rng = np.random.default_rng(np.random.SeedSequence(cp.seed, spawn_key=(ell,)))
    total = cp.trials * cp.blocklength
    missed = 0
    done = 0
    while done < total:
        size = min(_CHUNK, total - done)
        misses = rng.random((ell, size)) < cp.q_reveal
        missed += int(np.count_nonzero(misses.all(axis=0)))
        done += size
    expected = cp.q_reveal**ell
    return RevealEstimate(ell, missed / total, expected, sqrt(expected * (1 - expected) / total), total)


@dataclass(frozen=True)
class GShapeReport:
    """Most negative slack of each grid check (>= -tol means it held)."""

    monotone: float
    convex: float
    points: int

    def passed(self, tol: float = 1e-9) -> bool:
        return self.monotone >= -tol and self.convex >= -tol


def check_g_shape(p: float, n: int, points: int = 1000, y_max: float = 1.5) -> GShapeReport:
    """g(., p) non-increasing on [p, 1]; y -> g(y^(1/n), p) convex on [p^n, y_max]."""
    xs = np.linspace(p, 1, points)
    gx = np.array([g_func(x, p) for x in xs])
    ys = np.linspace(p**n, y_max, points)
    gy = np.array([g_func(max(y ** (1 / n), p), p) for y in ys])
    return GShapeReport(
        monotone=float(np.min(gx[:-1] - gx[1:])),
        convex=float(np.min(gy[:-2] - 2 * gy[1:-1] + gy[2:])),
        points=points,
    )
