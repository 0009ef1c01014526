"""Multi-letter mutual information and numeric checks of the converse reductions.

All entropies are in bits with ``0 log 0 = 0``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import sqrt
from typing import Callable, Sequence

import numpy as np

from .errors import DomainError

NORMALIZATION_TOL = 1e-12
PROPERTY_TOL = 1e-9

COROLLARY2_ARGMIN = 0.5 + 1 / sqrt(12)


@dataclass(frozen=True)
class JointPmf:
    """Dense joint pmf of K discrete variables; axis i is variable i."""

    probs: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=float)
        if p.ndim < 1 or p.size == 0:
            raise DomainError("a joint pmf needs at least one variable")
        if np.any(p < 0) or not np.all(np.isfinite(p)):
            raise DomainError("probabilities must be finite and nonnegative")
        if abs(p.sum() - 1) > NORMALIZATION_TOL:
            raise DomainError(f"probabilities sum to {p.sum()!r}, not 1")
        p = p.copy()
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)

    @property
    def alphabet_sizes(self) -> tuple[int, ...]:
        return self.probs.shape

    @property
    def K(self) -> int:
        return self.probs.ndim

    def marginal(self, axes: Sequence[int]) -> np.ndarray:
        """Joint pmf of the listed variables, in the listed order."""
        axes = list(axes)
        drop = tuple(a for a in range(self.K) if a not in axes)
        kept = sorted(axes)
        m = self.probs.sum(axis=drop) if drop else self.probs
        return np.transpose(m, [kept.index(a) for a in axes])

    def permute(self, order: Sequence[int]) -> "JointPmf":
        return JointPmf(np.transpose(self.probs, list(order)))

    def map_coordinates(self, coords: Sequence[int], table, out_size: int) -> "JointPmf":
        """Replace the variables ``coords`` by ``f(coords)``.

        ``table`` lists ``f`` over the row-major product alphabet of ``coords``.
        The new variable sits at position ``min(coords)``; the others keep
        their relative order.
        """
        coords = list(coords)
        if len(set(coords)) != len(coords) or not coords:
            raise DomainError("coordinates must be distinct and nonempty")
        table = np.asarray(table, dtype=np.int64)
        inner = int(np.prod([self.probs.shape[c] for c in coords]))
        if table.shape != (inner,) or np.any((table < 0) | (table >= out_size)):
            raise DomainError(f"map table must have {inner} entries in [0, {out_size})")
        rest = [a for a in range(self.K) if a not in coords]
        moved = np.transpose(self.probs, coords + rest).reshape((inner,) + tuple(self.probs.shape[a] for a in rest))
        out = np.zeros((out_size,) + moved.shape[1:])
        np.add.at(out, table, moved)
        return JointPmf(np.moveaxis(out, 0, min(coords)))


def entropy(probs) -> float:
    p = np.asarray(probs, dtype=float).ravel()
    p = p[p > 0]
    return float(-(p * np.log2(p)).sum())


def multi_info(j: JointPmf) -> float:
    """Sum of marginal entropies minus the joint entropy, in bits."""
    if not isinstance(j, JointPmf):
        j = JointPmf(j)
    marginals = sum(entropy(j.marginal([i])) for i in range(j.K))
    return marginals - entropy(j.probs)


def random_joint(rng: np.random.Generator, sizes: Sequence[int]) -> JointPmf:
    """Normalized exponential weights, sometimes sparsified to force dependence."""
    w = rng.exponential(size=tuple(sizes)) ** rng.uniform(1, 4)
    if rng.random() < 0.3:
        w *= rng.random(w.shape) < 0.5
        if not w.any():
            w.flat[rng.integers(w.size)] = 1.0
    return JointPmf(w / w.sum())


def _random_map(rng: np.random.Generator, domain: int) -> tuple[np.ndarray, int]:
    out_size = int(rng.integers(1, 4))
    return rng.integers(0, out_size, domain), out_size


@dataclass
class PropertyReport:
    trials: int
    violations: dict[str, int] = field(default_factory=dict)
    worst_slack: dict[str, float] = field(default_factory=dict)

    def record(self, name: str, slack: float) -> None:
        """``slack`` is the amount by which the inequality holds (negative = broken)."""
        self.violations.setdefault(name, 0)
        self.worst_slack[name] = min(self.worst_slack.get(name, np.inf), slack)
        if slack < -PROPERTY_TOL:
            self.violations[name] += 1

    @property
    def passed(self) -> bool:
        return not any(self.violations.values())


def check_multi_info_properties(trials: int, seed=0) -> PropertyReport:
    """Nonnegativity, the chain inequality under a map of the first m variables,
    data processing, and permutation invariance on random small joints."""
    if trials < 1:
        raise DomainError("trials must be >= 1")
    rng = np.random.default_rng(seed)
    report = PropertyReport(trials)
    for _ in range(trials):
        K = int(rng.integers(1, 5))
        sizes = rng.integers(2, 4, K).tolist()
        j = random_joint(rng, sizes)
        ik = multi_info(j)
        report.record("nonnegativity", ik)

        perm = rng.permutation(K)
        report.record("permutation", PROPERTY_TOL - abs(multi_info(j.permute(perm)) - ik))

        m = int(rng.integers(1, K + 1))
        table, out = _random_map(rng, int(np.prod(sizes[:m])))
        head = JointPmf(j.marginal(range(m)))
        mapped = j.map_coordinates(range(m), table, out)
        report.record("chain", ik - (multi_info(head) + multi_info(mapped)))

        c = int(rng.integers(K))
        table, out = _random_map(rng, sizes[c])
        report.record("data_processing", ik - multi_info(j.map_coordinates([c], table, out)))
    return report


# Closed-form converse bounds


def lemma2_precondition(n: int, k: int) -> bool:
    """Exact test of (1 - 1/n)^k <= 1/2."""
    return 2 * (n - 1) ** k <= n**k


def lemma_bound_eval(which: str, **args) -> float:
    """Closed-form bounds: ``lemma2(n, k)``, ``lemma3(p)``, ``lemma5(n)``."""
    if which == "lemma2":
        n, k = args["n"], args["k"]
        if not (isinstance(n, int) and isinstance(k, int)) or n < 1 or k < 1:
            raise DomainError("lemma2 needs positive integers n, k")
        if not lemma2_precondition(n, k):
            raise DomainError(f"(1 - 1/{n})^{k} exceeds 1/2")
        value = n * 0.5 ** (1 / k)
        if value < n - 1 - 1e-12:
            raise ArithmeticError(f"n (1/2)^(1/k) = {value} < n - 1 for n={n}, k={k}")
        return value
    if which == "lemma3":
        p = args["p"]
        if not 0.5 < p <= 1:
            raise DomainError("lemma3 needs p in (1/2, 1]")
        return 0.5 + p * (1 - p) / (2 * p - 1)
    if which == "lemma5":
        n = args["n"]
        if not isinstance(n, int) or n < 1:
            raise DomainError("lemma5 needs an integer n >= 1")
        return 1 - 2 / n
    raise DomainError(f"unknown bound {which!r}")


def corollary2_objective(x: float) -> float:
    """2 max(x, 1/2 + x(1-x)/(2x-1)) + x + 1/(2x) on [1/sqrt(2), 1]."""
    if not 1 / sqrt(2) - 1e-15 <= x <= 1:
        raise DomainError("x must lie in [1/sqrt(2), 1]")
    return 2 * max(x, lemma_bound_eval("lemma3", p=x)) + x + 1 / (2 * x)


def golden_section(f: Callable[[float], float], a: float, b: float, tol: float = 1e-12) -> float:
    """Minimizer of a unimodal ``f`` on [a, b]."""
    inv_phi = (sqrt(5) - 1) / 2
    c, d = b - inv_phi * (b - a), a + inv_phi * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - inv_phi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + inv_phi * (b - a)
            fd = f(d)
    return (a + b) / 2


@dataclass(frozen=True)
class SearchResult:
    minimum: float
    argmin: tuple[float, ...]
    bound: float
    margin: float
    samples: int = 0


def _corollary2_search(grid: int = 10_001) -> SearchResult:
    lo, hi = 1 / sqrt(2), 1.0
    xs = np.linspace(lo, hi, grid)
    vals = np.array([corollary2_objective(x) for x in xs])
    best = int(vals.argmin())
    a, b = xs[max(best - 1, 0)], xs[min(best + 1, grid - 1)]
    x = golden_section(corollary2_objective, float(a), float(b))
    value = corollary2_objective(x)
    return SearchResult(value, (x,), 3.0, value - 3.0, grid)


def _superset_mobius(moments: np.ndarray, n: int) -> np.ndarray:
    """pmf of the exact 1-set from the joint moments m[T] = P(all of T are 1).

    Both arrays are indexed by bitmask over ``n`` variables along the last axis.
    """
    out = moments.copy()
    for i in range(n):
        bit = 1 << i
        lower = np.array([s for s in range(1 << n) if not s & bit])
        out[..., lower] -= out[..., lower | bit]
    return out


def _one_sign_batch(rng: np.random.Generator, n: int, size: int) -> tuple[np.ndarray, np.ndarray]:
    """Random pairwise-independent indicator laws of 'coordinate reveals'.

    Returns (a, pmf): reveal probabilities (size, n) and pmfs over bitmasks
    (size, 2^n), the latter possibly infeasible (negative entries).
    """
    a = rng.uniform(0, 0.5, (size, n)) * (rng.random((size, n)) < 0.85)
    masks = np.arange(1 << n)
    popcount = np.array([bin(s).count("1") for s in masks])
    m = np.ones((size, 1 << n))
    for s in masks[popcount >= 1]:
        members = [i for i in range(n) if s >> i & 1]
        if len(members) <= 2:
            m[:, s] = np.prod(a[:, members], axis=1)
        else:
            cap = np.min([m[:, s & ~(1 << i)] for i in members], axis=0)
            m[:, s] = rng.uniform(0, 1, size) * cap
    return a, _superset_mobius(m, n)


def lemma1_single_letter_search(n: int, samples: int = 100_000, seed=0, batch: int = 20_000) -> SearchResult:
    """Minimize the expected number of erasures over pairwise-independent
    erased versions of a fair bit, by sampling feasible laws exactly.

    Consistency leaves four shapes: every revealing coordinate shows the same
    sign; one coordinate shows both signs and the rest are always erased; or
    all are always erased. Within the same-sign shape the reveal indicators
    are built from their joint moments with the pairwise ones pinned to
    products, and a draw is feasible when the pmf is nonnegative and at most
    half the mass reveals anything.
    """
    if n < 2:
        raise DomainError("need n >= 2")
    rng = np.random.default_rng(seed)
    best, arg, found = np.inf, None, 0
    pair_bits = [(i, j) for i in range(n) for j in range(i + 1, n)]
    while found < samples:
        shape = rng.choice(3, p=[0.8, 0.15, 0.05])
        if shape == 0:
            a, pmf = _one_sign_batch(rng, n, batch)
            ok = np.all(pmf >= -1e-15, axis=1) & (pmf[:, 0] >= 0.5)
            a, pmf = a[ok], pmf[ok]
            for i, j in pair_bits:
                both = pmf[:, [s for s in range(1 << n) if s >> i & 1 and s >> j & 1]].sum(axis=1)
                if np.any(np.abs(both - a[:, i] * a[:, j]) > 1e-12):
                    raise ArithmeticError("sampled law is not pairwise independent")
            zero_prob = 1 - a
        elif shape == 1:
            # one coordinate reveals +/- with probabilities <= 1/2 each
            plus, minus = rng.uniform(0, 0.5, (2, batch))
            zero_prob = np.ones((batch, n))
            zero_prob[:, 0] = 1 - plus - minus
        else:
            zero_prob = np.ones((batch, n))
        objective = zero_prob.sum(axis=1)
        take = min(len(objective), samples - found)
        objective, zero_prob = objective[:take], zero_prob[:take]
        found += take
        if take and objective.min() < best:
            idx = int(objective.argmin())
            best, arg = float(objective[idx]), tuple(float(v) for v in zero_prob[idx])
    return SearchResult(best, arg, float(n - 1), best - (n - 1), found)


def converse_min_search(which: str, trials: int = 100_000, seed=0, n: int = 4) -> SearchResult:
    """``corollary2`` (grid of ``trials`` points plus golden section) or
    ``lemma1_single_letter`` (``trials`` feasible samples for ``n`` variables)."""
    if trials < 1:
        raise DomainError("trials must be >= 1")
    if which == "corollary2":
        return _corollary2_search(max(trials, 3))
    if which == "lemma1_single_letter":
        return lemma1_single_letter_search(n, trials, seed)
    raise DomainError(f"unknown search {which!r}")


def lemma2_table(max_n: int = 64) -> list[tuple[int, int, float]]:
    """``(n, k, n (1/2)^(1/k))`` for every k <= n <= max_n meeting the precondition."""
    return [
        (n, k, lemma_bound_eval("lemma2", n=n, k=k))
        for n in range(1, max_n + 1)
        for k in range(1, n + 1)
        if lemma2_precondition(n, k)
    ]
