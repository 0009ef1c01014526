"""Channel simulation, intermediate-distortion sweeps and CSV reports."""

from __future__ import annotations

import csv
import io
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence, TextIO

import numpy as np

from .emdcodec import (
    ERASED,
    MdParams,
    all_subsets,
    as_fraction,
    closed_form_distortion,
    decode_batch,
    derive_params,
    encode_batch,
    generator_set_for,
    probe_sources,
    subset_erasures,
)
from .errors import ContradictionError, DomainError

CSV_HEADER = ("n", "k", "dk_num", "dk_den", "m", "subset", "dist_num", "dist_den", "pred_num", "pred_den", "match")


def subset_id(subset: Sequence[int] | None) -> str:
    """``"1-3-4"`` for an explicit subset, ``"all"`` for a max over every subset."""
    if subset is None:
        return "all"
    return "-".join(str(i) for i in subset) if subset else "none"


@dataclass(frozen=True)
class ReportRow:
    n: int
    k: int
    d_k: Fraction
    m: int
    subset: str
    distortion: Fraction | None  # None: a wrong symbol, i.e. infinite distortion
    predicted: Fraction

    @property
    def match(self) -> bool:
        return self.distortion == self.predicted

    def as_csv(self) -> tuple:
        d, r = self.d_k, self.predicted
        # infinite distortion is written as 1/0
        q = (1, 0) if self.distortion is None else (self.distortion.numerator, self.distortion.denominator)
        return (self.n, self.k, d.numerator, d.denominator, self.m, self.subset, *q, r.numerator, r.denominator, int(self.match))


@dataclass
class DistortionReport:
    rows: list[ReportRow] = field(default_factory=list)
    reception_counts: Counter = field(default_factory=Counter)

    @property
    def all_match(self) -> bool:
        return all(r.match for r in self.rows)

    def write_csv(self, out: TextIO) -> None:
        w = csv.writer(out, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for r in self.rows:
            w.writerow(r.as_csv())

    def to_csv(self) -> str:
        buf = io.StringIO()
        self.write_csv(buf)
        return buf.getvalue()


def _row(p: MdParams, subset, m: int, distortion: Fraction | None) -> ReportRow:
    return ReportRow(p.n, p.k, p.d_k, m, subset_id(subset), distortion, closed_form_distortion(p, m))


def _measure(p: MdParams, encoded, sources, subset: Sequence[int], gs) -> Fraction | None:
    """Worst erasure fraction over the batch, or None if any symbol is wrong."""
    try:
        erased = subset_erasures(p, encoded, sources, subset, gs)
    except ContradictionError:
        return None
    return Fraction(int(erased.max()), p.l)


def run_subset_sim(
    p: MdParams, loss: Iterable[int] | float, seed=0, trials: int = 100
) -> DistortionReport:
    """Encode random sources, drop descriptions, decode and compare with the closed form.

    ``loss`` is either an explicit set of received indices (one row, worst
    case over ``trials`` sources) or a per-description loss probability (one
    row per trial, with the reception-count histogram kept on the report).
    """
    if trials < 1:
        raise DomainError("trials must be >= 1")
    report = DistortionReport()
    gs = generator_set_for(p)
    if isinstance(loss, (int, float)) and not isinstance(loss, bool):
        prob = float(loss)
        if not 0 <= prob <= 1:
            raise DomainError(f"loss probability must lie in [0, 1], got {prob}")
        rng = np.random.default_rng(seed)
        for _ in range(trials):
            source = rng.integers(0, 2, (1, p.l), dtype=np.uint8)
            kept = rng.random(p.n) >= prob
            subset = tuple(int(i) + 1 for i in np.flatnonzero(kept))
            report.reception_counts[len(subset)] += 1
            if not subset:
                report.rows.append(_row(p, subset, 0, Fraction(1)))
                continue
            encoded = encode_batch(p, source, gs)
            report.rows.append(_row(p, subset, len(subset), _measure(p, encoded, source, subset, gs)))
        return report

    subset = tuple(sorted(int(i) for i in loss))
    if len(set(subset)) != len(subset) or any(not 1 <= i <= p.n for i in subset):
        raise DomainError(f"received indices {subset} must be distinct and lie in [1, {p.n}]")
    report.reception_counts[len(subset)] += trials
    if not subset:
        report.rows.append(_row(p, subset, 0, Fraction(1)))
        return report
    sources = probe_sources(p, trials, seed)
    encoded = encode_batch(p, sources, gs)
    report.rows.append(_row(p, subset, len(subset), _measure(p, encoded, sources, subset, gs)))
    return report


@dataclass(frozen=True)
class SweepSpec:
    n: int
    k_list: tuple[int, ...]
    d_k: Fraction = Fraction(0)
    trials: int = 100
    seed: int = 0
    out: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "d_k", as_fraction(self.d_k))
        object.__setattr__(self, "k_list", tuple(self.k_list))
        if not self.k_list or any(not 1 <= k <= self.n for k in self.k_list):
            raise DomainError(f"every k must lie in [1, {self.n}]")


def sweep_intermediate(s: SweepSpec) -> DistortionReport:
    """Worst-case distortion over every subset of each size, for each k."""
    report = DistortionReport()
    for k in s.k_list:
        p = derive_params(s.n, k, s.d_k, alpha=None)
        gs = generator_set_for(p)
        sources = probe_sources(p, s.trials, s.seed)
        encoded = encode_batch(p, sources, gs)
        for m in range(1, s.n + 1):
            measured = [_measure(p, encoded, sources, sub, gs) for sub in all_subsets(s.n, m)]
            worst = None if None in measured else max(measured)
            report.rows.append(_row(p, None, m, worst))
            report.reception_counts[m] += 1
    if s.out:
        with open(s.out, "w", newline="") as fh:
            report.write_csv(fh)
    return report


def reveal_sets(p: MdParams) -> list[set[int]]:
    """Source positions revealed by each description alone."""
    gs = generator_set_for(p)
    sources = probe_sources(p, 0, 0)[:1]
    encoded = encode_batch(p, sources, gs)
    out = []
    for i in range(1, p.n + 1):
        rec = decode_batch(p, [i], encoded[0][:, [i - 1]], encoded[1][:, [i - 1]], gs)
        out.append(set(np.flatnonzero(rec[0] != ERASED).tolist()))
    return out
