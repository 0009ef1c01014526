from fractions import Fraction

import numpy as np
import pytest

from erasure_md.emdcodec import derive_params, encode_batch, generator_set_for, probe_sources, subset_erasures
from erasure_md.errors import DomainError
from erasure_md.sim import (
    CSV_HEADER,
    ReportRow,
    SweepSpec,
    reveal_sets,
    run_subset_sim,
    subset_id,
    sweep_intermediate,
)

F = Fraction
P = derive_params(4, 2, F(1, 4))


def test_subset_ids():
    assert subset_id((1, 3, 4)) == "1-3-4"
    assert subset_id(()) == "none"
    assert subset_id(None) == "all"


@pytest.mark.parametrize("subset,expected", [([1], F(3, 4)), ([2, 3], F(1, 4)), ([1, 2, 4], F(1, 8)), ([4, 3, 2, 1], 0)])
def test_explicit_subsets(subset, expected):
    r = run_subset_sim(P, subset, seed=0, trials=50)
    (row,) = r.rows
    assert row.distortion == expected and row.match
    assert r.reception_counts[len(subset)] == 50


def test_empty_subset_is_full_distortion():
    (row,) = run_subset_sim(P, [], trials=5).rows
    assert row.distortion == 1 and row.subset == "none" and row.match


def test_loss_probability_extremes():
    none_lost = run_subset_sim(P, 0.0, trials=10)
    assert none_lost.reception_counts == {4: 10}
    assert all(r.distortion == 0 for r in none_lost.rows)
    all_lost = run_subset_sim(P, 1.0, trials=10)
    assert all(r.subset == "none" and r.distortion == 1 for r in all_lost.rows)


def test_loss_probability_rows_match():
    r = run_subset_sim(P, 0.5, seed=3, trials=40)
    assert len(r.rows) == 40 and r.all_match
    assert sum(r.reception_counts.values()) == 40


def test_bad_loss_inputs():
    with pytest.raises(DomainError):
        run_subset_sim(P, [1, 1])
    with pytest.raises(DomainError):
        run_subset_sim(P, [5])
    with pytest.raises(DomainError):
        run_subset_sim(P, 1.5)
    with pytest.raises(DomainError):
        run_subset_sim(P, [1], trials=0)


def test_infinite_distortion_csv():
    row = ReportRow(4, 2, F(1, 4), 2, "1-2", None, F(1, 4))
    assert not row.match
    assert row.as_csv()[6:8] == (1, 0)


def test_sweep_n10_k3():
    r = sweep_intermediate(SweepSpec(10, [3], trials=20))
    assert [row.distortion for row in r.rows] == [F(9, 10), F(8, 10)] + [0] * 8
    assert r.all_match


def test_sweep_extremes():
    k1 = sweep_intermediate(SweepSpec(5, [1], trials=10))
    assert all(row.distortion == 0 for row in k1.rows)
    kn = sweep_intermediate(SweepSpec(5, [5], trials=10))
    assert [row.distortion for row in kn.rows] == [1 - F(m, 5) for m in range(1, 6)]


def test_sweep_csv_deterministic(tmp_path):
    spec = SweepSpec(6, (2, 3), F(1, 8), trials=10, seed=4, out=str(tmp_path / "a.csv"))
    first = sweep_intermediate(spec)
    again = sweep_intermediate(SweepSpec(6, (2, 3), F(1, 8), trials=10, seed=4, out=str(tmp_path / "b.csv")))
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
    text = first.to_csv()
    assert text.splitlines()[0] == ",".join(CSV_HEADER)
    assert len(text.splitlines()) == 1 + 2 * 6


def test_sweep_rejects_bad_k():
    with pytest.raises(DomainError):
        SweepSpec(4, [0])
    with pytest.raises(DomainError):
        SweepSpec(4, [])


def test_reveal_sets_disjoint():
    sets = reveal_sets(P)
    assert [len(s) for s in sets] == [12] * 4
    assert len(set().union(*sets)) == 48


def test_sweep_curve_up_to_n16_sampled_subsets():
    rng = np.random.default_rng(0)
    for n in range(11, 17):
        for k in range(1, n + 1):
            p = derive_params(n, k, 0, alpha=None)
            gs = generator_set_for(p)
            sources = probe_sources(p, 5, 0)
            encoded = encode_batch(p, sources, gs)
            for m in range(1, n + 1):
                expected = 1 - F(m, n) if m < k else 0
                for _ in range(4):
                    sub = tuple(sorted(rng.choice(n, m, replace=False) + 1))
                    erased = subset_erasures(p, encoded, sources, sub, gs)
                    assert F(int(erased.max()), p.l) == expected, (n, k, sub)
