from math import log2, sqrt

import numpy as np
import pytest
from scipy import integrate
from scipy.optimize import minimize_scalar
from scipy.stats import norm

from erasure_md.emdcodec import MDS, UNCODED
from erasure_md.errors import ConfigurationError, DomainError
from erasure_md.gaussmd import (
    GaussParams,
    dequantize,
    layered_roundtrip,
    predicted_mse,
    quantize,
    scalar_rd_rate,
    theorem10_bound,
    vw_sum_rate_scalar,
)


def exact_quantizer_mse(bits, sigma2=1.0):
    """Expected squared error of the clipped mid-rise quantizer by quadrature."""
    sigma = sqrt(sigma2)
    edges = np.linspace(-4 * sigma, 4 * sigma, (1 << bits) + 1)
    mids = (edges[:-1] + edges[1:]) / 2
    lo = np.concatenate([[-np.inf], edges[1:-1]])
    hi = np.concatenate([edges[1:-1], [np.inf]])
    total = 0.0
    for a, b, c in zip(lo, hi, mids):
        total += integrate.quad(lambda x: (x - c) ** 2 * norm.pdf(x, scale=sigma), a, b)[0]
    return total


def test_rd_rate_values():
    assert scalar_rd_rate(0.25, 1.0) == pytest.approx(1.0)
    assert scalar_rd_rate(1.0, 1.0) == 0.0
    assert scalar_rd_rate(0.5, 2.0) == pytest.approx(1.0)
    with pytest.raises(DomainError):
        scalar_rd_rate(0.0, 1.0)
    with pytest.raises(DomainError):
        scalar_rd_rate(2.0, 1.0)


def test_quantizer_cells():
    idx = quantize([-10.0, -4.0, -0.01, 0.0, 3.99, 10.0], 3)
    assert idx.tolist() == [0, 0, 3, 4, 7, 7]
    np.testing.assert_allclose(dequantize([0, 3, 4, 7], 3), [-3.5, -0.5, 0.5, 3.5])
    with pytest.raises(DomainError):
        quantize([0.0], 0)


def test_measured_dq_matches_quadrature():
    r = layered_roundtrip(GaussParams(4, 2, samples=100_000), 4)
    assert r.d_q == pytest.approx(exact_quantizer_mse(3), rel=0.02)


def test_codec_alignment():
    assert GaussParams(4, 2).codec.regime == MDS and GaussParams(4, 2).codec.m == 3
    c = GaussParams(4, 4).codec
    assert c.regime == UNCODED and c.l == 12
    with pytest.raises(ConfigurationError):
        GaussParams(4, 2, bits_per_sample=4)
    with pytest.raises(ConfigurationError):
        GaussParams(4, 2, samples=99_999)  # not a multiple of 8 samples per block
    with pytest.raises(DomainError):
        GaussParams(4, 2, sigma2=0)


@pytest.mark.parametrize("m", [1, 2, 3, 4])
def test_uncoded_layering_matches_time_sharing(m):
    p = GaussParams(4, 4, samples=30_000)
    r = layered_roundtrip(p, m)
    # every subset reveals exactly m of the 4 sample streams
    expected = (m * r.d_q + (4 - m)) / 4
    assert r.predicted == pytest.approx(expected)
    assert r.mse_mean == pytest.approx(expected, rel=0.05)
    assert r.subsets == {1: 4, 2: 6, 3: 4, 4: 1}[m]


def test_mds_layering():
    p = GaussParams(4, 2, samples=30_000 - 30_000 % 8)
    one = layered_roundtrip(p, 1)
    assert one.predicted == pytest.approx((one.d_q + 3) / 4)
    assert one.mse_mean == pytest.approx(one.predicted, rel=0.05)
    for m in (2, 3, 4):
        r = layered_roundtrip(p, m)
        assert r.mse_worst == pytest.approx(r.d_q, abs=1e-15)
    assert predicted_mse(p, 4, 0.1) == pytest.approx(0.1)


def test_no_excess_rate_bound_values():
    assert theorem10_bound(4, 2, 0.1, 1.0) == pytest.approx(0.55)
    assert theorem10_bound(4, 4, 0.1, 1.0) == pytest.approx(0.1)
    assert theorem10_bound(3, 1, 0.25, 2.0) == pytest.approx(0.25 / 3 + 4 / 3)
    with pytest.raises(DomainError):
        theorem10_bound(4, 5, 0.1, 1.0)


@pytest.mark.parametrize("n,k,d_n", [(4, 2, 0.1), (5, 3, 0.05), (3, 1, 0.2), (6, 6, 0.3)])
def test_vw_at_boundary_equals_point_to_point(n, k, d_n):
    d_k = theorem10_bound(n, k, d_n, 1.0)
    assert vw_sum_rate_scalar(n, k, d_k, d_n) == pytest.approx(0.5 * log2(1 / d_n), abs=1e-6)


def test_vw_below_boundary_exceeds_point_to_point():
    v = vw_sum_rate_scalar(4, 2, 0.3, 0.1)
    assert v > 0.5 * log2(10) + 0.1

    def neg(t):
        lam = 10.0**t
        return -0.5 * (log2(1 + lam) + log2(0.1 + lam) - log2(0.1) - 2 * log2(0.3 + lam))

    oracle = minimize_scalar(neg, bounds=(-12, 12), method="bounded", options={"xatol": 1e-10})
    assert v == pytest.approx(-oracle.fun, abs=1e-8)


def test_vw_monotone_in_dk():
    grid = np.linspace(0.1, 0.55, 10)
    vals = [vw_sum_rate_scalar(4, 2, d, 0.1) for d in grid]
    assert all(a >= b - 1e-9 for a, b in zip(vals, vals[1:]))


def test_vw_monotone_in_dn():
    grid = np.linspace(0.02, 0.3, 10)
    vals = [vw_sum_rate_scalar(4, 2, 0.3, d) for d in grid]
    assert all(a >= b - 1e-9 for a, b in zip(vals, vals[1:]))


def test_vw_k_equals_n_is_point_to_point():
    for d in (0.05, 0.2, 0.7):
        assert vw_sum_rate_scalar(3, 3, d, d) == pytest.approx(0.5 * log2(1 / d), abs=1e-9)


def test_vw_rejects_bad_order():
    with pytest.raises(DomainError):
        vw_sum_rate_scalar(4, 2, 0.05, 0.1)
