import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from brforest.errors import DomainError
from brforest.synthetic import (PURE_NOISE_SIGMAS, NoiseSpec, gen_pure_noise, gen_regions,
                                pure_noise_oracle, region_truth)


def test_regions_shape_and_noiseless_levels():
    data, truth = gen_regions(0.0, seed=4)
    assert data.X.shape == (360, 4)
    assert len(truth.regions) == 24 and len(set(truth.region_index(data.X))) == 24
    idx = truth.region_index(data.X)
    for m in range(24):
        assert np.all(data.y[idx == m] == truth.levels[m])
        assert np.sum(idx == m) == 15
    assert np.all((truth.levels >= 0) & (truth.levels < 10))


def test_regions_partition_feature_space():
    truth = region_truth(0)
    grid = [(c1, c2, a, b) for c1 in (0, 1) for c2 in (0, 1)
            for a in (0.0, 2.999, 3.0, 5.5, 6.0, 8.99) for b in (0.0, 4.99, 5.0, 9.99)]
    for x in grid:
        owners = [m for m, reg in enumerate(truth.regions) if reg.contains(x)]
        assert owners == [truth.region_index([x])[0]]


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 10 ** 6), sigma=st.floats(0, 10), draw=st.integers(0, 5))
def test_regions_invariants(seed, sigma, draw):
    data, truth = gen_regions(sigma, seed, draw=draw)
    again, _ = gen_regions(sigma, seed, draw=draw)
    assert data.X.tobytes() == again.X.tobytes() and data.y.tobytes() == again.y.tobytes()
    assert np.array_equal(truth.levels, gen_regions(sigma + 1.0, seed)[1].levels)
    # categorical coordinates and numeric ranges always match the region
    for m, reg in enumerate(truth.regions):
        rows = data.X[m * 15:(m + 1) * 15]
        assert all(reg.contains(x) for x in rows)


def test_regions_pooled_noise_variance():
    sigma, seeds = 2.0, 50
    variances = []
    for seed in range(seeds):
        data, truth = gen_regions(sigma, seed)
        idx = truth.region_index(data.X)
        variances += [data.y[idx == m].var(ddof=1) for m in range(24)]
    variances = np.array(variances)
    se = variances.std(ddof=1) / math.sqrt(len(variances))
    # each sample variance is sigma^2 * chi2(14) / 14, so its SD is sigma^2 * sqrt(2 / 14)
    assert se == pytest.approx(sigma ** 2 * math.sqrt(2 / 14) / math.sqrt(len(variances)), rel=0.15)
    assert abs(variances.mean() - sigma ** 2) < 3 * se


def test_negative_sigma():
    with pytest.raises(DomainError):
        gen_regions(-0.1, 0)
    with pytest.raises(DomainError):
        NoiseSpec(sigma=-1)
    with pytest.raises(DomainError):
        NoiseSpec(n=0)
    with pytest.raises(DomainError):
        pure_noise_oracle(-1, "mean_predictor")
    with pytest.raises(DomainError):
        pure_noise_oracle(1, "median")


def test_pure_noise():
    assert PURE_NOISE_SIGMAS == (1.0, 2.0, 5.0, 10.0)
    flat = gen_pure_noise(NoiseSpec(sigma=0.0, n=50, mu=3.0), seed=1)
    assert np.all(flat.y == 3.0)
    data = gen_pure_noise(NoiseSpec(sigma=1.0, n=1000), seed=2)
    assert data.X.shape == (1000, 1)
    assert data.X.min() >= 0 and data.X.max() < 5
    se = 1 / math.sqrt(2 * 999)
    assert abs(data.y.std(ddof=1) - 1) < 3 * se
    assert abs(np.corrcoef(data.X[:, 0], data.y)[0, 1]) < 3 / math.sqrt(1000)


def test_pure_noise_oracle_values():
    assert pure_noise_oracle(1, "mean_predictor") == 1
    assert pure_noise_oracle(0, "mean_predictor") == pure_noise_oracle(0, "nearest_neighbor") == 0
    assert pure_noise_oracle(5, "nearest_neighbor") == 50


def test_nearest_neighbour_oracle_by_simulation():
    # predicting with one independent training response costs 2 sigma^2
    sigma = 2.0
    rng = np.random.default_rng(0)
    err = (sigma * rng.standard_normal(100_000) - sigma * rng.standard_normal(100_000)) ** 2
    se = err.std() / math.sqrt(len(err))
    assert abs(err.mean() - pure_noise_oracle(sigma, "nearest_neighbor")) < 3 * se
