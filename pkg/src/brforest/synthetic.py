"""Synthetic regression data: 24 piecewise-constant regions, and pure noise.

Region datasets use three sub-streams of the seed: one for the region
levels, one for feature draws and one for noise. Levels depend on the
seed alone, so datasets generated with different ``sigma`` or ``draw``
share the same regression function, and ``draw`` gives independent
training and test samples from it.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .dataset import Dataset
from .errors import DomainError
from .sampling import derive

NUM1_INTERVALS = ((0.0, 3.0), (3.0, 6.0), (6.0, 9.0))
NUM2_INTERVALS = ((0.0, 5.0), (5.0, 10.0))
POINTS_PER_REGION = 15
LEVEL_RANGE = (0.0, 10.0)
PURE_NOISE_SIGMAS = (1.0, 2.0, 5.0, 10.0)
FEATURE_NAMES = ["cat1", "cat2", "num1", "num2"]

_LEVELS, _FEATURES, _NOISE = 0, 1, 2


@dataclass(frozen=True)
class RegionSpec:
    cat1: int
    cat2: int
    num1: tuple[float, float]
    num2: tuple[float, float]
    level: float

    def contains(self, x) -> bool:
        return (x[0] == self.cat1 and x[1] == self.cat2
                and self.num1[0] <= x[2] < self.num1[1]
                and self.num2[0] <= x[3] < self.num2[1])


@dataclass(frozen=True)
class RegionTruth:
    regions: tuple[RegionSpec, ...]

    @property
    def levels(self) -> np.ndarray:
        return np.array([r.level for r in self.regions])

    def region_index(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        i1 = np.clip(np.searchsorted([b for _, b in NUM1_INTERVALS], X[:, 2], side="right"), 0, 2)
        i2 = np.clip(np.searchsorted([b for _, b in NUM2_INTERVALS], X[:, 3], side="right"), 0, 1)
        return ((X[:, 0].astype(int) * 2 + X[:, 1].astype(int)) * 3 + i1) * 2 + i2

    def __call__(self, X) -> np.ndarray:
        """Noiseless regression function."""
        return self.levels[self.region_index(X)]


def region_truth(seed: int) -> RegionTruth:
    levels = derive(seed, _LEVELS).generator.uniform(*LEVEL_RANGE, size=24)
    specs = []
    combos = itertools.product((0, 1), (0, 1), NUM1_INTERVALS, NUM2_INTERVALS)
    for level, (c1, c2, i1, i2) in zip(levels, combos):
        specs.append(RegionSpec(c1, c2, i1, i2, float(level)))
    return RegionTruth(tuple(specs))


def gen_regions(sigma: float, seed: int, draw: int = 0,
                points_per_region: int = POINTS_PER_REGION) -> tuple[Dataset, RegionTruth]:
    """Region dataset: ``points_per_region`` rows per region, unstandardized.

    Numeric features are uniform on the half-open region interval.
    """
    if not sigma >= 0:
        raise DomainError(f"sigma must be >= 0, got {sigma}")
    truth = region_truth(seed)
    feat_rng = derive(seed, _FEATURES, draw).generator
    noise_rng = derive(seed, _NOISE, draw).generator
    k = points_per_region
    X = np.empty((24 * k, 4))
    y = np.empty(24 * k)
    for m, reg in enumerate(truth.regions):
        rows = slice(m * k, (m + 1) * k)
        X[rows, 0] = reg.cat1
        X[rows, 1] = reg.cat2
        X[rows, 2] = feat_rng.uniform(*reg.num1, size=k)
        X[rows, 3] = feat_rng.uniform(*reg.num2, size=k)
        y[rows] = reg.level + sigma * noise_rng.standard_normal(k)
    data = Dataset(X, y, list(FEATURE_NAMES), kinds=["binary", "binary", "numeric", "numeric"],
                   meta={"generator": "regions", "sigma": sigma, "seed": seed, "draw": draw})
    return data, truth


@dataclass(frozen=True)
class NoiseSpec:
    sigma: float = 1.0
    n: int = 1000
    x_range: tuple[float, float] = (0.0, 5.0)
    mu: float = 0.0

    def __post_init__(self):
        if not self.sigma >= 0:
            raise DomainError("sigma must be >= 0")
        if self.n < 1:
            raise DomainError("n must be >= 1")
        if not self.x_range[0] < self.x_range[1]:
            raise DomainError("x_range must be an increasing interval")


def gen_pure_noise(spec: NoiseSpec, seed: int, draw: int = 0) -> Dataset:
    """One uniform feature, target ``N(mu, sigma^2)`` independent of it."""
    x = derive(seed, _FEATURES, draw).generator.uniform(*spec.x_range, size=spec.n)
    y = spec.mu + spec.sigma * derive(seed, _NOISE, draw).generator.standard_normal(spec.n)
    return Dataset(x.reshape(-1, 1), y, ["x"],
                   meta={"generator": "pure_noise", "sigma": spec.sigma, "seed": seed, "draw": draw})


def pure_noise_oracle(sigma: float, mode: str) -> float:
    """Expected test MSE on pure noise of the mean predictor or of a
    predictor that returns one independent training response."""
    if not sigma >= 0:
        raise DomainError("sigma must be >= 0")
    if mode == "mean_predictor":
        return sigma ** 2
    if mode == "nearest_neighbor":
        return 2 * sigma ** 2
    raise DomainError(f"unknown mode {mode!r}")
