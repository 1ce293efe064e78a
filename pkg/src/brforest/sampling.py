"""Seeded random streams and bootstrap sampling at arbitrary rates.

Every random stream in the package is a ``SeededRng`` keyed by a tuple of
non-negative integers. The key is hashed by numpy's ``SeedSequence`` and
drives a PCG64 generator, so a given key produces the same draws on every
platform and child streams never depend on the order in which they are
created.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError


@dataclass(frozen=True)
class SeededRng:
    """A PCG64 stream identified by ``key``.

    The stream is single-owner; hand other threads a ``child`` instead.
    """

    key: tuple[int, ...]
    generator: np.random.Generator = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not self.key or any(k < 0 for k in self.key):
            raise DomainError(f"rng key must be non-empty and non-negative, got {self.key}")
        bitgen = np.random.PCG64(np.random.SeedSequence(list(self.key)))
        object.__setattr__(self, "generator", np.random.Generator(bitgen))

    def child(self, *stream: int) -> "SeededRng":
        return SeededRng(self.key + tuple(int(s) for s in stream))

    def seed64(self) -> int:
        """A 64-bit integer summarising the key (does not consume draws)."""
        state = np.random.SeedSequence(list(self.key)).generate_state(1, np.uint64)
        return int(state[0])


def derive(seed: int, *stream: int) -> SeededRng:
    """Stream fully determined by ``(seed, *stream)``."""
    return SeededRng((int(seed),) + tuple(int(s) for s in stream))


def sample_size(n: int, rate: float) -> int:
    """``max(1, round(rate * n))`` with halves rounded up."""
    return max(1, math.floor(rate * n + 0.5))


@dataclass(frozen=True)
class BootstrapSpec:
    n: int
    rate: float

    def __post_init__(self):
        if self.n < 1:
            raise DomainError(f"n must be >= 1, got {self.n}")
        if not (self.rate > 0 and math.isfinite(self.rate)):
            raise DomainError(f"bootstrap rate must be positive and finite, got {self.rate}")

    @property
    def sample_size(self) -> int:
        return sample_size(self.n, self.rate)


def expected_distinct(n_rows: int, rate: float) -> float:
    """Expected number of distinct rows in a with-replacement sample of
    ``sample_size(n_rows, rate)`` draws from ``n_rows`` rows."""
    if n_rows < 1:
        raise DomainError(f"n_rows must be >= 1, got {n_rows}")
    if not rate > 0:
        raise DomainError(f"rate must be positive, got {rate}")
    s = sample_size(n_rows, rate)
    if n_rows == 1:
        return 1.0
    # N * (1 - (1 - 1/N)^s), written to stay accurate for large N
    return -n_rows * math.expm1(s * math.log1p(-1.0 / n_rows))


def expected_distinct_limit(rate: float) -> float:
    """Large-N limit of the expected distinct fraction, ``1 - exp(-rate)``."""
    if not rate > 0:
        raise DomainError(f"rate must be positive, got {rate}")
    return -math.expm1(-rate)


def oob_probability(n_rows: int, rate: float) -> float:
    """Probability that a given row is absent from one bootstrap sample."""
    return 1.0 - expected_distinct(n_rows, rate) / n_rows


def bootstrap_indices(spec: BootstrapSpec, rng: SeededRng) -> np.ndarray:
    """Draw ``spec.sample_size`` row indices uniformly with replacement."""
    return rng.generator.integers(0, spec.n, size=spec.sample_size, dtype=np.int64)


def bootstrap_counts(spec: BootstrapSpec, rng: SeededRng) -> np.ndarray:
    """Multiplicity of every row in one bootstrap sample."""
    return np.bincount(bootstrap_indices(spec, rng), minlength=spec.n)
