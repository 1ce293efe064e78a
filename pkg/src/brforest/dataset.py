from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError


@dataclass(eq=False)
class Dataset:
    """Numeric design matrix, target vector and per-column metadata.

    ``kinds[j]`` is ``"numeric"`` or ``"binary"``; ``origins[j]`` names the raw
    column feature ``j`` came from. ``x_mean``/``x_std`` and
    ``y_mean``/``y_std`` map standardized values back to raw units
    (``raw = z * std + mean``); they are the identity for unstandardized data.
    """

    X: np.ndarray
    y: np.ndarray
    names: list[str]
    kinds: list[str] = None
    origins: list[str] = None
    x_mean: np.ndarray = None
    x_std: np.ndarray = None
    y_mean: float = 0.0
    y_std: float = 1.0
    target_name: str = "y"
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.X = np.ascontiguousarray(self.X, dtype=np.float64)
        self.y = np.ascontiguousarray(self.y, dtype=np.float64)
        if self.X.ndim != 2 or self.y.ndim != 1 or self.X.shape[0] != self.y.shape[0]:
            raise DomainError(f"shape mismatch: X {self.X.shape}, y {self.y.shape}")
        p = self.X.shape[1]
        if len(self.names) != p:
            raise DomainError("one name per feature column required")
        if self.kinds is None:
            self.kinds = ["numeric"] * p
        if self.origins is None:
            self.origins = list(self.names)
        if self.x_mean is None:
            self.x_mean = np.zeros(p)
        if self.x_std is None:
            self.x_std = np.ones(p)
        if not (np.all(np.isfinite(self.X)) and np.all(np.isfinite(self.y))):
            raise DomainError("dataset contains non-finite values")

    @property
    def n_rows(self) -> int:
        return self.X.shape[0]

    @property
    def n_features(self) -> int:
        return self.X.shape[1]

    def subset(self, rows) -> "Dataset":
        rows = np.asarray(rows)
        return Dataset(self.X[rows], self.y[rows], list(self.names), list(self.kinds),
                       list(self.origins), self.x_mean, self.x_std, self.y_mean, self.y_std,
                       self.target_name, dict(self.meta))

    def with_target(self, y) -> "Dataset":
        return Dataset(self.X, y, list(self.names), list(self.kinds), list(self.origins),
                       self.x_mean, self.x_std, self.y_mean, self.y_std, self.target_name,
                       dict(self.meta))

    def destandardize_y(self, y=None) -> np.ndarray:
        y = self.y if y is None else np.asarray(y, dtype=np.float64)
        return y * self.y_std + self.y_mean

    def to_csv(self, path) -> None:
        """Write features and target with a header row; floats round-trip exactly."""
        import csv

        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(list(self.names) + [self.target_name])
            for xi, yi in zip(self.X, self.y):
                writer.writerow([repr(float(v)) for v in xi] + [repr(float(yi))])
