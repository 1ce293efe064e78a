"""Dataset-level and model-level descriptors of a regression problem.

Estimator choices, none of them canonical:

* mutual information: plug-in estimate on equal-frequency bins (10 bins;
  columns with at most two distinct values keep their levels), in nats;
* HSIC: biased V-statistic ``trace(K H L H) / n**2`` with the median
  pairwise distance as bandwidth;
* kNN target variance: Euclidean neighbours in the (standardized) feature
  space, self excluded, ties broken by row index;
* SNR: ``Var(oob prediction) / Var(oob residual)``.
"""
from __future__ import annotations

import warnings
from dataclasses import asdict, dataclass

import numpy as np
from scipy.spatial.distance import cdist, pdist
from scipy.stats import rankdata

from .dataset import Dataset
from .errors import DomainError
from .forest import ForestConfig, fit_forest, oob_predictions, oob_r2, preset
from .sampling import derive

SNR_DEFINITION = "artifact convention: Var(OOB predictions) / Var(OOB residuals)"
HSIC_MAX_ROWS = 2000


def discretize(values, bins: int = 10) -> np.ndarray:
    """Equal-frequency bin codes; tied values always share a bin."""
    values = np.asarray(values, dtype=np.float64)
    distinct, inverse = np.unique(values, return_inverse=True)
    if len(distinct) <= 2:
        return inverse
    ranks = rankdata(values, method="min") - 1
    return np.floor(ranks * bins / len(values)).astype(np.int64)


def plugin_mutual_information(a_codes, b_codes) -> float:
    a_codes = np.unique(a_codes, return_inverse=True)[1]
    b_codes = np.unique(b_codes, return_inverse=True)[1]
    n = len(a_codes)
    joint = np.zeros((a_codes.max() + 1, b_codes.max() + 1))
    np.add.at(joint, (a_codes, b_codes), 1.0)
    joint /= n
    pa = joint.sum(axis=1, keepdims=True)
    pb = joint.sum(axis=0, keepdims=True)
    nz = joint > 0
    mi = float(np.sum(joint[nz] * np.log(joint[nz] / (pa @ pb)[nz])))
    return max(mi, 0.0)


def mutual_info_sum(data: Dataset, bins: int = 10) -> float:
    if data.n_rows < 20:
        raise DomainError("mutual information needs at least 20 rows")
    y_codes = discretize(data.y, bins)
    return sum(plugin_mutual_information(discretize(col, bins), y_codes) for col in data.X.T)


def knn_target_variance(data: Dataset, k: int = 10, chunk: int = 256) -> float:
    """Mean over rows of the population variance of the targets of the row's
    ``k`` nearest other rows."""
    n = data.n_rows
    if n <= k:
        raise DomainError(f"need more than k={k} rows")
    X, y = data.X, data.y
    total = 0.0
    for lo in range(0, n, chunk):
        hi = min(n, lo + chunk)
        d = cdist(X[lo:hi], X)
        d[np.arange(hi - lo), np.arange(lo, hi)] = np.inf
        kth = np.partition(d, k - 1, axis=1)[:, k - 1]
        for i in range(hi - lo):
            cand = np.flatnonzero(d[i] <= kth[i])
            # candidates come out in index order, so a stable sort breaks ties by index
            nbrs = cand[np.argsort(d[i, cand], kind="stable")[:k]]
            total += float(np.var(y[nbrs]))
    return total / n


def _bandwidth(Z, metric: str) -> float:
    dist = pdist(Z, metric=metric)
    gamma = float(np.median(dist)) if dist.size else 0.0
    if gamma == 0.0 and np.any(dist > 0):
        gamma = float(np.median(dist[dist > 0]))
    return gamma


def _kernel(Z, kind: str) -> np.ndarray | None:
    if kind == "linear":
        return Z @ Z.T
    metric = "sqeuclidean" if kind == "rbf" else "cityblock"
    gamma = _bandwidth(Z, "euclidean" if kind == "rbf" else "cityblock")
    if gamma == 0.0:
        return None
    D = cdist(Z, Z, metric=metric)
    if kind == "rbf":
        return np.exp(-D / (2 * gamma ** 2))
    return np.exp(-D / gamma)


def _centered(M: np.ndarray) -> np.ndarray:
    return M - M.mean(axis=0) - M.mean(axis=1, keepdims=True) + M.mean()


def hsic_from_kernels(K: np.ndarray, L: np.ndarray) -> float:
    """``trace(K H L H) / n**2`` for precomputed kernel matrices."""
    n = K.shape[0]
    return float(np.sum(_centered(K) * L)) / n ** 2


def hsic(data: Dataset, kernel: str = "rbf", max_rows: int = HSIC_MAX_ROWS, seed: int = 0) -> float:
    """Biased HSIC between feature vectors and target.

    Kernel matrices are quadratic in the row count, so for RBF and Laplace
    kernels at most ``max_rows`` rows (a seeded random subset) are used.
    """
    if kernel not in ("linear", "rbf", "laplace"):
        raise DomainError(f"unknown kernel {kernel!r}")
    n = data.n_rows
    if n < 5:
        raise DomainError("HSIC needs at least 5 rows")
    X, y = data.X, data.y.reshape(-1, 1)
    if np.all(y == y[0]):
        return 0.0
    if np.all(X == X[0]):
        warnings.warn("all feature rows identical; HSIC is 0", stacklevel=2)
        return 0.0
    if kernel == "linear":
        Xc = X - X.mean(axis=0)
        yc = y[:, 0] - y.mean()
        v = Xc.T @ yc
        return float(v @ v) / n ** 2
    if n > max_rows:
        rows = np.sort(derive(seed).generator.choice(n, size=max_rows, replace=False))
        X, y, n = X[rows], y[rows], max_rows
    K = _kernel(X, kernel)
    L = _kernel(y, kernel)
    if K is None or L is None:
        warnings.warn("degenerate kernel bandwidth; HSIC is 0", stacklevel=2)
        return 0.0
    return hsic_from_kernels(K, L)


def high_corr_count(data: Dataset, threshold: float = 0.9) -> int:
    if data.n_rows < 3:
        return 0
    yc = data.y - data.y.mean()
    Xc = data.X - data.X.mean(axis=0)
    sx = np.sqrt(np.sum(Xc ** 2, axis=0))
    sy = np.sqrt(np.sum(yc ** 2))
    if sy == 0:
        return 0
    ok = sx > 0
    r = (Xc[:, ok].T @ yc) / (sx[ok] * sy)
    return int(np.sum(np.abs(r) > threshold))


def adjusted_r2(r2: float, n: int, p: int) -> float | None:
    if n <= p + 1:
        return None
    return 1.0 - (1.0 - r2) * (n - 1) / (n - p - 1)


@dataclass(frozen=True)
class R2Suite:
    oob_r2: float | None
    full_r2: float | None
    adjusted_r2: float | None
    snr: float | None
    oob_coverage: float


def r2_suite(data: Dataset, config: ForestConfig | None = None, threads: int = 1) -> R2Suite:
    """Fit the baseline forest (bootstrap rate 1.0 unless ``config`` says
    otherwise) and report OOB R^2, training R^2, adjusted R^2 and SNR."""
    config = config or preset("RF[100]", 1.0)
    forest = fit_forest(data, config, threads=threads)
    score = oob_r2(forest, data)
    y = data.y
    sst = float(np.sum((y - y.mean()) ** 2))
    full = None
    if sst > 0:
        full = 1.0 - float(np.sum((y - forest.predict(data.X)) ** 2)) / sst
    adj = adjusted_r2(full, data.n_rows, data.n_features) if full is not None else None
    oob = oob_predictions(forest, data, warn=False)
    snr = None
    mask = oob.covered
    if mask.sum() >= 2:
        resid_var = float(np.var(y[mask] - oob.values[mask]))
        if resid_var > 0:
            snr = float(np.var(oob.values[mask])) / resid_var
    return R2Suite(score.r2, full, adj, snr, score.coverage)


@dataclass(frozen=True)
class CharacteristicsReport:
    mutual_info_sum: float
    knn_target_variance: float
    hsic_linear: float
    hsic_rbf: float
    hsic_laplace: float
    high_corr_count: int
    oob_r2: float | None
    full_r2: float | None
    adjusted_r2: float | None
    snr: float | None

    def to_dict(self) -> dict:
        d = asdict(self)
        d["snr_definition"] = SNR_DEFINITION
        return d


def characterize(data: Dataset, seed: int = 0, threads: int = 1) -> CharacteristicsReport:
    r2 = r2_suite(data, preset("RF[100]", 1.0, seed), threads=threads)
    return CharacteristicsReport(
        mutual_info_sum=mutual_info_sum(data),
        knn_target_variance=knn_target_variance(data),
        hsic_linear=hsic(data, "linear"),
        hsic_rbf=hsic(data, "rbf", seed=seed),
        hsic_laplace=hsic(data, "laplace", seed=seed),
        high_corr_count=high_corr_count(data),
        oob_r2=r2.oob_r2,
        full_r2=r2.full_r2,
        adjusted_r2=r2.adjusted_r2,
        snr=r2.snr,
    )
