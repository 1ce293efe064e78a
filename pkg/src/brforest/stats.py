"""Paired t-test, Mann-Whitney U, Cohen's d and Spearman correlation.

The Student-t CDF goes through an in-house regularized incomplete beta
function (modified Lentz continued fraction, absolute error below 1e-10).
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.stats import rankdata

from .errors import DomainError

_FPMIN = 1e-300
_EPS = 1e-15
_MAXITER = 10_000


def _betacf(a: float, b: float, x: float) -> float:
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _FPMIN:
        d = _FPMIN
    d = 1.0 / d
    h = d
    for m in range(1, _MAXITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _FPMIN:
            d = _FPMIN
        c = 1.0 + aa / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _FPMIN:
            d = _FPMIN
        c = 1.0 + aa / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            return h
    raise ArithmeticError(f"incomplete beta continued fraction did not converge (a={a}, b={b}, x={x})")


def betainc(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta ``I_x(a, b)``."""
    if a <= 0 or b <= 0:
        raise DomainError("betainc needs a, b > 0")
    if not 0.0 <= x <= 1.0:
        raise DomainError("betainc needs 0 <= x <= 1")
    if x == 0.0 or x == 1.0:
        return x
    log_front = (math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
                 + a * math.log(x) + b * math.log1p(-x))
    front = math.exp(log_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def student_t_cdf(t: float, df: float) -> float:
    if df <= 0:
        raise DomainError("degrees of freedom must be positive")
    if math.isinf(t):
        return 1.0 if t > 0 else 0.0
    tail = 0.5 * betainc(df / 2.0, 0.5, df / (df + t * t))
    return tail if t < 0 else 1.0 - tail


def normal_cdf(z: float) -> float:
    return 0.5 * math.erfc(-z / math.sqrt(2.0))


@dataclass(frozen=True)
class TestResult:
    statistic: float
    p_value: float
    method: str
    degenerate: bool = False

    __test__ = False  # keep pytest from collecting this class


def _pvalue(p: float) -> float:
    return min(1.0, max(0.0, p))


def paired_t_one_sided(a: Sequence[float], b: Sequence[float], alternative: str = "less") -> TestResult:
    """One-sided paired t-test on ``d = a - b``.

    ``alternative="less"`` tests whether ``a`` is smaller than ``b`` on
    average; ``"greater"`` the reverse.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise DomainError("paired samples must be 1-D and of equal length")
    n = len(a)
    if n < 2:
        raise DomainError("need at least 2 pairs")
    if alternative not in ("less", "greater"):
        raise DomainError(f"unknown alternative {alternative!r}")
    d = a - b
    if alternative == "greater":
        d = -d
    mean = float(d.mean())
    sd = float(d.std(ddof=1))
    if sd == 0.0:
        if mean == 0.0:
            return TestResult(0.0, 0.5, "t", degenerate=True)
        return TestResult(math.copysign(math.inf, mean), 0.0 if mean < 0 else 1.0, "t",
                          degenerate=True)
    t = mean / (sd / math.sqrt(n))
    stat = t if alternative == "less" else -t
    return TestResult(stat, _pvalue(student_t_cdf(t, n - 1)), "t")


def _exact_u_distribution(n1: int, n2: int) -> np.ndarray:
    """Counts of every U value over all rank assignments (no ties)."""
    counts = np.zeros(n1 * n2 + 1, dtype=np.int64)
    offset = n1 * (n1 + 1) // 2
    for pos in itertools.combinations(range(1, n1 + n2 + 1), n1):
        counts[sum(pos) - offset] += 1
    return counts


def mann_whitney_u(a: Sequence[float], b: Sequence[float], alternative: str = "two-sided",
                   exact_max_n: int = 12) -> TestResult:
    """Mann-Whitney U test; the statistic is U of ``a``.

    ``"less"`` tests whether ``a`` tends to be smaller than ``b``. The null
    distribution is enumerated when the pooled size is at most
    ``exact_max_n`` and there are no ties; otherwise a tie-corrected normal
    approximation with continuity correction is used.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    n1, n2 = len(a), len(b)
    if n1 == 0 or n2 == 0:
        raise DomainError("both groups must be non-empty")
    if alternative not in ("two-sided", "less", "greater"):
        raise DomainError(f"unknown alternative {alternative!r}")
    pooled = np.concatenate([a, b])
    ranks = rankdata(pooled)
    u = float(ranks[:n1].sum() - n1 * (n1 + 1) / 2.0)
    n = n1 + n2
    _, tie_counts = np.unique(pooled, return_counts=True)
    has_ties = bool(np.any(tie_counts > 1))

    if n <= exact_max_n and not has_ties:
        counts = _exact_u_distribution(n1, n2)
        total = counts.sum()
        k = int(round(u))
        p_less = counts[: k + 1].sum() / total
        p_greater = counts[k:].sum() / total
        if alternative == "less":
            p = p_less
        elif alternative == "greater":
            p = p_greater
        else:
            p = 2.0 * min(p_less, p_greater)
        return TestResult(u, _pvalue(p), "exact")

    mu = n1 * n2 / 2.0
    tie_term = float(np.sum(tie_counts ** 3 - tie_counts)) / (n * (n - 1)) if n > 1 else 0.0
    var = n1 * n2 / 12.0 * ((n + 1) - tie_term)
    if var <= 0:
        return TestResult(u, 1.0 if alternative == "two-sided" else 0.5, "normal", degenerate=True)
    sd = math.sqrt(var)
    if alternative == "less":
        p = normal_cdf((u - mu + 0.5) / sd)
    elif alternative == "greater":
        p = 1.0 - normal_cdf((u - mu - 0.5) / sd)
    else:
        z = max(abs(u - mu) - 0.5, 0.0) / sd
        p = 2.0 * (1.0 - normal_cdf(z))
    return TestResult(u, _pvalue(p), "normal")


def cohens_d(a: Sequence[float], b: Sequence[float]) -> float | None:
    """Standardized mean difference with pooled sample SD; None when the
    pooled SD is zero."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    n1, n2 = len(a), len(b)
    if n1 < 2 or n2 < 2:
        raise DomainError("each group needs at least 2 values")
    pooled = math.sqrt(((n1 - 1) * a.var(ddof=1) + (n2 - 1) * b.var(ddof=1)) / (n1 + n2 - 2))
    if pooled == 0.0:
        return None
    return float((a.mean() - b.mean()) / pooled)


def spearman(x: Sequence[float], y: Sequence[float]) -> TestResult | None:
    """Spearman rank correlation with a two-sided t-based p-value; None
    when either input is constant."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise DomainError("x and y must be 1-D and of equal length")
    n = len(x)
    if n < 3:
        raise DomainError("need at least 3 observations")
    rx = rankdata(x) - (n + 1) / 2.0
    ry = rankdata(y) - (n + 1) / 2.0
    denom = math.sqrt(float(rx @ rx) * float(ry @ ry))
    if denom == 0.0:
        return None
    rho = max(-1.0, min(1.0, float(rx @ ry) / denom))
    if abs(rho) == 1.0:
        return TestResult(rho, 0.0, "t")
    t = rho * math.sqrt((n - 2) / (1.0 - rho * rho))
    p = 2.0 * student_t_cdf(-abs(t), n - 2)
    return TestResult(rho, _pvalue(p), "t")
