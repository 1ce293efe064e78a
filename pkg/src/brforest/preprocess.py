"""CSV ingestion and the cleaning / encoding / standardization pipeline.

Pipeline order (each step sees the output of the previous one):

1. drop exact duplicate rows (raw cell strings compared);
2. drop columns with at most one distinct non-missing value;
3. drop rows whose target is missing;
4. impute missing numeric cells with the column mean;
5. replace missing categorical cells with ``__missing__``;
6. one-hot encode categoricals: two-level columns keep one indicator
   (first sorted level dropped), others get one indicator per level;
7. z-score numeric features and the target (population std).

Standardization uses statistics of the whole table, before any
train/test split.
"""
from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .dataset import Dataset
from .errors import DomainError

log = logging.getLogger(__name__)

MISSING_TOKENS = frozenset({"", "na", "nan", "n/a", "null", "none", "?"})
PLACEHOLDER = "__missing__"
KINDS = ("numeric", "categorical", "binary")


def is_missing(cell: str) -> bool:
    return cell.strip().lower() in MISSING_TOKENS


def _parse_float(cell: str) -> float | None:
    try:
        v = float(cell)
    except ValueError:
        return None
    return v if math.isfinite(v) else None


@dataclass
class RawTable:
    """Rectangular table of raw cell strings.

    ``kinds`` maps column name to ``numeric``, ``categorical`` or ``binary``
    (an already-encoded 0/1 indicator that passes through unscaled).
    """

    names: list[str]
    rows: list[list[str]]
    kinds: dict[str, str]
    target: str

    def __post_init__(self):
        if self.target not in self.names:
            raise DomainError(f"target column {self.target!r} not in table")
        width = len(self.names)
        for i, row in enumerate(self.rows):
            if len(row) != width:
                raise DomainError(f"row {i + 1} has {len(row)} cells, expected {width}")
        for name in self.names:
            if self.kinds.get(name) not in KINDS:
                raise DomainError(f"column {name!r} has no valid kind")

    def column(self, name: str) -> list[str]:
        j = self.names.index(name)
        return [row[j] for row in self.rows]


def infer_kind(cells: list[str]) -> str:
    """Numeric when every non-missing cell parses as a finite real."""
    for c in cells:
        if not is_missing(c) and _parse_float(c) is None:
            return "categorical"
    return "numeric"


def load_csv(path, target_name: str, type_hints: dict[str, str] | None = None) -> RawTable:
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            records = list(csv.reader(fh))
    except OSError as exc:
        raise DomainError(f"cannot read {path}: {exc}") from exc
    if not records:
        raise DomainError(f"{path} is empty")
    names = [n.strip() for n in records[0]]
    rows = [r for r in records[1:] if r]
    if not rows:
        raise DomainError(f"{path} has a header but no data rows")
    if len(set(names)) != len(names):
        raise DomainError("duplicate column names in header")
    if target_name not in names:
        raise DomainError(f"target column {target_name!r} not in header")
    hints = dict(type_hints or {})
    unknown = set(hints) - set(names)
    if unknown:
        raise DomainError(f"type hints for unknown columns: {sorted(unknown)}")
    width = len(names)
    for i, r in enumerate(rows):
        if len(r) != width:
            raise DomainError(f"ragged row {i + 2}: {len(r)} cells, expected {width}")
    kinds = {}
    for j, name in enumerate(names):
        kinds[name] = hints.get(name) or infer_kind([r[j] for r in rows])
    return RawTable(names, rows, kinds, target_name)


@dataclass
class PreprocessLog:
    rows_in: int = 0
    duplicate_rows_dropped: int = 0
    constant_columns_dropped: list[str] = field(default_factory=list)
    missing_target_rows_dropped: int = 0
    imputed_numeric_cells: int = 0
    missing_categorical_cells: int = 0
    one_hot: dict[str, list[str]] = field(default_factory=dict)
    rows_out: int = 0
    features_out: int = 0


def _z(col: np.ndarray) -> tuple[np.ndarray, float, float]:
    mean = float(col.mean())
    std = float(col.std())
    return (col - mean) / std, mean, std


def preprocess(raw: RawTable) -> tuple[Dataset, PreprocessLog]:
    plog = PreprocessLog(rows_in=len(raw.rows))

    # 1. duplicates
    seen = set()
    rows = []
    for r in raw.rows:
        key = tuple(r)
        if key not in seen:
            seen.add(key)
            rows.append(r)
    plog.duplicate_rows_dropped = len(raw.rows) - len(rows)

    if raw.kinds[raw.target] != "numeric":
        raise DomainError(f"target {raw.target!r} must be numeric")

    # 2. single-valued columns
    names = []
    for j, name in enumerate(raw.names):
        distinct = {r[j].strip() for r in rows if not is_missing(r[j])}
        if name != raw.target and len(distinct) <= 1:
            plog.constant_columns_dropped.append(name)
        else:
            names.append(name)
    idx = {n: raw.names.index(n) for n in names}

    # 3. missing target
    tj = idx[raw.target]
    kept = [r for r in rows if not is_missing(r[tj])]
    plog.missing_target_rows_dropped = len(rows) - len(kept)
    rows = kept
    if not rows:
        raise DomainError("every target value is missing")
    if len(rows) < 2:
        raise DomainError("fewer than 2 rows survive cleaning")
    y_raw = np.array([_parse_float(r[tj]) for r in rows], dtype=np.float64)

    columns: list[np.ndarray] = []
    out_names: list[str] = []
    kinds: list[str] = []
    origins: list[str] = []
    for name in names:
        if name == raw.target:
            continue
        j = idx[name]
        cells = [r[j] for r in rows]
        kind = raw.kinds[name]
        if kind in ("numeric", "binary"):
            # 4. mean imputation
            parsed = [np.nan if is_missing(c) else _parse_float(c) for c in cells]
            if any(v is None for v in parsed):
                raise DomainError(f"column {name!r} has cells that are not numbers")
            vals = np.array(parsed, dtype=np.float64)
            miss = np.isnan(vals)
            if miss.all():
                plog.constant_columns_dropped.append(name)
                continue
            plog.imputed_numeric_cells += int(miss.sum())
            vals[miss] = vals[~miss].mean()
            if vals.min() == vals.max():
                # constant once duplicate / missing-target rows are gone
                plog.constant_columns_dropped.append(name)
                continue
            columns.append(vals)
            out_names.append(name)
            kinds.append(kind)
            origins.append(name)
        else:
            # 5. placeholder category
            levels = sorted({c.strip() for c in cells if not is_missing(c)})
            binary = len(levels) == 2
            n_missing = sum(is_missing(c) for c in cells)
            plog.missing_categorical_cells += n_missing
            values = [PLACEHOLDER if is_missing(c) else c.strip() for c in cells]
            if n_missing:
                levels = sorted(set(levels) | {PLACEHOLDER})
                binary = False
            if len(set(values)) <= 1:
                plog.constant_columns_dropped.append(name)
                continue
            # 6. one-hot
            keep = levels[1:] if binary else levels
            plog.one_hot[name] = [f"{name}_{lv}" for lv in keep]
            arr = np.array(values, dtype=object)
            for lv in keep:
                columns.append((arr == lv).astype(np.float64))
                out_names.append(f"{name}_{lv}")
                kinds.append("binary")
                origins.append(name)

    # 7. z-scores
    p = len(columns)
    X = np.column_stack(columns) if p else np.empty((len(rows), 0))
    x_mean = np.zeros(p)
    x_std = np.ones(p)
    for j in range(p):
        if kinds[j] == "numeric":
            X[:, j], x_mean[j], x_std[j] = _z(X[:, j])
    if y_raw.min() == y_raw.max():
        raise DomainError("target is constant after cleaning")
    y, y_mean, y_std = _z(y_raw)

    plog.rows_out, plog.features_out = X.shape
    log.info("preprocess: %s", plog)
    data = Dataset(X, y, out_names, kinds, origins, x_mean, x_std, y_mean, y_std,
                   target_name=raw.target)
    return data, plog


def dataset_to_raw(data: Dataset) -> RawTable:
    """Render a dataset back into a table, preserving column kinds."""
    names = list(data.names) + [data.target_name]
    rows = [[repr(float(v)) for v in xi] + [repr(float(yi))] for xi, yi in zip(data.X, data.y)]
    kinds = dict(zip(data.names, data.kinds))
    kinds[data.target_name] = "numeric"
    return RawTable(names, rows, kinds, data.target_name)
