"""Configuration x bootstrap-rate sweeps under repeated k-fold cross-validation.

Within a repeat every grid cell sees the same fold split, which is what
makes the paired t-tests in ``compare_br_groups`` valid. Fold splits come
from ``derive(master_seed, 0, repeat)``; the forest of a work item
``(repeat, fold, config, rate)`` is seeded from
``derive(master_seed, 1, repeat, fold, config_index, rate_index)``, so a
sweep's output does not depend on how many threads run it.
"""
from __future__ import annotations

import hashlib
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .dataset import Dataset
from .errors import DomainError
from .forest import BR_GRID, PRESET_NAMES, ForestConfig, fit_forest, preset
from .sampling import derive
from .stats import paired_t_one_sided

SIGNIFICANCE_LEVELS = (0.1, 0.05, 0.01, 1e-3, 1e-4, 1e-5)


@dataclass
class SweepPlan:
    configs: list = field(default_factory=lambda: list(PRESET_NAMES))
    br_values: list[float] = field(default_factory=lambda: list(BR_GRID))
    folds: int = 2
    repeats: int = 50
    master_seed: int = 0

    def __post_init__(self):
        if self.folds < 2:
            raise DomainError("folds must be >= 2")
        if self.repeats < 1:
            raise DomainError("repeats must be >= 1")
        if not self.br_values or any(not br > 0 for br in self.br_values):
            raise DomainError("bootstrap rates must be positive")
        if not self.configs:
            raise DomainError("plan needs at least one config")
        self.br_values = [float(b) for b in self.br_values]
        named = []
        for c in self.configs:
            if isinstance(c, str):
                named.append((c, preset(c)))
            elif isinstance(c, dict):
                d = dict(c)
                name = d.pop("name", None)
                if name is None:
                    raise DomainError("inline configs need a 'name'")
                named.append((name, ForestConfig.from_dict(d)))
            else:
                name, cfg = c
                named.append((name, cfg))
        names = [n for n, _ in named]
        if len(set(names)) != len(names):
            raise DomainError("config names must be unique")
        self.configs = named

    @property
    def config_names(self) -> list[str]:
        return [n for n, _ in self.configs]

    @classmethod
    def from_dict(cls, d: dict) -> "SweepPlan":
        kwargs = {}
        if "configs" in d:
            kwargs["configs"] = d["configs"]
        if "br_values" in d:
            kwargs["br_values"] = d["br_values"]
        for key in ("folds", "repeats"):
            if key in d:
                kwargs[key] = int(d[key])
        if "seed" in d:
            kwargs["master_seed"] = int(d["seed"])
        return cls(**kwargs)

    @classmethod
    def from_json(cls, path) -> "SweepPlan":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


def _hash_rows(train: np.ndarray, test: np.ndarray) -> str:
    h = hashlib.sha256()
    h.update(np.asarray(train, dtype=np.int64).tobytes())
    h.update(b"|")
    h.update(np.asarray(test, dtype=np.int64).tobytes())
    return h.hexdigest()[:16]


@dataclass
class SweepResult:
    config_names: list[str]
    br_values: list[float]
    folds: int
    repeats: int
    values: dict  # (config name, br) -> array of folds * repeats MSEs, ordered (repeat, fold)
    fold_hashes: list[str]
    provenance: dict
    configs: dict = field(default_factory=dict)

    def cell(self, name: str, br: float) -> np.ndarray:
        try:
            return self.values[(name, float(br))]
        except KeyError:
            raise DomainError(f"no cell ({name!r}, {br})") from None

    def mean(self, name: str, br: float) -> float:
        return float(np.mean(self.cell(name, br)))

    def std(self, name: str, br: float) -> float:
        """Sample (n - 1) standard deviation of a cell."""
        return float(np.std(self.cell(name, br), ddof=1))

    def cells(self):
        for name in self.config_names:
            for br in self.br_values:
                yield name, br

    def to_dict(self) -> dict:
        return {
            "provenance": self.provenance,
            "folds": self.folds,
            "repeats": self.repeats,
            "configs": {n: self.configs.get(n) for n in self.config_names},
            "br_values": self.br_values,
            "fold_hashes": self.fold_hashes,
            "cells": [
                {
                    "config": name,
                    "br": br,
                    "mean": self.mean(name, br),
                    "std": self.std(name, br),
                    "values": [float(v) for v in self.cell(name, br)],
                }
                for name, br in self.cells()
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1)

    @classmethod
    def from_dict(cls, d: dict) -> "SweepResult":
        names = list(d["configs"])
        values = {(c["config"], float(c["br"])): np.array(c["values"]) for c in d["cells"]}
        return cls(names, [float(b) for b in d["br_values"]], d["folds"], d["repeats"], values,
                   list(d["fold_hashes"]), d["provenance"], d["configs"])

    def to_csv(self) -> str:
        lines = ["config,br,mean,std"]
        for name, br in self.cells():
            lines.append(f"{name},{br:.6f},{self.mean(name, br):.6f},{self.std(name, br):.6f}")
        return "\n".join(lines) + "\n"


def fold_splits(n_rows: int, folds: int, seed: int, repeat: int) -> list[np.ndarray]:
    perm = derive(seed, 0, repeat).generator.permutation(n_rows)
    return [np.sort(part) for part in np.array_split(perm, folds)]


def run_sweep(data: Dataset, plan: SweepPlan, threads: int = 1, dataset_id: str = "") -> SweepResult:
    """Evaluate every (config, rate) cell with ``plan.repeats`` x
    ``plan.folds`` cross-validation; each value is a held-out fold MSE."""
    n = data.n_rows
    if n // plan.folds < 2:
        raise DomainError(f"{n} rows cannot make {plan.folds} folds of at least 2 rows")

    splits = []
    hashes = []
    for rep in range(plan.repeats):
        parts = fold_splits(n, plan.folds, plan.master_seed, rep)
        for f in range(plan.folds):
            test = parts[f]
            train = np.sort(np.concatenate([parts[g] for g in range(plan.folds) if g != f]))
            splits.append((train, test))
            hashes.append(_hash_rows(train, test))

    items = [
        (rep, f, ci, bi)
        for rep in range(plan.repeats)
        for f in range(plan.folds)
        for ci in range(len(plan.configs))
        for bi in range(len(plan.br_values))
    ]

    def work(item):
        rep, f, ci, bi = item
        train, test = splits[rep * plan.folds + f]
        seed = derive(plan.master_seed, 1, rep, f, ci, bi).seed64()
        cfg = plan.configs[ci][1].with_rate(plan.br_values[bi]).with_seed(seed)
        forest = fit_forest(data.subset(train), cfg)
        resid = forest.predict(data.X[test]) - data.y[test]
        return float(np.mean(resid ** 2))

    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            mses = list(pool.map(work, items))
    else:
        mses = [work(it) for it in items]

    n_eval = plan.repeats * plan.folds
    values = {
        (name, br): np.empty(n_eval) for name in plan.config_names for br in plan.br_values
    }
    for (rep, f, ci, bi), mse in zip(items, mses):
        values[(plan.configs[ci][0], plan.br_values[bi])][rep * plan.folds + f] = mse

    provenance = {
        "dataset_id": dataset_id,
        "master_seed": plan.master_seed,
        "n_rows": n,
        "n_features": data.n_features,
    }
    configs = {name: cfg.to_dict() for name, cfg in plan.configs}
    return SweepResult(plan.config_names, list(plan.br_values), plan.folds, plan.repeats,
                       values, hashes, provenance, configs)


@dataclass(frozen=True)
class BestCell:
    config: str
    br: float
    mean_mse: float
    tie: bool = False


def select_best(result: SweepResult) -> BestCell:
    """Cell with the lowest mean MSE; ties go to the lower rate, then to the
    earlier config."""
    order = {n: i for i, n in enumerate(result.config_names)}
    cells = sorted(result.cells(), key=lambda c: (result.mean(*c), c[1], order[c[0]]))
    if not cells:
        raise DomainError("empty sweep result")
    best = cells[0]
    best_mean = result.mean(*best)
    tie = len(cells) > 1 and result.mean(*cells[1]) == best_mean
    return BestCell(best[0], best[1], best_mean, tie)


@dataclass(frozen=True)
class GroupComparison:
    winner_group: str  # "le_1" or "gt_1"
    best: BestCell
    max_p_value: float
    p_values: dict  # opposite-group cell -> p
    significant: dict  # level -> max_p_value < level
    degenerate: bool


def br_group(br: float) -> str:
    return "le_1" if br <= 1.0 else "gt_1"


def compare_br_groups(result: SweepResult) -> GroupComparison:
    """One-sided paired t-tests of the overall best cell against every cell
    of the other rate group (rate <= 1 versus rate > 1)."""
    groups = {br_group(br) for br in result.br_values}
    if groups != {"le_1", "gt_1"}:
        raise DomainError("both rate groups (<= 1 and > 1) must be present")
    best = select_best(result)
    winner = br_group(best.br)
    ref = result.cell(best.config, best.br)
    p_values = {}
    degenerate = False
    for name, br in result.cells():
        if br_group(br) == winner:
            continue
        res = paired_t_one_sided(ref, result.cell(name, br), alternative="less")
        p_values[(name, br)] = res.p_value
        degenerate |= res.degenerate
    max_p = max(p_values.values())
    significant = {level: max_p < level for level in SIGNIFICANCE_LEVELS}
    return GroupComparison(winner, best, max_p, p_values, significant, degenerate)


def emit_br_curve(result: SweepResult, config: str) -> list[dict]:
    """Mean and sample std of MSE per rate for one config, sorted by rate."""
    if config not in result.config_names:
        raise DomainError(f"unknown config {config!r}")
    return [
        {"br": br, "mean": result.mean(config, br), "std": result.std(config, br)}
        for br in sorted(result.br_values)
    ]


def curve_to_csv(rows: list[dict]) -> str:
    lines = ["br,mean,std"]
    lines += [f"{r['br']:.6f},{r['mean']:.6f},{r['std']:.6f}" for r in rows]
    return "\n".join(lines) + "\n"


def curve_to_json(rows: list[dict]) -> str:
    return json.dumps([{k: f"{v:.6f}" for k, v in r.items()} for r in rows])
