import hashlib
import json
from collections import Counter

import numpy as np
import pytest

from brforest import harness
from brforest.dataset import Dataset
from brforest.errors import DomainError
from brforest.forest import BR_GRID, PRESET_NAMES, ForestConfig
from brforest.harness import (SIGNIFICANCE_LEVELS, SweepPlan, SweepResult, compare_br_groups,
                              curve_to_csv, curve_to_json, emit_br_curve, fold_splits, run_sweep,
                              select_best)
from brforest.synthetic import NoiseSpec, gen_pure_noise, gen_regions

SMALL = {"name": "small", "n_trees": 10}


def toy(n=60, seed=0):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, 2))
    return Dataset(X, X[:, 0] + 0.3 * rng.normal(size=n), ["a", "b"])


def fake_result(cells: dict, folds=2, repeats=50):
    names = list(dict.fromkeys(name for name, _ in cells))
    brs = sorted({br for _, br in cells})
    values = {(n, float(b)): np.asarray(v, dtype=float) for (n, b), v in cells.items()}
    return SweepResult(names, brs, folds, repeats, values, [], {})


def test_plan_defaults_and_validation():
    plan = SweepPlan()
    assert plan.config_names == list(PRESET_NAMES) and plan.br_values == list(BR_GRID)
    assert (plan.folds, plan.repeats) == (2, 50)
    for bad in ({"folds": 1}, {"repeats": 0}, {"br_values": [0.0]}, {"br_values": []},
                {"configs": []}, {"configs": ["RF[100]", "RF[100]"]}, {"configs": [{"n_trees": 5}]}):
        with pytest.raises(DomainError):
            SweepPlan(**bad)
    plan = SweepPlan.from_dict({"configs": ["RF[200]", SMALL], "br_values": [1, 2], "folds": 3,
                                "repeats": 4, "seed": 9})
    assert plan.config_names == ["RF[200]", "small"] and plan.master_seed == 9
    assert plan.configs[1][1] == ForestConfig(n_trees=10)


def test_one_cell_gives_folds_times_repeats_values():
    plan = SweepPlan(configs=["RF[100]"], br_values=[1.0])
    result = run_sweep(toy(), plan)
    assert result.cell("RF[100]", 1.0).shape == (100,)
    assert len(result.fold_hashes) == 100


def test_constant_target_gives_zero_mse():
    X = np.random.default_rng(1).normal(size=(40, 2))
    data = Dataset(X, np.full(40, 3.0), ["a", "b"])
    result = run_sweep(data, SweepPlan(configs=[SMALL], br_values=[0.4, 2.0], repeats=3))
    for cell in result.cells():
        assert np.all(result.cell(*cell) == 0.0)


def test_folds_partition_rows():
    parts = fold_splits(11, 3, seed=4, repeat=2)
    assert sorted(np.concatenate(parts).tolist()) == list(range(11))
    assert [len(p) for p in parts] == [4, 4, 3]
    assert all(np.array_equal(a, b) for a, b in zip(parts, fold_splits(11, 3, 4, 2)))
    with pytest.raises(DomainError):
        run_sweep(toy(n=3), SweepPlan(configs=[SMALL], br_values=[1.0]))


def test_folds_are_shared_across_cells(monkeypatch):
    seen = Counter()
    real_fit = harness.fit_forest

    def spy(data, config, threads=1):
        seen[hashlib.sha256(data.X.tobytes() + data.y.tobytes()).hexdigest()] += 1
        return real_fit(data, config, threads)

    monkeypatch.setattr(harness, "fit_forest", spy)
    plan = SweepPlan(configs=[SMALL, {"name": "deep", "n_trees": 5, "tree": {"max_depth": 2}}],
                     br_values=[0.5, 1.0, 3.0], repeats=4)
    result = run_sweep(toy(), plan)
    n_cells = 2 * 3
    assert len(seen) == plan.repeats * plan.folds
    assert set(seen.values()) == {n_cells}
    assert len(set(result.fold_hashes)) == plan.repeats * plan.folds


def test_thread_count_does_not_change_output():
    plan = SweepPlan(configs=["RF[mfLog2]", SMALL], br_values=[0.2, 1.2], repeats=3,
                     master_seed=77)
    data = toy(n=80, seed=3)
    one = run_sweep(data, plan, threads=1).to_json()
    eight = run_sweep(data, plan, threads=8).to_json()
    assert one.encode() == eight.encode()


def test_serialization_round_trip_and_recomputation():
    plan = SweepPlan(configs=[SMALL], br_values=[0.6, 1.0, 4.0], repeats=3)
    result = run_sweep(toy(), plan, dataset_id="toy")
    d = json.loads(result.to_json())
    assert d["provenance"]["dataset_id"] == "toy" and d["provenance"]["master_seed"] == 0
    for cell in d["cells"]:
        v = np.array(cell["values"])
        assert abs(cell["mean"] - v.mean()) <= 1e-12
        assert abs(cell["std"] - v.std(ddof=1)) <= 1e-12
    back = SweepResult.from_dict(d)
    assert back.to_json() == result.to_json()
    lines = result.to_csv().splitlines()
    assert lines[0] == "config,br,mean,std" and len(lines) == 4


def test_select_best_rules():
    single = fake_result({("A", 1.0): [3.0, 4.0]})
    assert select_best(single) == harness.BestCell("A", 1.0, 3.5, False)
    tied = fake_result({("A", 2.0): [1.0, 1.0], ("A", 0.4): [1.0, 1.0], ("B", 0.4): [1.0, 1.0],
                        ("B", 2.0): [5.0, 5.0]})
    best = select_best(tied)
    assert (best.config, best.br, best.tie) == ("A", 0.4, True)


def test_group_comparison_large_margin():
    rng = np.random.default_rng(0)
    base = rng.normal(10, 1, size=100)
    cells = {("A", 2.0): base - 5 + 0.1 * rng.normal(size=100),
             ("A", 0.4): base, ("B", 0.4): base + 1, ("B", 2.0): base + 2}
    cmp = compare_br_groups(fake_result(cells))
    assert cmp.winner_group == "gt_1" and cmp.best.br == 2.0
    assert set(cmp.p_values) == {("A", 0.4), ("B", 0.4)}
    assert cmp.max_p_value < 1e-5
    assert all(cmp.significant[level] for level in SIGNIFICANCE_LEVELS)


def test_group_comparison_singleton_and_identical():
    v = [1.0, 2.0, 3.0, 4.0]
    cmp = compare_br_groups(fake_result({("A", 1.0): v, ("A", 5.0): v}))
    assert cmp.winner_group == "le_1"
    assert list(cmp.p_values) == [("A", 5.0)]
    assert cmp.max_p_value == 0.5 and cmp.degenerate
    assert not any(cmp.significant.values())
    with pytest.raises(DomainError):
        compare_br_groups(fake_result({("A", 1.0): v, ("A", 0.5): v}))


def test_curve_rows_and_formatting():
    result = fake_result({("A", 3.0): [1.0, 2.0], ("A", 0.2): [1 / 3, 1 / 3], ("B", 0.2): [0, 1]})
    rows = emit_br_curve(result, "A")
    assert [r["br"] for r in rows] == [0.2, 3.0]
    assert curve_to_csv(rows) == "br,mean,std\n0.200000,0.333333,0.000000\n3.000000,1.500000,0.707107\n"
    assert json.loads(curve_to_json(rows))[0] == {"br": "0.200000", "mean": "0.333333",
                                                 "std": "0.000000"}
    with pytest.raises(DomainError):
        emit_br_curve(result, "C")
    assert len(emit_br_curve(fake_result({("A", 1.0): [1.0, 2.0]}), "A")) == 1


@pytest.mark.slow
def test_pure_noise_curve_rises_above_unit_rate():
    data = gen_pure_noise(NoiseSpec(1.0, 1000), seed=5)
    plan = SweepPlan(configs=["RF[100]"], br_values=[1.2, 2.0, 3.0, 5.0], repeats=3)
    means = [r["mean"] for r in emit_br_curve(run_sweep(data, plan), "RF[100]")]
    assert all(a < b for a, b in zip(means, means[1:]))


@pytest.mark.slow
def test_best_rate_lower_at_high_noise():
    cfg = {"name": "rf", "n_trees": 50}
    plan = SweepPlan(configs=[cfg], br_values=list(BR_GRID), repeats=2)
    wins = 0
    for seed in range(5):
        low = select_best(run_sweep(gen_regions(0.5, seed)[0], plan)).br
        high = select_best(run_sweep(gen_regions(5.0, seed)[0], plan)).br
        wins += low > high
    assert wins >= 4
