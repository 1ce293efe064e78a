import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from brforest.errors import DomainError
from brforest.preprocess import (PLACEHOLDER, RawTable, dataset_to_raw, infer_kind, load_csv,
                                 preprocess)


def write(tmp_path, text, name="t.csv"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return path


def table(columns: dict, target="y", kinds=None):
    names = list(columns)
    rows = [list(r) for r in zip(*columns.values())]
    kinds = kinds or {n: infer_kind(columns[n]) for n in names}
    return RawTable(names, rows, kinds, target)


def test_load_csv_typing(tmp_path):
    path = write(tmp_path, "a,b,y\n1.0,1,3\n2.5,a,4\n,2,5\n3,b,6\n")
    raw = load_csv(path, "y")
    assert raw.kinds == {"a": "numeric", "b": "categorical", "y": "numeric"}
    assert sum(c.strip() == "" for c in raw.column("a")) == 1
    hinted = load_csv(path, "y", {"a": "categorical"})
    assert hinted.kinds["a"] == "categorical"


@pytest.mark.parametrize("text,target", [
    ("a,y\n", "y"),
    ("", "y"),
    ("a,y\n1,2\n3\n", "y"),
    ("a,b\n1,2\n", "y"),
    ("a,a,y\n1,2,3\n", "y"),
])
def test_load_csv_errors(tmp_path, text, target):
    with pytest.raises(DomainError):
        load_csv(write(tmp_path, text), target)


def test_load_csv_unreadable(tmp_path):
    with pytest.raises(DomainError):
        load_csv(tmp_path / "absent.csv", "y")


def test_constant_column_dropped():
    raw = table({"c": ["7"] * 4, "x": ["1", "2", "3", "4"], "y": ["1", "0", "1", "3"]})
    data, plog = preprocess(raw)
    assert data.names == ["x"]
    assert plog.constant_columns_dropped == ["c"]


def test_one_hot_widths():
    raw = table({
        "two": ["A", "B", "A", "B", "A"],
        "three": ["A", "B", "C", "A", "B"],
        "y": ["1", "2", "3", "4", "5"],
    })
    data, plog = preprocess(raw)
    assert plog.one_hot == {"two": ["two_B"], "three": ["three_A", "three_B", "three_C"]}
    assert data.names == ["two_B", "three_A", "three_B", "three_C"]
    assert data.kinds == ["binary"] * 4
    assert data.X[:, 0].tolist() == [0, 1, 0, 1, 0]
    assert np.all(data.X[:, 1:].sum(axis=1) == 1)


def test_placeholder_turns_binary_into_full_expansion():
    raw = table({"c": ["A", "B", "", "A"], "x": ["1", "2", "3", "5"], "y": ["1", "2", "3", "4"]})
    data, plog = preprocess(raw)
    assert plog.one_hot["c"] == [f"c_{lv}" for lv in sorted(["A", "B", PLACEHOLDER])]
    assert plog.missing_categorical_cells == 1


def test_pipeline_order_and_log():
    raw = table({
        "x": ["1", "1", "", "4", "5", "6"],
        "k": ["u", "u", "v", "v", "u", "w"],
        "y": ["1", "1", "2", "", "3", "5"],
    })
    data, plog = preprocess(raw)
    assert plog.rows_in == 6
    assert plog.duplicate_rows_dropped == 1
    assert plog.missing_target_rows_dropped == 1
    assert plog.imputed_numeric_cells == 1
    assert data.n_rows == plog.rows_out == 4
    # the missing x is imputed with the mean of the surviving cells
    x_raw = data.X[:, 0] * data.x_std[0] + data.x_mean[0]
    assert x_raw.tolist() == pytest.approx([1, (1 + 5 + 6) / 3, 5, 6])


def test_target_errors():
    with pytest.raises(DomainError):
        preprocess(table({"x": ["1", "2", "3"], "y": ["", "na", "?"]}))
    with pytest.raises(DomainError):
        preprocess(table({"x": ["1", "2", "3"], "y": ["1", "", ""]}))
    with pytest.raises(DomainError):
        preprocess(table({"x": ["1", "2", "3"], "y": ["4", "4", "4"]}))


def test_column_constant_after_row_drops_is_removed():
    raw = table({"x": ["1", "1", "2"], "z": ["3", "4", "5"], "y": ["1", "2", ""]})
    data, plog = preprocess(raw)
    assert "x" in plog.constant_columns_dropped and data.names == ["z"]


finite = st.floats(-1e6, 1e6, allow_nan=False).map(lambda v: round(v, 3))


@settings(max_examples=60)
@given(st.integers(3, 40).flatmap(lambda n: st.tuples(
    st.lists(finite, min_size=n, max_size=n),
    st.lists(finite, min_size=n, max_size=n),
    st.lists(st.sampled_from("abc"), min_size=n, max_size=n),
)))
def test_zscore_round_trip_and_idempotence(cols):
    x, t, k = cols
    raw = table({"x": [repr(v) for v in x], "k": k, "y": [repr(v) for v in t]},
                kinds={"x": "numeric", "k": "categorical", "y": "numeric"})
    try:
        data, plog = preprocess(raw)
    except DomainError:
        return
    for j, kind in enumerate(data.kinds):
        if kind == "numeric":
            assert abs(data.X[:, j].mean()) < 1e-9
            assert abs(data.X[:, j].std() - 1) < 1e-9
    assert abs(data.y.mean()) < 1e-9 and abs(data.y.std() - 1) < 1e-9

    kept = []
    seen = set()
    for row in raw.rows:
        if tuple(row) not in seen:
            seen.add(tuple(row))
            kept.append(float(row[2]))
    scale = max(1.0, float(np.abs(kept).max()))
    assert np.allclose(data.destandardize_y(), kept, rtol=1e-9, atol=1e-9 * scale)

    rendered = dataset_to_raw(data)
    if len({tuple(r) for r in rendered.rows}) < data.n_rows:
        return  # not clean: distinct raw rows collapsed to equal numbers
    again, _ = preprocess(rendered)
    assert again.names == data.names and again.kinds == data.kinds
    assert np.allclose(again.X, data.X, atol=1e-9)
    assert np.allclose(again.y, data.y, atol=1e-9)
    assert np.allclose(again.x_mean, 0, atol=1e-9) and np.allclose(again.x_std, 1, atol=1e-9)
    assert abs(again.y_mean) < 1e-9 and abs(again.y_std - 1) < 1e-9
