import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from forecastability.errors import DataError, UndefinedCorrelationError, UndefinedDenominatorError
from forecastability.ingest import (HierarchySpec, Level, Schema, aggregate_levels, load_errors,
                                   load_long_csv, load_m5_wide, pearson_r, wape)

TOY = """series_id,cat_id,item_id,t,value
a,FOODS,a,0,1
a,FOODS,a,1,2
a,FOODS,a,2,3
a,FOODS,a,3,4
b,HOBBIES,b,0,5
b,HOBBIES,b,1,6
b,HOBBIES,b,2,7
b,HOBBIES,b,3,8
"""


def write(tmp_path, text, name="data.csv"):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_toy_file(tmp_path):
    ds = load_long_csv(write(tmp_path, TOY))
    assert len(ds.records()) == 8
    series = ds.series()
    assert sorted(series) == ["a", "b"]
    assert all(len(s) == 4 for s in series.values())
    assert ds.dims == ("cat_id", "item_id")


def test_nan_value_names_the_line(tmp_path):
    text = TOY.replace("b,HOBBIES,b,1,6", "b,HOBBIES,b,1,NaN")
    with pytest.raises(DataError, match="line 7"):
        load_long_csv(write(tmp_path, text))


def test_missing_value_names_the_line(tmp_path):
    text = TOY.replace("a,FOODS,a,2,3", "a,FOODS,a,2,")
    with pytest.raises(DataError, match="line 4"):
        load_long_csv(write(tmp_path, text))


def test_duplicate_key(tmp_path):
    with pytest.raises(DataError, match="duplicate"):
        load_long_csv(write(tmp_path, TOY + "a,FOODS,a,3,9\n"))


def test_gap_is_an_error(tmp_path):
    text = TOY.replace("a,FOODS,a,2,3\n", "")
    with pytest.raises(DataError, match="gap"):
        load_long_csv(write(tmp_path, text))


def test_unmapped_column(tmp_path):
    with pytest.raises(DataError):
        load_long_csv(write(tmp_path, TOY), Schema(value="sales"))


def test_custom_schema(tmp_path):
    text = TOY.replace("series_id,cat_id,item_id,t,value", "id,cat_id,item_id,day,sales")
    ds = load_long_csv(write(tmp_path, text), Schema("id", "day", "sales"))
    assert sorted(ds.series()) == ["a", "b"]


def test_missing_file(tmp_path):
    with pytest.raises(DataError):
        load_long_csv(tmp_path / "nope.csv")


def test_aggregation_examples(tmp_path):
    text = TOY.replace("HOBBIES", "FOODS")
    text = "\n".join(text.splitlines()[:3] + text.splitlines()[5:7]) + "\n"
    ds = load_long_csv(write(tmp_path, text))
    levels = aggregate_levels(ds, HierarchySpec.total_and(["cat_id", "item_id"]))
    assert len(levels["L0"]) == 1
    np.testing.assert_array_equal(levels["L0"][0].values, [6, 8])
    items = {s.id.split("/")[-1]: s.values.tolist() for s in levels["L2"]}
    assert items == {"a": [1, 2], "b": [5, 6]}


def test_levels_sum_to_total(tmp_path):
    g = np.random.default_rng(0)
    lines = ["series_id,cat_id,dept_id,item_id,t,value"]
    for i in range(12):
        cat, dept = f"C{i % 3}", f"D{i % 2}"
        for t in range(30):
            lines.append(f"s{i},{cat},{dept},i{i},{t},{g.poisson(3)}")
    ds = load_long_csv(write(tmp_path, "\n".join(lines) + "\n"))
    levels = aggregate_levels(ds, HierarchySpec.m5())
    total = levels["L0"][0].values
    for name in ("L1", "L2", "L3"):
        np.testing.assert_allclose(np.sum([s.values for s in levels[name]], axis=0), total, rtol=1e-9)
    assert len(levels["L3"]) == 12


def test_hierarchy_must_nest():
    with pytest.raises(ValueError):
        HierarchySpec((Level("L0", ()), Level("L1", ("cat_id",)), Level("L2", ("dept_id",))))
    spec = HierarchySpec.m5()
    assert HierarchySpec.from_dict(spec.to_dict()) == spec


def test_m5_wide(tmp_path):
    text = ("id,item_id,dept_id,cat_id,store_id,state_id,d_1,d_2,d_3\n"
            "X_1_CA,X_1,X_D,X,CA_1,CA,1,0,2\n"
            "Y_1_CA,Y_1,Y_D,Y,CA_1,CA,3,3,3\n")
    ds = load_m5_wide(write(tmp_path, text))
    levels = aggregate_levels(ds, HierarchySpec.m5())
    np.testing.assert_array_equal(levels["L0"][0].values, [4, 3, 5])
    assert levels["L0"][0].start_index == 1
    assert [s.id for s in levels["L1"]] == ["X", "Y"]


def test_load_errors(tmp_path):
    df = load_errors(write(tmp_path, "series_id,model,wape\na,ets,0.3\nb,ets,0.5\n", "e.csv"))
    assert df["wape"].tolist() == [0.3, 0.5]
    with pytest.raises(DataError, match="line 3"):
        load_errors(write(tmp_path, "series_id,model,wape\na,ets,0.3\na,ets,0.5\n", "e.csv"))
    with pytest.raises(DataError, match="line 2"):
        load_errors(write(tmp_path, "series_id,model,wape\na,ets,oops\n", "e.csv"))


def test_wape_examples():
    assert wape([10, 10], [8, 12]) == pytest.approx(0.2)
    assert wape([1, 2, 3], [1, 2, 3]) == 0.0
    with pytest.raises(UndefinedDenominatorError):
        wape([0, 0], [1, 2])


def test_pearson_examples():
    x = np.arange(10.0)
    assert pearson_r(x, 2 * x + 3) == pytest.approx(1.0, abs=1e-12)
    assert pearson_r(x, -x) == pytest.approx(-1.0, abs=1e-12)
    assert pearson_r([1, 2, 3], [1, 3, 2]) == pytest.approx(0.5, abs=1e-12)
    with pytest.raises(UndefinedCorrelationError):
        pearson_r([1, 1, 1], [1, 2, 3])


@settings(max_examples=300, deadline=None)
@given(st.integers(2, 50).flatmap(lambda n: st.tuples(
    arrays(np.float64, n, elements=st.floats(-1e3, 1e3)),
    arrays(np.float64, n, elements=st.floats(-1e3, 1e3)))))
def test_pearson_symmetric_and_bounded(xy):
    x, y = xy
    try:
        r = pearson_r(x, y)
    except UndefinedCorrelationError:
        return
    assert r == pearson_r(y, x)
    assert -1.0 <= r <= 1.0
