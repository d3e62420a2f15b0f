import numpy as np
import pytest
from hypothesis import given, strategies as st

from xtalk_lab.config import data_path
from xtalk_lab.crosstalk import FLUX_SIGNED, XY_DB, CrosstalkMatrix
from xtalk_lab.errors import DatasetError
from xtalk_lab.flux import random_flux_matrix
from xtalk_lab.io import (
    CrosstalkRecord,
    fmt,
    ingest_crosstalk_dataset,
    per_distance_means,
    read_crosstalk_matrix,
    read_csv,
    write_crosstalk_matrix,
    write_crosstalk_results,
    write_csv,
    write_fit,
    write_trace,
)


@given(st.floats(allow_nan=False, allow_infinity=False))
def test_fmt_round_trips_floats(x):
    assert float(fmt(x)) == x


def test_fmt_types():
    assert fmt(True) == "true" and fmt(np.int64(3)) == "3" and fmt(-0.0) == "0"


def test_csv_comments_become_metadata(tmp_path):
    p = tmp_path / "a.csv"
    write_csv(p, ["x", "y_dB"], [(1, 2.5)], comments={"mean_dB": "-1"})
    meta, rows = read_csv(p)
    assert meta == {"mean_dB": "-1"} and rows == [{"x": "1", "y_dB": "2.5"}]


def test_xy_matrix_round_trip(tmp_path):
    e = np.array([[0.0, -40.1, -50.2], [-39.0, 0.0, -45.5], [-41.0, -42.0, 0.0]])
    m = CrosstalkMatrix(XY_DB, e)
    write_crosstalk_matrix(tmp_path / "m.csv", m)
    assert read_crosstalk_matrix(tmp_path / "m.csv") == m


def test_flux_matrix_round_trip(tmp_path, rng):
    m = random_flux_matrix(6, rng)
    write_crosstalk_matrix(tmp_path / "b.csv", m)
    assert read_crosstalk_matrix(tmp_path / "b.csv") == m


def test_labelled_matrix_round_trip(tmp_path):
    m = CrosstalkMatrix(XY_DB, np.array([[0.0, -40.0], [-41.0, 0.0]]), labels=("Q1", "Q2"))
    write_crosstalk_matrix(tmp_path / "m.csv", m)
    back = read_crosstalk_matrix(tmp_path / "m.csv")
    assert back == m and back.labels == ("Q1", "Q2")


def header_stats(path):
    meta, _ = read_csv(path)
    return float(meta["mean_dB"]), float(meta["std_dB"])


@pytest.mark.parametrize("name", ["xy_bare_72.csv", "xy_tunnel_72.csv", "xy_bare_full_210.csv"])
def test_bundled_datasets_echo_their_headers(name):
    path = data_path(name)
    ds = ingest_crosstalk_dataset(path)
    mean, std = header_stats(path)
    # independent recomputation straight from the text
    vals = [float(line.split(",")[2]) for line in path.read_text().splitlines()[1:] if line and line[0].isdigit()]
    assert ds.stats.mean == pytest.approx(mean, abs=0.05) == pytest.approx(np.mean(vals), abs=0.05)
    assert ds.stats.std == pytest.approx(std, abs=0.05) == pytest.approx(np.std(vals), abs=0.05)
    assert ds.stats.count == len(vals)
    assert ds.distances_mm is not None


def test_unmeasured_pairs_are_nan(tmp_path):
    p = tmp_path / "d.csv"
    p.write_text("victim,source,value,unit\n0,1,-40,dB\n1,2,-41,dB\n")
    ds = ingest_crosstalk_dataset(p)
    assert np.isnan(ds.matrix.entries[2, 0])
    assert ds.matrix.kind == XY_DB


def test_fraction_dataset(tmp_path):
    p = tmp_path / "f.csv"
    p.write_text("victim,source,value,unit\n0,1,0.0044,fraction\n1,0,-0.0013,fraction\n")
    ds = ingest_crosstalk_dataset(p)
    assert ds.matrix.kind == FLUX_SIGNED and ds.unit == "fraction"


def test_single_pair_has_zero_std(tmp_path):
    p = tmp_path / "one.csv"
    p.write_text("victim,source,value,unit\n0,1,-37.4,dB\n")
    assert ingest_crosstalk_dataset(p).stats.std == 0.0


@pytest.mark.parametrize(
    "text",
    [
        "",
        "# only a comment\n",
        "victim,source,value,unit\n",
        "victim,source,value,unit\n0,1,-40,dB\n1,0,0.01,fraction\n",
        "victim,source,value,unit\n0,1,-40,dB\n0,1,-41,dB\n",
        "victim,source,value,unit\n0,0,-40,dB\n",
        "victim,source,value,unit\n0,1,-40,dBm\n",
        "victim,source,value,unit\n0,1,abc,dB\n",
        "victim,source,value,unit\n0,1,nan,dB\n",
        "a,b,c\n1,2,3\n",
        "victim,source,value,unit,distance_mm\n0,1,-40,dB,x\n",
    ],
)
def test_bad_datasets(tmp_path, text):
    p = tmp_path / "bad.csv"
    p.write_text(text)
    with pytest.raises(DatasetError):
        ingest_crosstalk_dataset(p)


def test_missing_file(tmp_path):
    with pytest.raises(DatasetError):
        ingest_crosstalk_dataset(tmp_path / "nope.csv")


def test_other_writers(tmp_path):
    write_trace(tmp_path / "t.csv", [0.0, 1.0], [0.0, 0.5])
    write_fit(tmp_path / "f.csv", {"frequency_ghz": 0.025})
    write_crosstalk_results(tmp_path / "r.csv", [CrosstalkRecord(0, 1, -40.0, "dB", "xy", 7)])
    assert read_csv(tmp_path / "r.csv")[1][0]["protocol"] == "xy"
    assert read_csv(tmp_path / "t.csv")[1][1]["population"] == "0.5"


def test_per_distance_means():
    u, m, n = per_distance_means([2.0, 2.0, 4.0], [-40.0, -42.0, -45.0])
    assert list(u) == [2.0, 4.0] and list(m) == [-41.0, -45.0] and list(n) == [2, 1]
