import json

import numpy as np
import pandas as pd
import pytest

from contact_hj.cauchy_fd import solve
from contact_hj.emit import emit, grid_frame, to_jsonable
from contact_hj.errors import ParameterError
from contact_hj.extgrid import PLUS_INF, point_data, squared_distance
from contact_hj.fundamental import h_slice
from contact_hj.hamiltonians import catalog_get
from contact_hj.reports import CheckResult


def test_grid_csv_layout(tmp_path, torus64):
    path = emit(point_data(torus64, 2, 1.5), "csv", str(tmp_path / "out" / "f.csv"))
    lines = open(path).read().splitlines()
    assert lines[0] == "x,value,is_infinite"
    assert lines[1].endswith(",inf,True")
    assert lines[3].split(",")[1:] == ["1.5", "False"]
    assert len(lines) == torus64.n + 1


def test_trajectory_csv_layout(tmp_path, torus64):
    traj = solve(catalog_get("quad_discount"), squared_distance(torus64, [0.0]), 0.2, times=[0.1])
    frame = pd.read_csv(emit(traj, "csv", str(tmp_path / "traj.csv")))
    assert list(frame.columns) == ["t", "x", "value", "is_infinite"]
    assert len(frame) == 3 * torus64.n
    assert sorted(frame["t"].unique()) == [0.0, 0.1, 0.2]


def test_htable_csv(tmp_path, torus64):
    table = h_slice(catalog_get("eikonal_plain"), torus64, 0, 0.0, [0.0, 0.5])
    frame = pd.read_csv(emit(table, "csv", str(tmp_path / "h.csv")))
    assert frame["is_infinite"].any() and (~frame["is_infinite"]).any()


def test_json_is_deterministic(tmp_path):
    report = {"b": CheckResult("x", True, np.float64(0.5), np.inf), "a": [np.int64(3), PLUS_INF]}
    first = emit(report, "json", str(tmp_path / "a.json"))
    second = emit(report, "json", str(tmp_path / "b.json"))
    assert open(first, "rb").read() == open(second, "rb").read()
    loaded = json.load(open(first))
    assert list(loaded) == ["a", "b"]
    assert loaded["a"] == [3, "inf"]
    assert loaded["b"]["bound"] == "inf"


def test_to_jsonable_gridfn(torus64):
    out = to_jsonable(point_data(torus64, 0, 1.0))
    assert out["n"] == 64 and out["values"][0] == 1.0 and out["values"][1] == "inf"


def test_emit_errors(tmp_path, torus64):
    with pytest.raises(ParameterError):
        emit({"a": 1}, "csv", str(tmp_path / "x.csv"))
    with pytest.raises(ParameterError):
        emit(point_data(torus64, 0, 0.0), "parquet", str(tmp_path / "x.parquet"))
    assert grid_frame(point_data(torus64, 0, 0.0))["is_infinite"].sum() == 63
