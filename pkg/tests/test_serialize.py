import io
import json
import math

import pytest

import pyblanket
from pyblanket import BlanketErrno, BlanketError
from pyblanket.experiments import SweepRow
from pyblanket.serialize import (
    CSV_HEADER,
    build_meta,
    config_hash,
    dump_state,
    load_state,
    sidecar_path,
    state_from_dict,
    write_json,
    write_sweep_csv,
)


def test_state_file(tmp_path, rng):
    s = pyblanket.random_state((2, 3), rng, ("A", "B"))
    path = tmp_path / "state.json"
    dump_state(s, path)
    loaded = load_state(path)
    assert loaded.dims == (2, 3)
    assert loaded.labels == ("A", "B")
    assert abs(loaded.rho - s.rho).max() < 1e-15


def test_malformed_state():
    with pytest.raises(BlanketError) as exc_info:
        state_from_dict({"dims": [2]})
    assert exc_info.value.errcode == BlanketErrno.INVALID_ARGUMENT


def test_not_json(tmp_path):
    path = tmp_path / "state.json"
    path.write_text("{", encoding="utf-8")
    with pytest.raises(BlanketError) as exc_info:
        load_state(path)
    assert exc_info.value.errcode == BlanketErrno.INVALID_ARGUMENT


def test_config_hash_ignores_key_order():
    assert config_hash({"a": 1, "b": [1, 2]}) == config_hash({"b": [1, 2], "a": 1})
    assert config_hash({"a": 1}) != config_hash({"a": 2})


def test_meta():
    meta = build_meta(3, {"q": 2})
    assert meta["seed"] == 3
    assert set(meta) == {"seed", "version", "config_hash", "config"}
    assert meta["version"] == "0.1.0"


def test_json_non_finite():
    out = io.StringIO()
    write_json({"x": math.nan, "y": [1.0, math.inf]}, out)
    assert json.loads(out.getvalue()) == {"x": None, "y": [1.0, None]}


def test_sweep_csv():
    rows = [
        SweepRow(0.25, 2, 0.125, 0.5, (1, 2), 1.5),
        SweepRow(0.25, 9, math.nan, math.nan, (), 0.0, error="infeasible"),
    ]
    out = io.StringIO()
    write_sweep_csv(rows, out)
    lines = out.getvalue().splitlines()
    assert lines[0] == ",".join(CSV_HEADER)
    assert lines[1] == "0.25,2,0.125,0.5,1;2,1.5"
    assert lines[2] == "0.25,9,nan,nan,,0"


def test_sidecar_path(tmp_path):
    assert sidecar_path(tmp_path / "sweep.csv").name == "sweep.csv.meta.json"
