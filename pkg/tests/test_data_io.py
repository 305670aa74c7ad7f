import json
import math

import numpy as np
import pytest

from data_io import (
    SCHEMA_VERSION, csv_text, read_csv, read_dataset, read_report, to_jsonable, write_csv,
    write_dataset, write_report,
)
from errors import ValidationError
from estimation import FringeDataset, RabiDataset
from ion_physics import UNITS


def test_csv_header_and_full_precision(tmp_path):
    path = write_csv(tmp_path / "curve.csv", {"energy_nj": [0.0, 1.0 / 3.0], "p_down": [0.1, 0.2]})
    lines = path.read_text().splitlines()
    assert lines[0] == "energy_nj,p_down"
    columns = read_csv(path)
    assert columns["energy_nj"][1] == 1.0 / 3.0


def test_csv_text_rejects_ragged_columns():
    with pytest.raises(ValidationError):
        csv_text({"a": [1.0, 2.0], "b": [1.0]})


def test_rabi_dataset_survives_a_file(tmp_path):
    data = RabiDataset(energy=np.array([0.0, 1e-9, 2e-9]), p_down=np.array([0.15, 0.2, 0.31]),
                       repetitions=np.full(3, 1000))
    read = read_dataset(write_dataset(tmp_path / "rabi.csv", data))
    assert isinstance(read, RabiDataset)
    assert read.energy == pytest.approx(data.energy, rel=1e-15)
    np.testing.assert_array_equal(read.p_down, data.p_down)


def test_fringe_dataset_is_written_in_hz_and_us(tmp_path):
    data = FringeDataset(wait_time=np.array([30.864e-6] * 4),
                         detuning=UNITS.hz_to_angular(np.array([1.5e8, 1.5e8 + 4e3, 1.5e8 + 8e3, 1.5e8 + 12e3])),
                         p_up=np.array([0.2, 0.5, 0.8, 0.5]), repetitions=np.full(4, 1000))
    path = write_dataset(tmp_path / "fringe.csv", data)
    columns = read_csv(path)
    assert columns["tau_us"][0] == pytest.approx(30.864)
    assert columns["detuning_hz"][1] == pytest.approx(1.5e8 + 4e3)
    read = read_dataset(path)
    assert isinstance(read, FringeDataset)
    assert read.detuning == pytest.approx(data.detuning, rel=1e-15)


def test_empty_and_missing_files(tmp_path):
    empty = tmp_path / "empty.csv"
    empty.write_text("")
    with pytest.raises(ValidationError):
        read_csv(empty)
    header_only = tmp_path / "header.csv"
    header_only.write_text("energy_nj,p_down,repetitions\n")
    with pytest.raises(ValidationError):
        read_csv(header_only)
    with pytest.raises(ValidationError):
        read_csv(tmp_path / "absent.csv")


def test_non_numeric_cells(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("energy_nj,p_down,repetitions\n1.0,abc,100\n")
    with pytest.raises(ValidationError):
        read_csv(path)


def test_short_rows_are_rejected(tmp_path):
    path = tmp_path / "short.csv"
    path.write_text("energy_nj,p_down,repetitions\n1.0,0.2,100\n2.0,0.3\n")
    with pytest.raises(ValidationError):
        read_csv(path)


def test_padded_header_and_blank_lines(tmp_path):
    path = tmp_path / "padded.csv"
    path.write_text("energy_nj, p_down, repetitions\n\n1.0, 0.1, 100\n2.0, 0.30000000000000004, 100\n")
    columns = read_csv(path)
    assert list(columns) == ["energy_nj", "p_down", "repetitions"]
    assert columns["p_down"][1] == 0.1 + 0.2


def test_csv_text_matches_the_file(tmp_path):
    columns = {"tau_us": [30.864, 30.865], "visibility": [0.41, 1.0 / 7.0]}
    assert csv_text(columns) == write_csv(tmp_path / "v.csv", columns).read_text()


def test_unknown_columns(tmp_path):
    path = write_csv(tmp_path / "other.csv", {"x": [1.0], "y": [2.0]})
    with pytest.raises(ValidationError):
        read_dataset(path)


def test_report_envelope(tmp_path):
    path = tmp_path / "report.json"
    text = write_report(path, "fit", {"model": "rabi"}, {"value": np.float64(0.5), "stderr": math.inf,
                                                         "flags": np.array([True, False])})
    report = json.loads(text)
    assert report["schema_version"] == SCHEMA_VERSION
    assert report["command"] == "fit"
    assert report["results"]["stderr"] is None
    assert read_report(path) == report


def test_report_schema_is_checked(tmp_path):
    path = tmp_path / "old.json"
    path.write_text(json.dumps({"schema_version": 0}))
    with pytest.raises(ValidationError):
        read_report(path)


def test_to_jsonable_handles_numpy_scalars():
    assert to_jsonable({"n": np.int64(3), "ok": np.bool_(True), "v": [np.float32(0.25)]}) == \
        {"n": 3, "ok": True, "v": [0.25]}
