import numpy as np
import pytest

from pmanifold.errors import DataFormatError
from pmanifold.io import read_points_csv, write_json, write_points_csv, write_table_csv, read_json


class TestPointsCsv:
    def test_round_trip(self, tmp_path):
        path = tmp_path / "pts.csv"
        pts = np.random.default_rng(0).normal(size=(20, 3))
        write_points_csv(str(path), pts, {"seed": 1})
        cloud = read_points_csv(str(path))
        assert np.array_equal(cloud.points, pts)

    def test_full_precision(self, tmp_path):
        path = tmp_path / "pts.csv"
        pts = np.array([[1.0 / 3.0, np.pi], [np.e, 1e-17]])
        write_points_csv(str(path), pts, None)
        assert np.array_equal(read_points_csv(str(path)).points, pts)

    def test_header_skipped(self, tmp_path):
        path = tmp_path / "pts.csv"
        path.write_text("# comment line\n1.0,2.0\n")
        cloud = read_points_csv(str(path))
        assert cloud.n == 1

    def test_ragged_rejected(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("1.0,2.0\n1.0\n")
        with pytest.raises(DataFormatError, match="columns"):
            read_points_csv(str(path))

    def test_non_numeric_rejected(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("1.0,abc\n")
        with pytest.raises(DataFormatError, match="non-numeric"):
            read_points_csv(str(path))

    def test_empty_rejected(self, tmp_path):
        path = tmp_path / "empty.csv"
        path.write_text("# only a header\n")
        with pytest.raises(DataFormatError, match="no data"):
            read_points_csv(str(path))


class TestOtherFormats:
    def test_table_csv(self, tmp_path):
        path = tmp_path / "table.csv"
        write_table_csv(str(path), ["x", "y"], [(1.0, 2.0), (3.0, 4.0)], {"k": 1})
        lines = path.read_text().splitlines()
        assert lines[0].startswith("# x,y")
        assert lines[1] == "1.0,2.0"

    def test_json_round_trip(self, tmp_path):
        path = tmp_path / "data.json"
        payload = {"a": [1.0, 2.5], "b": {"c": "text"}}
        write_json(str(path), payload)
        assert read_json(str(path)) == payload

    def test_invalid_json_rejected(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{not json")
        with pytest.raises(DataFormatError):
            read_json(str(path))
