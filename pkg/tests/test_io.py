"""Tests for CSV schemas and the JSON model artifact."""
import json

import numpy as np
import pytest

from vcfam import __version__
from vcfam.errors import DataError
from vcfam.fdata import RawCurves
from vcfam.io import (
    FORMAT_VERSION,
    load_artifact,
    load_model,
    match_ids,
    read_predictors,
    read_responses,
    save_model,
    write_predictions,
    write_predictors,
    write_responses,
    write_table,
)
from vcfam.pipeline import PipelineOptions, fit_pipeline, predict_pipeline

FAST = dict(
    n_components=2,
    m1=5,
    m2=4,
    lambda_grid_zeta=(1e-2,),
    lambda_grid_t=(1e-2,),
)


def make_curves(seed=0, n=7, r=9):
    rng = np.random.default_rng(seed)
    grid = np.linspace(0.0, 1.0, r)
    # values chosen to stress the 17-digit formatter
    values = rng.standard_normal((n, r)) * np.array([1e-8, 1.0, 1e7])[rng.integers(0, 3, (n, r))]
    values[0, 0] = 1.0 / 3.0
    values[0, 1] = -0.1
    return RawCurves(grid, values)


class TestPredictorTable:
    def test_round_trip_is_bit_exact(self, tmp_path):
        curves = make_curves()
        path = str(tmp_path / "pred.csv")
        write_predictors(path, curves, ids=["a", "b", "c", "d", "e", "f", "g"])
        ids, back = read_predictors(path)
        assert ids == ["a", "b", "c", "d", "e", "f", "g"]
        np.testing.assert_array_equal(back.grid, curves.grid)
        np.testing.assert_array_equal(back.values, curves.values)

    def test_default_ids_count_from_one(self, tmp_path):
        curves = make_curves(n=3)
        path = str(tmp_path / "pred.csv")
        write_predictors(path, curves)
        ids, _ = read_predictors(path)
        assert ids == ["1", "2", "3"]

    def test_rfc4180_line_endings_and_line_count(self, tmp_path):
        curves = make_curves(n=5)
        path = str(tmp_path / "pred.csv")
        write_predictors(path, curves)
        raw = open(path, "rb").read()
        assert raw.endswith(b"\r\n")
        assert raw.count(b"\r\n") == 6  # header + five curves
        assert b"\n" not in raw.replace(b"\r\n", b"")

    def test_header_is_the_grid(self, tmp_path):
        curves = make_curves(n=2, r=4)
        path = str(tmp_path / "pred.csv")
        write_predictors(path, curves)
        header = open(path).readline().strip().split(",")
        assert header[0] == "id"
        np.testing.assert_array_equal([float(h) for h in header[1:]], curves.grid)

    def test_header_only_file_gives_zero_curves(self, tmp_path):
        path = str(tmp_path / "pred.csv")
        write_predictors(path, RawCurves(np.linspace(0, 1, 5), np.empty((0, 5))))
        ids, back = read_predictors(path)
        assert ids == [] and back.n_curves == 0 and back.grid.size == 5

    def test_rejects_bad_inputs(self, tmp_path):
        path = str(tmp_path / "bad.csv")
        with pytest.raises(DataError):
            read_predictors(str(tmp_path / "missing.csv"))
        open(path, "w").write("")
        with pytest.raises(DataError, match="header"):
            read_predictors(path)
        open(path, "w").write("id,0.0,1.0\r\n1,0.5\r\n")
        with pytest.raises(DataError, match="row 2"):
            read_predictors(path)
        open(path, "w").write("id,0.0,1.0\r\n1,0.5,oops\r\n")
        with pytest.raises(DataError, match="not a number"):
            read_predictors(path)
        open(path, "w").write("id,1.0,0.5\r\n")
        with pytest.raises(DataError, match="increasing"):
            read_predictors(path)
        open(path, "w").write("curve,0.0,1.0\r\n")
        with pytest.raises(DataError, match="'id'"):
            read_predictors(path)
        with pytest.raises(DataError, match="ids"):
            write_predictors(path, make_curves(n=3), ids=["1", "2"])


class TestResponseTable:
    def test_round_trip_is_bit_exact(self, tmp_path):
        rng = np.random.default_rng(1)
        y, t = rng.standard_normal(6), rng.random(6)
        path = str(tmp_path / "resp.csv")
        write_responses(path, range(1, 7), y, t)
        ids, y2, t2 = read_responses(path)
        assert ids == [str(i) for i in range(1, 7)]
        np.testing.assert_array_equal(y2, y)
        np.testing.assert_array_equal(t2, t)

    def test_t_only_schema(self, tmp_path):
        path = str(tmp_path / "t.csv")
        open(path, "w", newline="").write("id,t\r\n1,0.25\r\n2,0.5\r\n")
        ids, y, t = read_responses(path, require_y=False)
        assert ids == ["1", "2"] and y is None
        np.testing.assert_array_equal(t, [0.25, 0.5])
        with pytest.raises(DataError, match="id,y,t"):
            read_responses(path)

    def test_header_must_match(self, tmp_path):
        path = str(tmp_path / "resp.csv")
        open(path, "w", newline="").write("id,t,y\r\n1,0.25,2.0\r\n")
        with pytest.raises(DataError, match="header"):
            read_responses(path)

    def test_match_ids(self):
        match_ids(["1", "2"], ["1", "2"])
        with pytest.raises(DataError, match="disagree"):
            match_ids(["1", "2"], ["2", "1"], "a.csv", "b.csv")


class TestWriters:
    def test_seventeen_digit_floats(self, tmp_path):
        path = str(tmp_path / "t.csv")
        write_responses(path, ["1"], [0.1], [2.0 / 3.0])
        text = open(path).read()
        assert "0.10000000000000001" in text
        assert "0.66666666666666663" in text

    def test_predictions_schema(self, tmp_path):
        path = str(tmp_path / "p.csv")
        write_predictions(path, ["7", "8"], [1.5, -2.5])
        lines = open(path).read().splitlines()
        assert lines[0] == "id,prediction"
        assert lines[1] == "7,1.5"

    def test_generic_table_mixes_types(self, tmp_path):
        path = str(tmp_path / "t.csv")
        write_table(path, ["model", "value"], [["flm", 0.5], ["vcfam", np.float64(1.25)]])
        lines = open(path).read().splitlines()
        assert lines == ["model,value", "flm,0.5", "vcfam,1.25"]

    def test_atomic_write_leaves_no_temp_files(self, tmp_path):
        path = str(tmp_path / "x.csv")
        write_predictions(path, ["1"], [1.0])
        write_predictions(path, ["1"], [2.0])  # overwrite in place
        assert sorted(p.name for p in tmp_path.iterdir()) == ["x.csv"]
        assert "2" in open(path).read()


def fit_small(model="vcfam", seed=3, n=60):
    rng = np.random.default_rng(seed)
    grid = np.linspace(0, 1, 12)
    curves = RawCurves(
        grid,
        rng.standard_normal((n, 1)) * np.sin(np.pi * grid)
        + rng.standard_normal((n, 1)) * grid
        + 0.05 * rng.standard_normal((n, 12)),
    )
    t = rng.random(n)
    y = np.sin(2 * np.pi * t) + rng.standard_normal(n) * 0.1
    options = PipelineOptions(model=model, t_domain=(0.0, 1.0), **FAST)
    return curves, t, y, fit_pipeline(curves, t, y, options)


class TestModelArtifact:
    @pytest.mark.parametrize("model", ["vcfam", "vcflm", "fam1", "fam2", "flm"])
    def test_round_trip_reproduces_predictions(self, tmp_path, model):
        curves, t, y, fitted = fit_small(model)
        path = str(tmp_path / "m.json")
        save_model(path, fitted, training_grid=curves.grid)
        loaded = load_model(path)
        assert loaded.kind == model
        need_t = model in ("vcfam", "vcflm", "fam1")
        args = (curves, t) if need_t else (curves,)
        np.testing.assert_array_equal(
            predict_pipeline(loaded, *args), predict_pipeline(fitted, *args)
        )

    def test_save_load_save_is_byte_stable(self, tmp_path):
        curves, _, _, fitted = fit_small()
        p1, p2 = str(tmp_path / "a.json"), str(tmp_path / "b.json")
        stamp = "2026-01-01T00:00:00+00:00"
        save_model(p1, fitted, training_grid=curves.grid, seed=3, created=stamp)
        save_model(p2, load_model(p1), training_grid=curves.grid, seed=3, created=stamp)
        assert open(p1, "rb").read() == open(p2, "rb").read()

    def test_provenance_and_grid_fields(self, tmp_path):
        curves, _, _, fitted = fit_small()
        path = str(tmp_path / "m.json")
        save_model(path, fitted, training_grid=curves.grid, seed=11)
        document = load_artifact(path)
        assert document["format_version"] == FORMAT_VERSION
        assert document["provenance"]["tool_version"] == __version__
        assert document["provenance"]["seed"] == 11
        assert "T" in document["provenance"]["created"]
        np.testing.assert_array_equal(document["training_grid"], curves.grid)

    def test_rejects_bad_artifacts(self, tmp_path):
        curves, _, _, fitted = fit_small()
        path = str(tmp_path / "m.json")
        save_model(path, fitted)
        document = json.load(open(path))
        document["format_version"] = 99
        open(path, "w").write(json.dumps(document))
        with pytest.raises(DataError, match="format version"):
            load_model(path)
        open(path, "w").write("{not json")
        with pytest.raises(DataError, match="JSON"):
            load_model(path)
        open(path, "w").write('"just a string"')
        with pytest.raises(DataError, match="not supported|object"):
            load_model(path)
        del document["format_version"]
        open(path, "w").write(json.dumps(document))
        with pytest.raises(DataError):
            load_model(path)
        with pytest.raises(DataError, match="cannot read"):
            load_model(str(tmp_path / "missing.json"))

    def test_missing_model_section_is_malformed(self, tmp_path):
        curves, _, _, fitted = fit_small()
        path = str(tmp_path / "m.json")
        save_model(path, fitted)
        document = json.load(open(path))
        del document["model"]["theta"]
        open(path, "w").write(json.dumps(document))
        with pytest.raises(DataError, match="malformed"):
            load_model(path)
