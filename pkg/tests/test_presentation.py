import math
import os

import numpy as np
import pytest

from varlab.exceptions import ValidationError
from varlab.presentation.outputs import emit_outputs, run_directory
from varlab.presentation.svg import plot_points, render_polyline
from varlab.presentation.tables import csv_text, format_value, manifest_text, read_csv, save_csv, two_column_rows
from varlab.services.experiment_service import ExperimentConfig, SweepResult
from varlab.services.experiments import Table

STARTED = "2024-05-17T10:20:30+00:00"


def _result(tmp_path, rows=None) -> SweepResult:
    config = ExperimentConfig("divergence-growth", family="harmonic", schedule=[8, 16], output_dir=str(tmp_path))
    rows = rows if rows is not None else [{"N": 8, "S_origin": 0.5}, {"N": 16, "S_origin": 0.75}]
    extra = Table(["n", "v_1"], [{"n": 1, "v_1": 2.0}])
    return SweepResult(config, ["N", "S_origin"], rows, ("N", "S_origin", True, False),
                       summary={"s_origin_increasing": True}, tables={"modulus": extra},
                       started=STARTED, finished=STARTED, runtime_s=1.25,
                       provenance={"file_values": {"delta": "3"}, "overrides": {"delta": 2.0}})


@pytest.mark.parametrize("value,text", [
    (None, ""),
    (True, "1"),
    (7, "7"),
    (0.1, "0.10000000000000001"),
    (math.inf, "inf"),
    (-math.inf, "-inf"),
    (math.nan, "nan"),
    (np.float64(2.5), "2.5"),
    (np.int64(3), "3"),
    ((1, 2.5), "1 2.5"),
    ("ok", "ok"),
])
def test_format_value(value, text):
    assert format_value(value) == text


def test_floats_read_back_unchanged(tmp_path, rng):
    values = rng.standard_normal(20) * 10.0 ** rng.integers(-300, 300, 20)
    path = str(tmp_path / "values.csv")
    save_csv(path, ["n", "value"], two_column_rows(values))
    back = read_csv(path)
    assert [r["n"] for r in back] == list(range(1, 21))
    assert [r["value"] for r in back] == list(values)


def test_csv_is_deterministic_with_lf_endings():
    rows = [{"N": 8, "S": 0.25, "reason": ""}, {"N": 16, "S": None}]
    text = csv_text(["N", "S", "reason"], rows)
    assert text == csv_text(["N", "S", "reason"], rows)
    assert "\r" not in text
    assert text == "N,S,reason\n8,0.25,\n16,,\n"


def test_plot_skips_unplottable_points():
    rows = [{"N": 8, "e": 1.0}, {"N": 16, "e": math.nan}, {"N": 32, "e": 0.0}, {"N": 64, "e": 0.25}, {"N": 128}]
    xs, ys = plot_points(rows, "N", "e", logx=True, logy=True)
    # NaN, the zero on a log axis and the missing cell are dropped
    np.testing.assert_array_equal(xs, [8.0, 64.0])
    np.testing.assert_array_equal(ys, [1.0, 0.25])
    xs, _ = plot_points(rows, "N", "e")
    assert xs.tolist() == [8.0, 32.0, 64.0]


def test_plot_is_a_deterministic_svg_document():
    rows = [{"N": 8, "e": 1.0}, {"N": 64, "e": 0.25}]
    svg = render_polyline(rows, "N", "e", logx=True, logy=True, title="decay")
    assert "<svg" in svg and svg.rstrip().endswith("</svg>")
    assert "decay" in svg
    assert svg == render_polyline(rows, "N", "e", logx=True, logy=True, title="decay")


def test_plot_without_points_is_still_a_document():
    svg = render_polyline([], "N", "e", logx=True)
    assert "<svg" in svg and svg.rstrip().endswith("</svg>")


def test_manifest_sections():
    text = manifest_text({"experiment": "gamma-inclusion", "d": "2"}, {"violations": 0}, STARTED, STARTED, 0.5,
                         file_values={"d": "3"}, overrides={"d": 2}, files=["result.csv"])
    lines = text.splitlines()
    assert lines[0].startswith("# varlab")
    assert lines.index("[config]") < lines.index("[config_file]") < lines.index("[overrides]") < lines.index("[run]")
    assert "runtime_s = 0.500" in lines
    assert "files = result.csv" in lines
    assert lines[-1] == "violations = 0"


def test_run_directory_avoids_collisions(tmp_path):
    first = run_directory(str(tmp_path), "divergence-growth", STARTED)
    assert first.endswith(os.path.join("divergence-growth", "20240517T102030"))
    os.makedirs(first)
    assert run_directory(str(tmp_path), "divergence-growth", STARTED) == first + "-1"


def test_emit_outputs_writes_every_file(tmp_path):
    directory = emit_outputs(_result(tmp_path))
    assert sorted(os.listdir(directory)) == ["manifest.txt", "modulus.csv", "plot.svg", "result.csv"]
    assert read_csv(os.path.join(directory, "result.csv")) == [{"N": 8, "S_origin": 0.5}, {"N": 16, "S_origin": 0.75}]
    with open(os.path.join(directory, "manifest.txt"), encoding="utf-8") as handle:
        manifest = handle.read()
    assert "[config_file]\ndelta = 3\n[overrides]\ndelta = 2\n" in manifest
    assert "s_origin_increasing = 1" in manifest


def test_emit_outputs_csv_only(tmp_path):
    directory = emit_outputs(_result(tmp_path), formats=["csv"])
    assert "plot.svg" not in os.listdir(directory)


def test_emit_outputs_refuses_bad_requests(tmp_path):
    with pytest.raises(ValidationError):
        emit_outputs(_result(tmp_path), formats=["png"])
    with pytest.raises(ValidationError):
        emit_outputs(_result(tmp_path, rows=[]))
