import csv
import io
import os

import pytest

import main
from varlab.utils.decorators import EXIT_RUNTIME, EXIT_VALIDATION


def _table(text: str):
    return list(csv.DictReader(io.StringIO(text)))


def test_sequence_verdicts(workspace, capsys):
    assert main.main(["sequence", "--family", "power_log:1,-1", "--check", "lambda1,lambda3"]) == 0
    rows = _table(capsys.readouterr().out)
    assert [(r["condition"], r["verdict"]) for r in rows] == [("lambda1", "fails"), ("lambda3", "holds")]


def test_sequence_gamma_dump(workspace, capsys):
    code = main.main(["sequence", "--family", "power_log:1,-2", "--construct", "gamma",
                      "--horizon", "200000", "--dump-count", "16"])
    assert code == 0
    rows = _table(capsys.readouterr().out)
    assert any(r["condition"].startswith("gamma:") for r in rows)
    with open(workspace / "gamma.csv", encoding="utf-8") as handle:
        dumped = list(csv.DictReader(handle))
    assert len(dumped) == 16
    assert dumped[0]["n"] == "1"


def test_variation_on_grid_file(workspace, capsys):
    (workspace / "f.grid").write_text("dims 1\nsizes 3\n0 1 0\n", encoding="utf-8")
    assert main.main(["variation", "--f", "grid:f.grid", "--lambda", "harmonic", "--mode", "oracle"]) == 0
    rows = _table(capsys.readouterr().out)
    assert len(rows) == 1
    assert float(rows[0]["exact"]) == 1.5


def test_fourier_writes_out_file(workspace):
    out = workspace / "s.csv"
    code = main.main(["fourier", "--f", "square_wave(dim=1)", "--N", "8,16", "--x", "0", "--path", "both",
                      "--out", str(out)])
    assert code == 0
    with open(out, encoding="utf-8") as handle:
        rows = list(csv.DictReader(handle))
    assert [(r["N"], r["path"]) for r in rows] == [("8", "coeff"), ("8", "kernel"), ("16", "coeff"), ("16", "kernel")]
    assert all(abs(float(r["S"])) < 1e-8 for r in rows)


def test_counterexample_table(workspace, capsys):
    assert main.main(["counterexample", "--N", "32,64"]) == 0
    rows = _table(capsys.readouterr().out)
    assert [int(r["N"]) for r in rows] == [32, 64]
    assert int(rows[0]["w_size"]) == 26


def test_invalid_input_exit_codes(workspace, capsys):
    assert main.main(["counterexample", "--N", "1"]) == EXIT_VALIDATION
    assert main.main(["sequence", "--family", "geometric"]) == EXIT_VALIDATION
    assert main.main(["variation", "--f", "sign_product(dim=2)", "--mode", "exact", "--grid", "16"]) == EXIT_RUNTIME
    assert "error:" in capsys.readouterr().err


def test_unknown_command_exits_with_usage_error(workspace):
    with pytest.raises(SystemExit) as excinfo:
        main.main(["bogus"])
    assert excinfo.value.code == EXIT_VALIDATION


def test_missing_config_file(workspace):
    assert main.main(["--config", "nowhere.cfg", "sequence", "--family", "harmonic"]) == EXIT_VALIDATION


def test_experiment_with_config_file_and_overrides(workspace, capsys):
    config = workspace / "run.cfg"
    config.write_text("# growth run\nexperiment = divergence-growth\nN = 8,16\ndelta = 3\n", encoding="utf-8")
    out = workspace / "out"
    code = main.main(["--config", str(config), "experiment", "--delta", "2", "--out", str(out), "--formats", "csv"])
    assert code == 0
    directory = capsys.readouterr().out.strip().splitlines()[-1]
    assert directory.startswith(str(out))
    assert sorted(os.listdir(directory)) == ["manifest.txt", "result.csv"]
    with open(os.path.join(directory, "manifest.txt"), encoding="utf-8") as handle:
        manifest = handle.read()
    config_block = manifest.split("[config]\n")[1].split("[")[0]
    assert "delta = 2.0\n" in config_block
    assert "schedule = 8,16\n" in config_block
    assert "[config_file]" in manifest and "delta = 3\n" in manifest.split("[config_file]\n")[1]
    assert "delta = 2\n" in manifest.split("[overrides]\n")[1]

    # the run is in the ledger
    assert main.main(["experiment", "--history", "5"]) == 0
    history = _table(capsys.readouterr().out)
    assert history[0]["experiment"] == "divergence-growth"
    assert history[0]["status"] == "completed"
    assert history[0]["output_dir"] == directory


def test_manifest_config_block_reruns(workspace, capsys):
    out = workspace / "out"
    assert main.main(["experiment", "divergence-growth", "--N", "8,16", "--out", str(out), "--formats", "csv"]) == 0
    first = capsys.readouterr().out.strip().splitlines()[-1]
    manifest = os.path.join(first, "manifest.txt")
    assert main.main(["--config", manifest, "experiment"]) == 0
    second = capsys.readouterr().out.strip().splitlines()[-1]
    assert second != first
    with open(os.path.join(first, "result.csv"), encoding="utf-8") as a, \
            open(os.path.join(second, "result.csv"), encoding="utf-8") as b:
        assert a.read() == b.read()
