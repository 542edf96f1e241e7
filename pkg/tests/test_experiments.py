import asyncio
import math
import threading

import pytest

from varlab.database import RunLedger
from varlab.engines.sequences import make_lambda
from varlab.exceptions import ValidationError
from varlab.presentation.tables import csv_text
from varlab.services.experiment_service import ExperimentConfig, ExperimentService, run_experiment
from varlab.services.experiments import COUNTEREXAMPLE_COLUMNS, EXPERIMENTS, counterexample_row


def test_registry_names():
    assert sorted(EXPERIMENTS) == ["convergence-demo", "divergence-growth", "gamma-inclusion", "modulus-class"]


def test_config_takes_experiment_defaults():
    config = ExperimentConfig("convergence-demo").resolved()
    assert config.function == "jump_line(dim=2)"
    assert config.schedule == [8, 16, 32, 64, 128, 256]
    assert config.samples > 0 and config.grid >= 2


@pytest.mark.parametrize("changes", [
    {"schedule": [16, 8]},
    {"schedule": [8, 8]},
    {"schedule": []},
    {"d": 4},
    {"delta": 1.0},
    {"samples": 0},
])
def test_config_validation(changes):
    config = ExperimentConfig("divergence-growth", family="harmonic", schedule=[8, 16])
    for key, value in changes.items():
        setattr(config, key, value)
    with pytest.raises(ValidationError):
        config.validate()


def test_unknown_experiment():
    with pytest.raises(ValidationError):
        ExperimentConfig("fastest-growth").validate()


def test_counterexample_row_columns():
    row = counterexample_row(2, 2.0, 32, make_lambda("power_log", {"a": 1.0, "b": -1.0}, horizon=4096))
    assert list(row) == COUNTEREXAMPLE_COLUMNS
    assert row["N_delta"] == 4
    assert row["w_size"] == 0 + 3 + 8 + 15


def test_divergence_growth_sweep(tmp_path):
    config = ExperimentConfig("divergence-growth", schedule=[8, 32, 128], output_dir=str(tmp_path))
    result = run_experiment(config)
    assert result.column("N") == [8, 32, 128]
    assert result.columns == COUNTEREXAMPLE_COLUMNS
    assert result.summary["s_origin_increasing"]
    assert "pearson_r" in result.summary
    assert not result.failed_rows


def test_refused_point_becomes_failed_row(tmp_path):
    config = ExperimentConfig("divergence-growth", schedule=[1, 8], output_dir=str(tmp_path))
    progress = []
    result = run_experiment(config, progress=lambda done, total: progress.append((done, total)))
    assert progress == [(1, 2), (2, 2)]
    assert result.columns[-2:] == ["status", "reason"]
    failed = result.failed_rows
    assert len(failed) == 1
    assert failed[0]["N"] == 1
    assert math.isnan(failed[0]["S_origin"])
    assert "N must be" in failed[0]["reason"]
    assert result.rows[1]["status"] == "ok"


def test_convergence_demo_error_shrinks(tmp_path):
    config = ExperimentConfig("convergence-demo", schedule=[8, 32, 128], output_dir=str(tmp_path))
    result = run_experiment(config)
    errors = result.column("error")
    assert errors[-1] < errors[0]
    assert result.summary["lambda1"] == "holds"
    assert result.summary["final_over_initial"] < 1


def test_gamma_inclusion_has_no_violations(tmp_path):
    config = ExperimentConfig("gamma-inclusion", samples=2, horizon=200_000, output_dir=str(tmp_path))
    result = run_experiment(config)
    # index sets {1}, {2}, {1,2} per sample
    assert len(result.rows) == 6
    assert result.summary["checks_passed"]
    assert result.summary["violations"] == 0


def test_service_records_runs(tmp_path):
    path = str(tmp_path / "runs.db")
    RunLedger.sync_init_db(path)

    async def scenario():
        ledger = RunLedger(path)
        try:
            service = ExperimentService(ledger)
            result, run_id = await service.run(ExperimentConfig("divergence-growth", schedule=[8, 16, 32, 64]))
            await service.record_outputs(run_id, "somewhere")
            with pytest.raises(ValidationError):
                await service.run(ExperimentConfig("divergence-growth", schedule=[16, 8]))
            return result, await ledger.get_recent_runs(5)
        finally:
            await ledger.close()

    result, runs = asyncio.run(scenario())
    # thread pool results come back in schedule order
    assert result.column("N") == [8, 16, 32, 64]
    assert len(runs) == 1
    assert runs[0]["status"] == "completed"
    assert runs[0]["row_count"] == 4
    assert runs[0]["output_dir"] == "somewhere"


def test_modulus_class_square_root_growth(tmp_path):
    config = ExperimentConfig("modulus-class", grid=256, schedule=[8, 32, 128], output_dir=str(tmp_path))
    result = run_experiment(config)
    assert result.summary["var"] == "holds"
    assert not result.summary["delta_degenerate"]
    assert result.summary["delta_delta_over_n_decreasing"]
    assert 0.25 < result.summary["fitted_exponent_axis0"] < 0.75
    assert len(result.tables["modulus"].rows) == 64
    errors = result.column("error")
    assert errors[-1] < errors[0]


@pytest.mark.parametrize("experiment,changes", [
    ("divergence-growth", {"schedule": [8, 16, 32, 64]}),
    ("gamma-inclusion", {"samples": 3, "horizon": 200_000}),
])
def test_results_do_not_depend_on_thread_count(monkeypatch, experiment, changes):
    texts = []
    for threads in ("1", "8"):
        monkeypatch.setenv("VARLAB_THREADS", threads)
        result, _ = asyncio.run(ExperimentService().run(ExperimentConfig(experiment, **changes)))
        texts.append(csv_text(result.columns, result.rows))
    assert texts[0] == texts[1]


def test_service_progress_counts_every_point_once(monkeypatch):
    monkeypatch.setenv("VARLAB_THREADS", "4")
    reports = []

    def record(done, total):
        reports.append((done, total, threading.get_ident()))

    config = ExperimentConfig("divergence-growth", schedule=[8, 16, 32, 64, 128])
    result, _ = asyncio.run(ExperimentService().run(config, progress=record))
    assert [(done, total) for done, total, _ in reports] == [(i, 5) for i in range(1, 6)]
    # reported from the event loop thread, never from the workers
    assert {ident for _, _, ident in reports} == {threading.get_ident()}
    assert result.column("N") == [8, 16, 32, 64, 128]
