import asyncio

import pytest

from varlab.database import RunLedger


@pytest.fixture
def ledger_path(tmp_path):
    path = str(tmp_path / "ledger.db")
    RunLedger.sync_init_db(path)
    return path


def test_run_lifecycle(ledger_path):
    async def scenario():
        ledger = RunLedger(ledger_path)
        try:
            first = await ledger.create_run_record("divergence-growth", 0, "d=2")
            second = await ledger.create_run_record("gamma-inclusion", 7, "d=2;samples=3")
            await ledger.update_run_status(first, 'running')
            await ledger.update_run_status(first, 'completed', row_count=5)
            await ledger.update_run_status(first, 'completed', output_dir="results/x")
            await ledger.update_run_status(second, 'failed', error_message="boom")
            return await ledger.get_recent_runs(5), await ledger.get_run_status_counts()
        finally:
            await ledger.close()

    runs, counts = asyncio.run(scenario())
    assert [r["experiment"] for r in runs] == ["gamma-inclusion", "divergence-growth"]
    assert runs[0]["error_message"] == "boom"
    # later updates keep earlier row counts
    assert runs[1]["row_count"] == 5
    assert runs[1]["output_dir"] == "results/x"
    assert counts == {"completed": 1, "failed": 1}


def test_unknown_status_is_rejected(ledger_path):
    async def scenario():
        ledger = RunLedger(ledger_path)
        try:
            run_id = await ledger.create_run_record("modulus-class", 0, "")
            await ledger.update_run_status(run_id, 'paused')
        finally:
            await ledger.close()

    with pytest.raises(ValueError):
        asyncio.run(scenario())


def test_schema_init_is_idempotent(ledger_path):
    RunLedger.sync_init_db(ledger_path)

    async def scenario():
        ledger = RunLedger(ledger_path)
        try:
            return await ledger.get_recent_runs()
        finally:
            await ledger.close()

    assert asyncio.run(scenario()) == []
