import logging

import numpy as np
import pytest

from varlab.engines.sequences import make_lambda

# Weight sequences shared across tests; short horizons keep materialization cheap.
SHORT_HORIZON = 4096


@pytest.fixture(scope="session")
def harmonic():
    return make_lambda("harmonic", horizon=SHORT_HORIZON)


@pytest.fixture(scope="session")
def unit_weights():
    return make_lambda("constant", horizon=SHORT_HORIZON)


@pytest.fixture(scope="session")
def sqrt_weights():
    return make_lambda("power_log", {"a": 0.5, "b": 0.0}, horizon=SHORT_HORIZON)


@pytest.fixture
def rng():
    return np.random.default_rng(20240517)


@pytest.fixture
def workspace(tmp_path, monkeypatch):
    """Runs the CLI inside a scratch directory with its own run ledger."""
    import main

    monkeypatch.chdir(tmp_path)
    monkeypatch.setattr(main, "DATABASE_FILE", str(tmp_path / "runs.db"))
    logging.getLogger("varlab").setLevel(logging.INFO)
    return tmp_path
