import asyncio
import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from datetime import datetime, timezone
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

from varlab.config import GRID_SIZE, OUTPUT_DIR, SEQUENCE_HORIZON, get_thread_count
from varlab.database import RunLedger
from varlab.exceptions import (
    ExactModeRefusedError,
    OracleRefusedError,
    PreconditionError,
    ServiceError,
    ValidationError,
)
from varlab.services.experiments import EXPERIMENTS, Experiment, Prepared, Row, Table

logger = logging.getLogger(__name__)

# Engine refusals that turn a schedule point into a failed row.
REFUSALS = (ValidationError, PreconditionError, OracleRefusedError, ExactModeRefusedError)

DEFAULT_SAMPLES = 50
DEFAULT_GRID = 64

ProgressCallback = Callable[[int, int], None]


@dataclass
class ExperimentConfig:
    experiment: str
    function: Optional[str] = None
    family: Optional[str] = None
    schedule: Optional[List[int]] = None
    d: int = 2
    delta: float = 2.0
    output_dir: str = OUTPUT_DIR
    seed: int = 0
    samples: Optional[int] = None
    grid: Optional[int] = None
    horizon: int = SEQUENCE_HORIZON
    x0: Optional[Tuple[float, ...]] = None
    estimate_error: bool = False

    @property
    def definition(self) -> Experiment:
        experiment = EXPERIMENTS.get(self.experiment)
        if experiment is None:
            raise ValidationError(f"Unknown experiment {self.experiment!r}; expected one of {sorted(EXPERIMENTS)}.")
        return experiment

    def resolved(self) -> "ExperimentConfig":
        """Copy with unset fields taken from the experiment's defaults."""
        defaults = self.definition.defaults
        changes: Dict[str, Any] = {}
        for key in ("function", "family", "schedule", "grid", "samples"):
            if getattr(self, key) is None and key in defaults:
                changes[key] = defaults[key]
        resolved = replace(self, **changes)
        if resolved.grid is None:
            resolved.grid = min(DEFAULT_GRID, GRID_SIZE)
        if resolved.samples is None:
            resolved.samples = DEFAULT_SAMPLES
        if resolved.schedule is None:
            resolved.schedule = []
        return resolved

    def validate(self) -> None:
        self.definition
        if self.experiment in ("convergence-demo", "divergence-growth", "modulus-class"):
            if not self.schedule:
                raise ValidationError("The N schedule is empty.")
            if any(b <= a for a, b in zip(self.schedule, self.schedule[1:])):
                raise ValidationError(f"The N schedule must increase: {self.schedule}.")
            if self.schedule[0] < 1:
                raise ValidationError(f"Schedule entries must be positive: {self.schedule}.")
        if not 1 <= self.d <= 3:
            raise ValidationError(f"d must lie in 1..3, got {self.d}.")
        if not self.delta > 1:
            raise ValidationError(f"delta must exceed 1, got {self.delta}.")
        if self.samples is not None and self.samples < 1:
            raise ValidationError(f"samples must be positive, got {self.samples}.")
        if self.grid is not None and self.grid < 2:
            raise ValidationError(f"grid must be >= 2, got {self.grid}.")
        if self.horizon < 2:
            raise ValidationError(f"horizon must be >= 2, got {self.horizon}.")

    def echo(self) -> Dict[str, str]:
        """Flat key=value view, recorded in the manifest and the run ledger."""
        out = {}
        for key, value in asdict(self).items():
            if value is None:
                continue
            if isinstance(value, (list, tuple)):
                value = ",".join(str(v) for v in value)
            out[key] = str(value)
        return out


@dataclass
class SweepResult:
    config: ExperimentConfig
    columns: List[str]
    rows: List[Row]
    plot: Tuple[str, str, bool, bool]
    summary: Dict[str, Any] = field(default_factory=dict)
    tables: Dict[str, Table] = field(default_factory=dict)
    started: str = ""
    finished: str = ""
    runtime_s: float = 0.0
    provenance: Dict[str, Dict[str, Any]] = field(default_factory=dict)

    @property
    def failed_rows(self) -> List[Row]:
        return [r for r in self.rows if r.get("status") == "failed"]

    def column(self, name: str) -> List[Any]:
        return [r.get(name) for r in self.rows]


def _failed_row(columns: Sequence[str], item: Any, error: Exception) -> Row:
    row: Row = {c: math.nan for c in columns}
    row[columns[0]] = item
    row["status"] = "failed"
    row["reason"] = str(error)
    return row


def _run_point(experiment: Experiment, config: ExperimentConfig, prepared: Prepared, item: Any) -> List[Row]:
    try:
        return experiment.run_point(config, prepared, item)
    except REFUSALS as e:
        logger.warning(f"{experiment.name}: point {item} refused: {e}")
        return [_failed_row(experiment.columns, item, e)]
    except Exception as e:
        logger.exception(f"{experiment.name}: unexpected error at point {item}")
        raise ServiceError(f"Unexpected error at {experiment.name} point {item}: {type(e).__name__}: {e}") from e


def _assemble(experiment: Experiment, config: ExperimentConfig, prepared: Prepared,
              chunks: Sequence[List[Row]], started: str, t0: float) -> SweepResult:
    rows = [row for chunk in chunks for row in chunk]
    experiment.finish(config, prepared, rows)
    columns = list(experiment.columns)
    if any(r.get("status") == "failed" for r in rows):
        columns += ["status", "reason"]
        for r in rows:
            r.setdefault("status", "ok")
            r.setdefault("reason", "")
    finished = datetime.now(timezone.utc).isoformat()
    return SweepResult(config, columns, rows, experiment.plot, prepared.summary, prepared.tables,
                       started, finished, time.perf_counter() - t0)


def _prepared_config(config: ExperimentConfig) -> Tuple[Experiment, ExperimentConfig]:
    config = config.resolved()
    config.validate()
    return config.definition, config


def run_experiment(config: ExperimentConfig, progress: Optional[ProgressCallback] = None) -> SweepResult:
    """Runs every schedule point in order in the calling thread."""
    experiment, config = _prepared_config(config)
    started, t0 = datetime.now(timezone.utc).isoformat(), time.perf_counter()
    prepared = experiment.prepare(config)
    items = experiment.items(config, prepared)
    chunks = []
    for done, item in enumerate(items, start=1):
        chunks.append(_run_point(experiment, config, prepared, item))
        if progress:
            progress(done, len(items))
    return _assemble(experiment, config, prepared, chunks, started, t0)


class ExperimentService:
    """Orchestrates experiment runs: validation, parallel schedule points, run ledger updates."""

    def __init__(self, ledger: Optional[RunLedger] = None):
        self._ledger = ledger

    async def run(self, config: ExperimentConfig, progress: Optional[ProgressCallback] = None) -> Tuple[SweepResult, Optional[int]]:
        """Returns the result and the ledger run id (None without a ledger)."""
        experiment, config = _prepared_config(config)
        run_id = None
        if self._ledger:
            echo = ";".join(f"{k}={v}" for k, v in config.echo().items())
            run_id = await self._ledger.create_run_record(config.experiment, config.seed, echo)
        try:
            if run_id is not None:
                await self._ledger.update_run_status(run_id, 'running')  # type: ignore[union-attr]
            result = await self._execute(experiment, config, progress)
            if run_id is not None:
                await self._ledger.update_run_status(run_id, 'completed', row_count=len(result.rows))  # type: ignore[union-attr]
            return result, run_id
        except (ValidationError, PreconditionError, ServiceError) as e:
            logger.error(f"Experiment {config.experiment} failed: {e}", exc_info=isinstance(e, ServiceError))
            await self._mark_failed(run_id, str(e))
            raise
        except Exception as e:
            logger.exception(f"Unexpected error in experiment {config.experiment}")
            await self._mark_failed(run_id, f"{type(e).__name__}: {e}")
            raise ServiceError(f"An unexpected error occurred during {config.experiment}: {type(e).__name__}") from e

    async def _execute(self, experiment: Experiment, config: ExperimentConfig,
                       progress: Optional[ProgressCallback]) -> SweepResult:
        loop = asyncio.get_running_loop()
        started, t0 = datetime.now(timezone.utc).isoformat(), time.perf_counter()
        prepared = await loop.run_in_executor(None, experiment.prepare, config)
        items = experiment.items(config, prepared)
        workers = get_thread_count()
        logger.info(f"Running {experiment.name}: {len(items)} points on {workers} worker(s).")
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = [loop.run_in_executor(pool, _run_point, experiment, config, prepared, item) for item in items]
            # counted on the loop thread as points finish
            for done, finished in enumerate(asyncio.as_completed(futures), start=1):
                await finished
                if progress:
                    progress(done, len(items))
            # gather keeps schedule order whatever the completion order
            chunks = await asyncio.gather(*futures)
        return _assemble(experiment, config, prepared, chunks, started, t0)

    async def _mark_failed(self, run_id: Optional[int], message: str) -> None:
        if run_id is None or self._ledger is None:
            return
        try:
            await self._ledger.update_run_status(run_id, 'failed', error_message=message)
        except Exception as e:
            logger.error(f"Could not record failure for run {run_id}: {e}")

    async def record_outputs(self, run_id: Optional[int], output_dir: str) -> None:
        if run_id is not None and self._ledger is not None:
            await self._ledger.update_run_status(run_id, 'completed', output_dir=output_dir)
