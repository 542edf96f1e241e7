import argparse
import logging
from typing import Optional

from varlab.config import OUTPUT_DIR, SEQUENCE_HORIZON
from varlab.context import RunContext
from varlab.database import RunLedger
from varlab.exceptions import ValidationError
from varlab.handlers.progress import SweepProgress
from varlab.handlers.utils import Subcommand, emit_table
from varlab.helpers import parse_float_list, parse_int_list
from varlab.presentation import FORMATS, emit_outputs
from varlab.services.experiment_service import ExperimentConfig, ExperimentService
from varlab.services.experiments import EXPERIMENTS
from varlab.utils.decorators import exit_on_error, timed

logger = logging.getLogger(__name__)

HISTORY_COLUMNS = ["run_id", "experiment", "seed", "status", "status_timestamp", "output_dir", "row_count", "error_message"]


def _formats(text: str) -> tuple:
    return tuple(f.strip() for f in text.split(",") if f.strip())


def _configure_experiment(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("experiment", nargs="?", choices=sorted(EXPERIMENTS), help="experiment id")
    parser.add_argument("--f", dest="function", default=None, help="function source (experiment default when omitted)")
    parser.add_argument("--lambda", dest="family", default=None, help="weight family (experiment default when omitted)")
    parser.add_argument("--N", dest="schedule", type=parse_int_list, default=None, help="degree schedule, e.g. 8..256")
    parser.add_argument("--d", type=int, default=2, help="dimension")
    parser.add_argument("--delta", type=float, default=2.0, help="delta > 1")
    parser.add_argument("--seed", type=int, default=0, help="random seed")
    parser.add_argument("--samples", type=int, default=None, help="random functions for gamma-inclusion")
    parser.add_argument("--grid", type=int, default=None, help="grid points per axis")
    parser.add_argument("--horizon", type=int, default=SEQUENCE_HORIZON, help="materialized sequence length")
    parser.add_argument("--x0", type=parse_float_list, default=None, help="evaluation point, e.g. 0,1")
    parser.add_argument("--estimate-error", action="store_true", help="add a second-rule error estimate")
    parser.add_argument("--out", dest="output_dir", default=OUTPUT_DIR, help="output root directory")
    parser.add_argument("--formats", type=_formats, default=FORMATS, help="comma list of csv, svg")
    parser.add_argument("--history", type=int, default=None, help="print the last N ledger runs and exit")


def _ledger(context: RunContext) -> Optional[RunLedger]:
    try:
        return context.ledger
    except RuntimeError:
        logger.warning("Run ledger unavailable; this run will not be recorded.")
        return None


@exit_on_error
@timed
async def experiment_command(args: argparse.Namespace, context: RunContext) -> int:
    """Runs one experiment archetype and writes its output directory."""
    ledger = _ledger(context)
    if args.history is not None:
        if ledger is None:
            raise ValidationError("No run ledger available for --history.")
        runs = await ledger.get_recent_runs(args.history)
        emit_table(HISTORY_COLUMNS, runs)
        return 0
    if not args.experiment:
        raise ValidationError(f"Choose an experiment: {', '.join(sorted(EXPERIMENTS))}.")

    config = ExperimentConfig(
        experiment=args.experiment,
        function=args.function,
        family=args.family,
        schedule=args.schedule,
        d=args.d,
        delta=args.delta,
        output_dir=args.output_dir,
        seed=args.seed,
        samples=args.samples,
        grid=args.grid,
        horizon=args.horizon,
        x0=tuple(args.x0) if args.x0 else None,
        estimate_error=args.estimate_error,
    )
    service = ExperimentService(ledger)
    result, run_id = await service.run(config, progress=SweepProgress(args.experiment))
    result.provenance = {"file_values": dict(context.file_values), "overrides": dict(context.overrides)}
    directory = emit_outputs(result, args.formats)
    await service.record_outputs(run_id, directory)

    failed = len(result.failed_rows)
    if failed:
        logger.warning(f"{args.experiment}: {failed} of {len(result.rows)} rows failed.")
    for key, value in result.summary.items():
        logger.info(f"{args.experiment} summary: {key} = {value}")
    print(directory)
    return 0


experiment_handler = Subcommand("experiment", "run an experiment and write CSV, SVG and manifest", _configure_experiment, experiment_command)
experiment_handlers = [experiment_handler]
