# varlab/presentation/outputs.py
from __future__ import annotations

import logging
import os
from datetime import datetime
from typing import Iterable, List, Optional, TYPE_CHECKING

from varlab.exceptions import ServiceError, ValidationError
from varlab.helpers import cleanup_file
from varlab.presentation.svg import render_polyline
from varlab.presentation.tables import manifest_text, save_csv

if TYPE_CHECKING:
    from varlab.services.experiment_service import SweepResult

logger = logging.getLogger(__name__)

FORMATS = ("csv", "svg")


def _stamp(started: str) -> str:
    try:
        moment = datetime.fromisoformat(started)
    except ValueError:
        moment = datetime.now()
    return moment.strftime("%Y%m%dT%H%M%S")


def run_directory(root: str, experiment: str, started: str) -> str:
    """`<root>/<experiment>/<timestamp>`, suffixed when the timestamp is taken."""
    base = os.path.join(root, experiment, _stamp(started))
    path, suffix = base, 1
    while os.path.exists(path):
        path = f"{base}-{suffix}"
        suffix += 1
    return path


def emit_outputs(result: SweepResult, formats: Iterable[str] = FORMATS, root: Optional[str] = None) -> str:
    """
    Writes result.csv, plot.svg, extra tables and manifest.txt for one run.
    Returns the run directory.
    """
    formats = tuple(formats)
    unknown = [f for f in formats if f not in FORMATS]
    if unknown:
        raise ValidationError(f"Unknown output formats {unknown}; expected a subset of {FORMATS}.")
    if not result.rows:
        raise ValidationError("Refusing to emit an empty result.")

    config = result.config
    directory = run_directory(root or config.output_dir, config.experiment, result.started)
    written: List[str] = []
    try:
        os.makedirs(directory, exist_ok=False)
        if "csv" in formats:
            path = os.path.join(directory, "result.csv")
            save_csv(path, result.columns, result.rows)
            written.append(path)
            for name, table in result.tables.items():
                path = os.path.join(directory, f"{name}.csv")
                save_csv(path, table.columns, table.rows)
                written.append(path)
        if "svg" in formats:
            x, y, logx, logy = result.plot
            path = os.path.join(directory, "plot.svg")
            with open(path, "w", encoding="utf-8", newline="") as handle:
                handle.write(render_polyline(result.rows, x, y, logx, logy, title=config.experiment))
            written.append(path)
        path = os.path.join(directory, "manifest.txt")
        text = manifest_text(
            config.echo(),
            result.summary,
            result.started,
            result.finished,
            result.runtime_s,
            file_values=result.provenance.get("file_values"),
            overrides=result.provenance.get("overrides"),
            files=[os.path.basename(p) for p in written],
        )
        with open(path, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
    except OSError as e:
        logger.error(f"Failed writing outputs to {directory}: {e}")
        for partial in written:
            cleanup_file(partial)
        raise ServiceError(f"Output directory {directory} is not writable: {e}") from e

    logger.info(f"Wrote {len(written) + 1} files to {directory}")
    return directory
