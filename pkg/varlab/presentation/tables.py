# varlab/presentation/tables.py
import csv
import io
import logging
import math
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence, TextIO

from varlab import __version__

logger = logging.getLogger(__name__)

FLOAT_FORMAT = ".17g"


def format_value(value: Any) -> str:
    """CSV cell text; floats keep 17 significant digits so they read back unchanged."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return format(value, FLOAT_FORMAT)
    if hasattr(value, "item"):  # numpy scalar
        return format_value(value.item())
    if isinstance(value, (tuple, list)):
        return " ".join(format_value(v) for v in value)
    return str(value)


def write_csv(stream: TextIO, columns: Sequence[str], rows: Iterable[Mapping[str, Any]]) -> int:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(columns)
    count = 0
    for row in rows:
        writer.writerow([format_value(row.get(c)) for c in columns])
        count += 1
    return count


def csv_text(columns: Sequence[str], rows: Iterable[Mapping[str, Any]]) -> str:
    buffer = io.StringIO()
    write_csv(buffer, columns, rows)
    return buffer.getvalue()


def save_csv(path: str, columns: Sequence[str], rows: Iterable[Mapping[str, Any]]) -> int:
    # newline="" so the writer's LF endings are kept on every platform
    with open(path, "w", encoding="utf-8", newline="") as handle:
        count = write_csv(handle, columns, rows)
    logger.debug(f"Wrote {count} rows to {path}")
    return count


def _parse_cell(text: str) -> Any:
    if text == "":
        return None
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


def read_csv(path: str) -> List[Dict[str, Any]]:
    with open(path, "r", encoding="utf-8", newline="") as handle:
        return [{k: _parse_cell(v) for k, v in row.items()} for row in csv.DictReader(handle)]


def two_column_rows(values: Sequence[float], name: str = "value", start: int = 1) -> List[Dict[str, Any]]:
    """(n, value) rows for dumping a constructed sequence."""
    return [{"n": n, name: float(v)} for n, v in enumerate(values, start=start)]


def _manifest_value(value: Any) -> str:
    # lists read back through --config, so they use the flag syntax
    if isinstance(value, (tuple, list)):
        return ",".join(format_value(v) for v in value)
    return format_value(value)


def manifest_text(
    config_echo: Mapping[str, Any],
    summary: Mapping[str, Any],
    started: str,
    finished: str,
    runtime_s: float,
    file_values: Optional[Mapping[str, Any]] = None,
    overrides: Optional[Mapping[str, Any]] = None,
    files: Optional[Sequence[str]] = None,
) -> str:
    """
    Flat key = value manifest. The [config] block alone is a valid --config
    file that re-runs the experiment.
    """
    lines = [f"# varlab {__version__}", "[config]"]
    lines += [f"{k} = {_manifest_value(v)}" for k, v in config_echo.items()]
    if file_values:
        lines.append("[config_file]")
        lines += [f"{k} = {_manifest_value(v)}" for k, v in sorted(file_values.items())]
    if overrides:
        lines.append("[overrides]")
        lines += [f"{k} = {_manifest_value(v)}" for k, v in sorted(overrides.items())]
    lines += [
        "[run]",
        f"version = {__version__}",
        f"started = {started}",
        f"finished = {finished}",
        f"runtime_s = {runtime_s:.3f}",
    ]
    if files:
        lines.append(f"files = {' '.join(files)}")
    if summary:
        lines.append("[summary]")
        lines += [f"{k} = {_manifest_value(v)}" for k, v in summary.items()]
    return "\n".join(lines) + "\n"
