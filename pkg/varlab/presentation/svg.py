# varlab/presentation/svg.py
import io
import logging
from typing import Any, Mapping, Sequence, Tuple

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

logger = logging.getLogger(__name__)

FIGSIZE = (6.4, 4.0)
# fixed ids and no timestamp, so the same rows always give the same file
SVG_RC = {"svg.hashsalt": "varlab", "svg.fonttype": "none"}


def _column(rows: Sequence[Mapping[str, Any]], name: str) -> np.ndarray:
    values = []
    for row in rows:
        try:
            values.append(float(row.get(name)))
        except (TypeError, ValueError):
            values.append(np.nan)
    return np.asarray(values, dtype=float)


def plot_points(rows: Sequence[Mapping[str, Any]], x: str, y: str,
                logx: bool = False, logy: bool = False) -> Tuple[np.ndarray, np.ndarray]:
    """Plottable (x, y) pairs: finite, and positive on a log axis."""
    xs, ys = _column(rows, x), _column(rows, y)
    keep = np.isfinite(xs) & np.isfinite(ys)
    if logx:
        keep &= xs > 0
    if logy:
        keep &= ys > 0
    return xs[keep], ys[keep]


def render_polyline(
    rows: Sequence[Mapping[str, Any]],
    x: str,
    y: str,
    logx: bool = False,
    logy: bool = False,
    title: str = "",
) -> str:
    """
    Single-panel SVG chart with one line of column y against column x.
    Rows with missing, non-finite or (on a log axis) non-positive values are skipped.
    """
    xs, ys = plot_points(rows, x, y, logx, logy)
    if xs.size < len(rows):
        logger.debug(f"Plot {title!r}: skipped {len(rows) - xs.size} unplottable rows.")
    buffer = io.StringIO()
    with matplotlib.rc_context(SVG_RC):
        fig, ax = plt.subplots(figsize=FIGSIZE)
        try:
            ax.plot(xs, ys, marker="o", color="steelblue", linewidth=2)
            if logx and xs.size:
                ax.set_xscale("log")
            if logy and ys.size:
                ax.set_yscale("log")
            ax.set_xlabel(x)
            ax.set_ylabel(y)
            ax.set_title(title)
            ax.grid(True, alpha=0.3)
            fig.tight_layout()
            fig.savefig(buffer, format="svg", metadata={"Date": None})
        finally:
            plt.close(fig)
    return buffer.getvalue()
