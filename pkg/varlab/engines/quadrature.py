"""Gauss-Legendre panel rules on one period, aligned to breakpoints."""
from functools import lru_cache
from typing import Iterable, Tuple

import numpy as np

from varlab.config import GAUSS_ORDER
from varlab.exceptions import ValidationError
from varlab.functions.base import TWO_PI

# Breakpoints closer than this to an existing edge are merged into it.
EDGE_TOLERANCE = 1e-12


@lru_cache(maxsize=32)
def gauss_rule(order: int) -> Tuple[np.ndarray, np.ndarray]:
    """Nodes and weights on [-1, 1]."""
    if order < 1:
        raise ValidationError(f"Gauss order must be positive, got {order}.")
    nodes, weights = np.polynomial.legendre.leggauss(order)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def panel_edges(panels: int, breakpoints: Iterable[float] = (), lower: float = 0.0,
                upper: float = TWO_PI) -> np.ndarray:
    """Uniform edges on [lower, upper] merged with the breakpoints inside it."""
    if panels < 1:
        raise ValidationError(f"Need at least one panel, got {panels}.")
    edges = np.linspace(lower, upper, panels + 1)
    extra = np.asarray([b for b in breakpoints if lower < b < upper], dtype=float)
    if extra.size:
        edges = np.sort(np.concatenate([edges, extra]))
        keep = np.concatenate([[True], np.diff(edges) > EDGE_TOLERANCE])
        edges = edges[keep]
        edges[-1] = upper
    return edges


def panel_rule(edges: np.ndarray, order: int = GAUSS_ORDER) -> Tuple[np.ndarray, np.ndarray]:
    """Composite Gauss-Legendre nodes and weights over consecutive panels."""
    nodes, weights = gauss_rule(order)
    edges = np.asarray(edges, dtype=float)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    x = (mid[:, None] + half[:, None] * nodes[None, :]).ravel()
    w = (half[:, None] * weights[None, :]).ravel()
    return x, w


def periodic_rule(panels: int, kinks: Iterable[float] = (), order: int = GAUSS_ORDER) -> Tuple[np.ndarray, np.ndarray]:
    """Rule over [0, 2*pi) with panel edges at every kink (reduced mod 2*pi)."""
    return panel_rule(panel_edges(panels, [float(np.mod(k, TWO_PI)) for k in kinks]), order)


def cell_rule(edges: np.ndarray, panels_per_cell: int = 2, order: int = GAUSS_ORDER) -> Tuple[np.ndarray, np.ndarray]:
    """Each cell [edges[i], edges[i+1]] split into equal panels; node arrays have shape (cells, q)."""
    edges = np.asarray(edges, dtype=float)
    fractions = np.linspace(0.0, 1.0, panels_per_cell + 1)
    sub = edges[:-1, None] + np.diff(edges)[:, None] * fractions[None, :]
    nodes, weights = gauss_rule(order)
    half = 0.5 * np.diff(sub, axis=1)
    mid = 0.5 * (sub[:, 1:] + sub[:, :-1])
    x = mid[..., None] + half[..., None] * nodes
    w = half[..., None] * weights
    cells = edges.size - 1
    return x.reshape(cells, -1), w.reshape(cells, -1)
