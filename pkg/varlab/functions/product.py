from typing import List, Optional, Sequence

import numpy as np

from .base import TWO_PI, AnalyticFunction, CallableFunction

# Coordinates this close to a breakpoint count as sitting on it.
EDGE_TOLERANCE = 1e-12


class ProductFunction(AnalyticFunction):
    """f(x) = prod_s g_s(x_s) over one-variable factors."""

    def __init__(self, factors: Sequence[AnalyticFunction]):
        if not factors or any(g.dim != 1 for g in factors):
            raise ValueError("ProductFunction needs one-variable factors.")
        self._factors = list(factors)

    @property
    def name(self) -> str:
        return "product"

    @property
    def dim(self) -> int:
        return len(self._factors)

    @property
    def is_piecewise(self) -> bool:
        return any(g.is_piecewise for g in self._factors)

    def factors(self) -> Optional[List[AnalyticFunction]]:
        return list(self._factors)

    def breakpoints(self, axis: int) -> List[float]:
        return self._factors[axis].breakpoints(0)

    def evaluate(self, points: np.ndarray) -> np.ndarray:
        pts = self._as_points(points)
        out = np.ones(pts.shape[:-1])
        for s, g in enumerate(self._factors):
            out = out * g.evaluate(pts[..., s:s + 1])
        return out

    def evaluate_one_sided(self, points: np.ndarray, signs: np.ndarray) -> np.ndarray:
        pts = self._as_points(points)
        signs = np.broadcast_to(np.asarray(signs, dtype=float), pts.shape)
        out = np.ones(pts.shape[:-1])
        for s, g in enumerate(self._factors):
            out = out * g.evaluate_one_sided(pts[..., s:s + 1], signs[..., s:s + 1])
        return out


class StepFunction(AnalyticFunction):
    """Right-continuous step function of one variable: levels[k] on [edges[k], edges[k+1])."""

    def __init__(self, edges: Sequence[float], levels: Sequence[float], label: str = "step"):
        edges_array = np.asarray(edges, dtype=float)
        if edges_array.size == 0 or edges_array[0] != 0.0 or np.any(np.diff(edges_array) <= 0):
            raise ValueError("Step edges must start at 0 and increase.")
        if edges_array[-1] >= TWO_PI or len(levels) != edges_array.size:
            raise ValueError("One level per edge inside [0, 2*pi) is required.")
        self._edges = edges_array
        self._levels = np.asarray(levels, dtype=float)
        self._label = label

    @property
    def name(self) -> str:
        return self._label

    @property
    def dim(self) -> int:
        return 1

    @property
    def levels(self) -> np.ndarray:
        return self._levels

    @property
    def is_piecewise(self) -> bool:
        return True

    def breakpoints(self, axis: int) -> List[float]:
        return list(self._edges)

    def _index(self, x: np.ndarray) -> np.ndarray:
        return np.searchsorted(self._edges, self._wrap(x) + EDGE_TOLERANCE, side="right") - 1

    def evaluate(self, points: np.ndarray) -> np.ndarray:
        return self._levels[self._index(self._as_points(points)[..., 0])]

    def evaluate_one_sided(self, points: np.ndarray, signs: np.ndarray) -> np.ndarray:
        x = self._wrap(self._as_points(points)[..., 0])
        idx = self._index(x)
        on_edge = np.abs(x - self._edges[idx]) <= EDGE_TOLERANCE
        left = np.broadcast_to(np.asarray(signs, dtype=float)[..., 0], x.shape) < 0
        # the previous level, cyclically, is the left limit at an edge
        idx = np.where(on_edge & left, np.mod(idx - 1, self._levels.size), idx)
        return self._levels[idx]


def constant_factor(value: float = 1.0) -> AnalyticFunction:
    return CallableFunction(1, lambda p: np.full(p.shape[:-1], float(value)), label="const")


def cosine_factor(amplitude: float = 0.5) -> AnalyticFunction:
    """1 + amplitude * cos x."""
    return CallableFunction(1, lambda p: 1.0 + amplitude * np.cos(p[..., 0]), label="cos_bump")


def sine_factor(freq: int = 1) -> AnalyticFunction:
    return CallableFunction(1, lambda p: np.sin(freq * p[..., 0]), label="sin")


def exp_ramp(amplitude: float = 1.0) -> AnalyticFunction:
    """amplitude * exp(x / 2pi) on [0, 2pi): one jump, at 0, from amplitude * e down to amplitude."""

    def value(p: np.ndarray) -> np.ndarray:
        return amplitude * np.exp(AnalyticFunction._wrap(p[..., 0]) / TWO_PI)

    def one_sided(p: np.ndarray, signs: np.ndarray) -> np.ndarray:
        x = AnalyticFunction._wrap(p[..., 0])
        at_jump = (x <= EDGE_TOLERANCE) & (np.broadcast_to(signs[..., 0], x.shape) < 0)
        return np.where(at_jump, amplitude * np.e, amplitude * np.exp(x / TWO_PI))

    return CallableFunction(1, value, label="exp_ramp", one_sided=one_sided, breakpoints=[[0.0]])
