from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from .base import TWO_PI, AnalyticFunction
from .product import StepFunction

MAX_TERMS = 8


class RidgeSum(AnalyticFunction):
    """
    Sum of at most eight step ridges g_l(x_{i_l}). Each ridge is constant on the
    cells [2 pi k / cells, 2 pi (k+1) / cells) with dyadic levels in [-1, 1], so the
    partial variation is that of the per-axis profiles.
    """

    def __init__(self, dim: int = 2, terms: int = 4, seed: int = 0, cells: int = 16):
        if not 1 <= terms <= MAX_TERMS:
            raise ValueError(f"terms must lie in [1, {MAX_TERMS}]")
        if cells < 2:
            raise ValueError("cells must be >= 2")
        self._dim = dim
        self._terms = terms
        self._seed = seed
        self._cells = cells
        rng = np.random.default_rng(seed)
        edges = TWO_PI * np.arange(cells) / cells
        self._ridges: List[Tuple[int, StepFunction]] = []
        for _ in range(terms):
            axis = int(rng.integers(dim))
            levels = rng.integers(-1024, 1025, cells) / 1024.0
            self._ridges.append((axis, StepFunction(edges, levels, label=f"ridge{axis}")))

    @property
    def name(self) -> str:
        return "ridge_sum"

    @property
    def dim(self) -> int:
        return self._dim

    @property
    def params(self) -> Dict[str, Any]:
        return {"dim": self._dim, "terms": self._terms, "seed": self._seed, "cells": self._cells}

    @property
    def is_piecewise(self) -> bool:
        return True

    @property
    def ridges(self) -> List[Tuple[int, StepFunction]]:
        return list(self._ridges)

    @property
    def modulus_exponents(self) -> Optional[List[float]]:
        return [0.0] * self._dim

    def profile(self, axis: int) -> np.ndarray:
        """Cell levels of the sum of the ridges along `axis`."""
        total = np.zeros(self._cells)
        for ridge_axis, ridge in self._ridges:
            if ridge_axis == axis:
                total = total + ridge.levels
        return total

    def breakpoints(self, axis: int) -> List[float]:
        if any(a == axis for a, _ in self._ridges):
            return list(TWO_PI * np.arange(self._cells) / self._cells)
        return []

    def evaluate(self, points: np.ndarray) -> np.ndarray:
        pts = self._as_points(points)
        out = np.zeros(pts.shape[:-1])
        for axis, ridge in self._ridges:
            out = out + ridge.evaluate(pts[..., axis:axis + 1])
        return out

    def evaluate_one_sided(self, points: np.ndarray, signs: np.ndarray) -> np.ndarray:
        pts = self._as_points(points)
        signs = np.broadcast_to(np.asarray(signs, dtype=float), pts.shape)
        out = np.zeros(pts.shape[:-1])
        for axis, ridge in self._ridges:
            out = out + ridge.evaluate_one_sided(pts[..., axis:axis + 1], signs[..., axis:axis + 1])
        return out
