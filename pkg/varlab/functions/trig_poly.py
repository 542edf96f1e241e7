import itertools
from typing import Any, Dict

import numpy as np

from .base import AnalyticFunction


class TrigPolynomial(AnalyticFunction):
    """
    Seeded random real trigonometric polynomial of per-axis degree <= `degree`:
    sum over frequencies n of a_n cos<n, x> + b_n sin<n, x>, with dyadic coefficients.
    """

    def __init__(self, dim: int = 2, degree: int = 4, seed: int = 0):
        if dim < 1 or degree < 0:
            raise ValueError("dim must be positive and degree nonnegative")
        self._dim = dim
        self._degree = degree
        self._seed = seed
        # one representative per pair {n, -n}: first nonzero component positive
        freqs = [n for n in itertools.product(range(-degree, degree + 1), repeat=dim)
                 if next((k for k in n if k != 0), 1) > 0]
        rng = np.random.default_rng(seed)
        self._freqs = np.asarray(freqs, dtype=float).reshape(-1, dim)
        self._cos = rng.integers(-512, 513, len(freqs)) / 1024.0
        self._sin = rng.integers(-512, 513, len(freqs)) / 1024.0
        self._sin[np.all(self._freqs == 0, axis=1)] = 0.0

    @property
    def name(self) -> str:
        return "trig_poly"

    @property
    def dim(self) -> int:
        return self._dim

    @property
    def params(self) -> Dict[str, Any]:
        return {"dim": self._dim, "degree": self._degree, "seed": self._seed}

    @property
    def degree(self) -> int:
        return self._degree

    def coefficient(self, n) -> complex:
        """Exact Fourier coefficient at the multi-index n."""
        n = np.asarray(n, dtype=float)
        for sign in (1.0, -1.0):
            hits = np.flatnonzero(np.all(self._freqs == sign * n, axis=1))
            if hits.size:
                i = int(hits[0])
                if not np.any(n):
                    return complex(self._cos[i])
                return complex(self._cos[i] / 2, -sign * self._sin[i] / 2)
        return 0j

    def evaluate(self, points: np.ndarray) -> np.ndarray:
        phase = self._as_points(points) @ self._freqs.T
        return np.cos(phase) @ self._cos + np.sin(phase) @ self._sin
