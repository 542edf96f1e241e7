from abc import ABC, abstractmethod
from typing import Any, Callable, Dict, List, Optional, Sequence

import numpy as np

from varlab.exceptions import ValidationError

TWO_PI = 2.0 * np.pi


class AnalyticFunction(ABC):
    """Abstract base class for closed-form 2*pi-periodic functions on T^d."""

    @property
    @abstractmethod
    def name(self) -> str:
        """Registry name of the closed form."""
        pass

    @property
    @abstractmethod
    def dim(self) -> int:
        """Number of variables d."""
        pass

    @abstractmethod
    def evaluate(self, points: np.ndarray) -> np.ndarray:
        """Evaluates at points of shape (..., d); returns shape (...)."""
        pass

    @property
    def params(self) -> Dict[str, Any]:
        """Parameters the closed form was built with."""
        return {}

    @property
    def is_piecewise(self) -> bool:
        """True if the form has jumps or kinks (see breakpoints)."""
        return False

    @property
    def supports_one_sided(self) -> bool:
        return True

    def evaluate_one_sided(self, points: np.ndarray, signs: np.ndarray) -> np.ndarray:
        """
        Limit from the side given by signs (+1/-1 per axis).
        Continuous forms return the plain value.
        """
        return self.evaluate(points)

    def breakpoints(self, axis: int) -> List[float]:
        """Coordinates in [0, 2*pi) where the form is not smooth along axis."""
        return []

    def factors(self) -> Optional[List["AnalyticFunction"]]:
        """One-dimensional factors if f(x) = prod_s g_s(x_s), else None."""
        return None

    @property
    def modulus_exponents(self) -> Optional[List[float]]:
        """Known growth exponents alpha_i with v_i(n, f) = O(n^alpha_i), if any."""
        return None

    def spec_string(self) -> str:
        """Returns the `name(param=value,...)` form used by the CLI."""
        inner = ",".join(f"{key}={value}" for key, value in self.params.items())
        return f"{self.name}({inner})"

    def __call__(self, points: np.ndarray) -> np.ndarray:
        return self.evaluate(points)

    def _as_points(self, points: Any) -> np.ndarray:
        """Helper to coerce input to a float array with trailing axis d."""
        array = np.asarray(points, dtype=float)
        if (array.ndim == 0 or array.shape[-1] != self.dim) and array.size % self.dim == 0:
            array = array.reshape(-1, self.dim)
        if array.ndim == 0 or array.shape[-1] != self.dim:
            raise ValidationError(f"{self.name}: expected points with last axis {self.dim}, got {array.shape}")
        return array

    @staticmethod
    def _wrap(values: np.ndarray) -> np.ndarray:
        """Reduces coordinates into one period [0, 2*pi)."""
        wrapped = np.mod(values, TWO_PI)
        # mod can return 2*pi itself for tiny negative inputs
        return np.where(wrapped >= TWO_PI, 0.0, wrapped)

    def __repr__(self) -> str:
        return self.spec_string()


class CallableFunction(AnalyticFunction):
    """Wraps a vectorized callable; used for ad-hoc sources in code and tests."""

    def __init__(
        self,
        dim: int,
        fn: Callable[[np.ndarray], np.ndarray],
        label: str = "callable",
        one_sided: Optional[Callable[[np.ndarray, np.ndarray], np.ndarray]] = None,
        breakpoints: Optional[Sequence[Sequence[float]]] = None,
    ):
        self._dim = dim
        self._fn = fn
        self._label = label
        self._one_sided = one_sided
        self._breakpoints = [list(b) for b in breakpoints] if breakpoints else None

    @property
    def name(self) -> str:
        return self._label

    @property
    def dim(self) -> int:
        return self._dim

    @property
    def is_piecewise(self) -> bool:
        return self._one_sided is not None or self._breakpoints is not None

    def evaluate(self, points: np.ndarray) -> np.ndarray:
        return np.asarray(self._fn(self._as_points(points)), dtype=float)

    def evaluate_one_sided(self, points: np.ndarray, signs: np.ndarray) -> np.ndarray:
        if self._one_sided is None:
            return self.evaluate(points)
        return np.asarray(self._one_sided(self._as_points(points), np.asarray(signs)), dtype=float)

    def breakpoints(self, axis: int) -> List[float]:
        if self._breakpoints is None:
            return []
        return self._breakpoints[axis]
