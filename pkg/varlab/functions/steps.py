from typing import Any, Dict, List, Optional

import numpy as np

from .product import ProductFunction, StepFunction, constant_factor


def square_factor() -> StepFunction:
    """+1 on [0, pi), -1 on [pi, 2pi)."""
    return StepFunction([0.0, np.pi], [1.0, -1.0], label="square")


def indicator_factor() -> StepFunction:
    """Indicator of [0, pi)."""
    return StepFunction([0.0, np.pi], [1.0, 0.0], label="indicator")


class SquareWave(ProductFunction):

    def __init__(self, dim: int = 1, axis: int = 0):
        if not 0 <= axis < dim:
            raise ValueError(f"axis {axis} out of range for {dim} variables")
        super().__init__([square_factor() if s == axis else constant_factor() for s in range(dim)])
        self._axis = axis

    @property
    def name(self) -> str:
        return "square_wave"

    @property
    def params(self) -> Dict[str, Any]:
        return {"dim": self.dim, "axis": self._axis}

    @property
    def modulus_exponents(self) -> Optional[List[float]]:
        return [0.0] * self.dim


class SignProduct(ProductFunction):
    """prod_s square_wave(x_s)."""

    def __init__(self, dim: int = 2):
        super().__init__([square_factor() for _ in range(dim)])

    @property
    def name(self) -> str:
        return "sign_product"

    @property
    def params(self) -> Dict[str, Any]:
        return {"dim": self.dim}

    @property
    def modulus_exponents(self) -> Optional[List[float]]:
        return [0.0] * self.dim


class Quadrant(ProductFunction):
    """Indicator of [0, pi)^d."""

    def __init__(self, dim: int = 2):
        super().__init__([indicator_factor() for _ in range(dim)])

    @property
    def name(self) -> str:
        return "quadrant"

    @property
    def params(self) -> Dict[str, Any]:
        return {"dim": self.dim}

    @property
    def modulus_exponents(self) -> Optional[List[float]]:
        return [0.0] * self.dim
