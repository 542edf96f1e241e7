from typing import Any, Dict, List, Optional

import numpy as np

from .base import AnalyticFunction, CallableFunction
from .product import ProductFunction, cosine_factor, exp_ramp


def zigzag_factor(teeth: int, jump: float) -> AnalyticFunction:
    """
    jump * exp(x / 2pi) plus an odd train of triangles: tooth k (1-based) on (0, pi)
    has height k^(-1/2), mirrored with opposite sign on (pi, 2pi).
    """
    width = np.pi / teeth
    ramp = exp_ramp(jump)

    def teeth_part(x: np.ndarray) -> np.ndarray:
        x = AnalyticFunction._wrap(x)
        lower = x < np.pi
        u = np.where(lower, x, 2 * np.pi - x)
        k = np.minimum(np.floor(u / width), teeth - 1)
        local = u - k * width
        shape = 1.0 - np.abs(local - width / 2) / (width / 2)
        return np.where(lower, 1.0, -1.0) * np.clip(shape, 0.0, 1.0) / np.sqrt(k + 1)

    def value(p: np.ndarray) -> np.ndarray:
        return ramp.evaluate(p) + teeth_part(p[..., 0])

    def one_sided(p: np.ndarray, signs: np.ndarray) -> np.ndarray:
        return ramp.evaluate_one_sided(p, signs) + teeth_part(p[..., 0])

    kinks = [k * width / 2 for k in range(4 * teeth)]
    return CallableFunction(1, value, label="zigzag", one_sided=one_sided, breakpoints=[kinks])


class Zigzag(ProductFunction):
    """
    Zigzag ridge in x_1 with a small jump at x_1 = 0, times 1 + cos(x_s)/2 for s > 1.
    The modulus of variation along x_1 grows like n^(1/2) for n up to about 2 * teeth.
    """

    def __init__(self, dim: int = 2, teeth: int = 32, jump: float = 0.1):
        if teeth < 1:
            raise ValueError("teeth must be positive")
        super().__init__([zigzag_factor(teeth, jump)] + [cosine_factor(0.5) for _ in range(dim - 1)])
        self._teeth = teeth
        self._jump = jump

    @property
    def name(self) -> str:
        return "zigzag"

    @property
    def params(self) -> Dict[str, Any]:
        return {"dim": self.dim, "teeth": self._teeth, "jump": self._jump}

    @property
    def modulus_exponents(self) -> Optional[List[float]]:
        return [0.5] + [0.0] * (self.dim - 1)
