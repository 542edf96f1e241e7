from typing import Any, Dict, List, Optional

from .product import ProductFunction, cosine_factor, exp_ramp


class JumpLine(ProductFunction):
    """
    amplitude * exp(x_1 / 2pi) on [0, 2pi), times 1 + cos(x_s)/2 for s > 1.
    Smooth except on the hyperplane x_1 = 0, where it jumps by amplitude * (e - 1).
    """

    def __init__(self, dim: int = 2, amplitude: float = 1.0):
        super().__init__([exp_ramp(amplitude)] + [cosine_factor(0.5) for _ in range(dim - 1)])
        self._amplitude = amplitude

    @property
    def name(self) -> str:
        return "jump_line"

    @property
    def params(self) -> Dict[str, Any]:
        return {"dim": self.dim, "amplitude": self._amplitude}

    @property
    def modulus_exponents(self) -> Optional[List[float]]:
        return [0.0] * self.dim
