from typing import Any, Dict, List, Optional

from .product import ProductFunction, constant_factor, sine_factor


class SineFunction(ProductFunction):
    """sin(freq * x_axis)."""

    def __init__(self, dim: int = 1, axis: int = 0, freq: int = 1):
        if not 0 <= axis < dim:
            raise ValueError(f"axis {axis} out of range for {dim} variables")
        super().__init__([sine_factor(freq) if s == axis else constant_factor() for s in range(dim)])
        self._axis = axis
        self._freq = freq

    @property
    def name(self) -> str:
        return "sine"

    @property
    def params(self) -> Dict[str, Any]:
        return {"dim": self.dim, "axis": self._axis, "freq": self._freq}

    @property
    def modulus_exponents(self) -> Optional[List[float]]:
        return [0.0] * self.dim


class ConstantFunction(ProductFunction):

    def __init__(self, dim: int = 1, value: float = 1.0):
        super().__init__([constant_factor(value)] + [constant_factor() for _ in range(dim - 1)])
        self._value = value

    @property
    def name(self) -> str:
        return "constant"

    @property
    def params(self) -> Dict[str, Any]:
        return {"dim": self.dim, "value": self._value}

    @property
    def modulus_exponents(self) -> Optional[List[float]]:
        return [0.0] * self.dim
