import itertools
import logging
import math
from dataclasses import dataclass
from typing import Any, List, Optional, Sequence, Tuple, Union

import numpy as np

from varlab.config import GRID_SIZE, STAR_OFFSET_DIVISOR
from varlab.exceptions import InvalidBoxError, ValidationError
from varlab.functions.base import TWO_PI, AnalyticFunction

logger = logging.getLogger(__name__)

# Coordinates this close to a grid point are treated as lying on it.
_SNAP = 1e-9


@dataclass(frozen=True)
class UniformGrid:
    """Uniform periodic grid on [0, 2*pi)^d with points 2*pi*k/m per axis."""

    sizes: Tuple[int, ...]

    def __post_init__(self) -> None:
        if not self.sizes:
            raise ValidationError("Grid needs at least one axis.")
        for m in self.sizes:
            if int(m) != m or m < 2:
                raise ValidationError(f"Grid sizes must be integers >= 2, got {self.sizes}.")
        object.__setattr__(self, "sizes", tuple(int(m) for m in self.sizes))

    @classmethod
    def cube(cls, dim: int, size: int) -> "UniformGrid":
        return cls(tuple([size] * dim))

    @property
    def dim(self) -> int:
        return len(self.sizes)

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.sizes

    def step(self, axis: int) -> float:
        return TWO_PI / self.sizes[axis]

    def points(self, axis: int) -> np.ndarray:
        m = self.sizes[axis]
        return TWO_PI * np.arange(m) / m

    def mesh(self) -> np.ndarray:
        """All grid points, shape sizes + (d,)."""
        axes = [self.points(s) for s in range(self.dim)]
        return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)

    def index_of(self, axis: int, coords: np.ndarray) -> np.ndarray:
        """Floor index of the grid point at or left of each coordinate (periodic)."""
        m = self.sizes[axis]
        scaled = np.mod(np.asarray(coords, dtype=float), TWO_PI) * m / TWO_PI
        return np.mod(np.floor(scaled + _SNAP).astype(np.int64), m)

    def on_grid(self, axis: int, coords: np.ndarray) -> np.ndarray:
        m = self.sizes[axis]
        scaled = np.mod(np.asarray(coords, dtype=float), TWO_PI) * m / TWO_PI
        return np.abs(scaled - np.round(scaled)) < _SNAP


class GridFunction(AnalyticFunction):
    """
    Samples on a UniformGrid, read as a periodic step function: the value at x is
    the sample of the grid point at or left of x along every axis.
    """

    def __init__(self, grid: UniformGrid, samples: Any):
        values = np.asarray(samples, dtype=float)
        if values.size != int(np.prod(grid.sizes)):
            raise ValidationError(
                f"Grid {grid.sizes} needs {int(np.prod(grid.sizes))} samples, got {values.size}."
            )
        values = values.reshape(grid.sizes)
        if not np.all(np.isfinite(values)):
            raise ValidationError("Grid samples must be finite.")
        values.setflags(write=False)
        self._grid = grid
        self._samples = values

    @property
    def name(self) -> str:
        return "grid"

    @property
    def dim(self) -> int:
        return self._grid.dim

    @property
    def grid(self) -> UniformGrid:
        return self._grid

    @property
    def samples(self) -> np.ndarray:
        return self._samples

    @property
    def params(self):
        return {"sizes": "x".join(str(m) for m in self._grid.sizes)}

    @property
    def is_piecewise(self) -> bool:
        return True

    def breakpoints(self, axis: int) -> List[float]:
        return list(self._grid.points(axis))

    def _lookup(self, points: np.ndarray, shifts: Optional[np.ndarray] = None) -> np.ndarray:
        pts = self._as_points(points)
        index = []
        for s in range(self.dim):
            idx = self._grid.index_of(s, pts[..., s])
            if shifts is not None:
                idx = np.mod(idx + shifts[..., s], self._grid.sizes[s])
            index.append(idx)
        return self._samples[tuple(index)]

    def evaluate(self, points: np.ndarray) -> np.ndarray:
        return self._lookup(points)

    def evaluate_one_sided(self, points: np.ndarray, signs: np.ndarray) -> np.ndarray:
        pts = self._as_points(points)
        signs = np.broadcast_to(np.asarray(signs), pts.shape)
        # Left limits at a grid point come from the previous sample.
        shifts = np.zeros(pts.shape, dtype=np.int64)
        for s in range(self.dim):
            shifts[..., s] = np.where((signs[..., s] < 0) & self._grid.on_grid(s, pts[..., s]), -1, 0)
        return self._lookup(pts, shifts)


@dataclass(frozen=True)
class Box:
    """Product of per-axis intervals (a_k, b_k) with a_k < b_k, in raw coordinates."""

    lower: Tuple[float, ...]
    upper: Tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.lower) != len(self.upper) or not self.lower:
            raise InvalidBoxError("Box bounds must have the same nonzero length.")
        for axis, (a, b) in enumerate(zip(self.lower, self.upper)):
            if not a < b:
                raise InvalidBoxError(f"Degenerate box along axis {axis}: a={a}, b={b}.")
            if a < -_SNAP or b > TWO_PI + _SNAP:
                raise InvalidBoxError(f"Box axis {axis} leaves one period: ({a}, {b}).")

    @classmethod
    def from_indices(cls, grid: UniformGrid, lower: Sequence[int], upper: Sequence[int]) -> "Box":
        """Box between grid indices; index m along an axis stands for 2*pi."""
        if len(lower) != grid.dim or len(upper) != grid.dim:
            raise InvalidBoxError(f"Box needs {grid.dim} index pairs.")
        for axis, (a, b) in enumerate(zip(lower, upper)):
            if not 0 <= a < b <= grid.sizes[axis]:
                raise InvalidBoxError(f"Invalid index pair ({a}, {b}) on axis {axis}.")
        lo = tuple(TWO_PI * a / m for a, m in zip(lower, grid.sizes))
        hi = tuple(TWO_PI * b / m for b, m in zip(upper, grid.sizes))
        return cls(lo, hi)

    @property
    def dim(self) -> int:
        return len(self.lower)

    def corners(self) -> Tuple[np.ndarray, np.ndarray]:
        """Corner points (2^d, d) and their signs (-1)^(d - |eps|)."""
        d = self.dim
        eps = np.array(list(itertools.product((0, 1), repeat=d)), dtype=np.int64)
        lo = np.asarray(self.lower)
        hi = np.asarray(self.upper)
        points = np.where(eps == 1, hi, lo)
        signs = np.where((d - eps.sum(axis=1)) % 2 == 0, 1.0, -1.0)
        return points, signs


def _check_dim(f: AnalyticFunction, dim: int) -> None:
    if f.dim != dim:
        raise ValidationError(f"Function has {f.dim} variables, box has {dim}.")


def mixed_difference(f: AnalyticFunction, box: Box) -> float:
    """Alternating corner sum of f over the box."""
    _check_dim(f, box.dim)
    points, signs = box.corners()
    values = np.asarray(f.evaluate(points), dtype=float)
    return math.fsum(signs * values)


class SlicedFunction(AnalyticFunction):
    """One-variable restriction t -> f(..., x_axis = t, ...)."""

    def __init__(self, parent: AnalyticFunction, axis: int, fixed: Sequence[float]):
        self._parent = parent
        self._axis = axis
        self._fixed = np.asarray(fixed, dtype=float)

    @property
    def name(self) -> str:
        return f"slice[{self._parent.name}]"

    @property
    def dim(self) -> int:
        return 1

    @property
    def params(self):
        return {"axis": self._axis, "fixed": ";".join(f"{v:.17g}" for v in self._fixed)}

    @property
    def is_piecewise(self) -> bool:
        return self._parent.is_piecewise

    def breakpoints(self, axis: int) -> List[float]:
        return self._parent.breakpoints(self._axis)

    def _embed(self, points: np.ndarray) -> np.ndarray:
        t = self._as_points(points)[..., 0]
        full = np.empty(t.shape + (self._parent.dim,), dtype=float)
        full[..., self._axis] = t
        others = [s for s in range(self._parent.dim) if s != self._axis]
        for s, value in zip(others, self._fixed):
            full[..., s] = value
        return full

    def evaluate(self, points: np.ndarray) -> np.ndarray:
        return self._parent.evaluate(self._embed(points))

    def evaluate_one_sided(self, points: np.ndarray, signs: np.ndarray) -> np.ndarray:
        full = self._embed(points)
        full_signs = np.ones(full.shape, dtype=float)
        full_signs[..., self._axis] = np.asarray(signs, dtype=float).reshape(full.shape[:-1])
        return self._parent.evaluate_one_sided(full, full_signs)


def line_slice(f: AnalyticFunction, axis: int, fixed: Sequence[float]) -> AnalyticFunction:
    """
    One-dimensional restriction of f along axis with the other coordinates fixed
    (in increasing axis order). Grid functions return their grid row.
    """
    if not 0 <= axis < f.dim:
        raise ValidationError(f"Axis {axis} out of range for a {f.dim}-variable function.")
    fixed = list(fixed)
    if len(fixed) != f.dim - 1:
        raise ValidationError(f"Expected {f.dim - 1} fixed coordinates, got {len(fixed)}.")
    if isinstance(f, GridFunction):
        grid = f.grid
        others = [s for s in range(f.dim) if s != axis]
        index: List[Any] = [slice(None)] * f.dim
        for s, value in zip(others, fixed):
            index[s] = int(grid.index_of(s, np.asarray(value)))
        row = f.samples[tuple(index)]
        return GridFunction(UniformGrid((grid.sizes[axis],)), row.copy())
    return SlicedFunction(f, axis, fixed)


@dataclass(frozen=True)
class StarValue:
    """Average of the one-sided limits at a point, with how it was obtained."""

    value: float
    mode: str  # "exact" or "numeric"
    offset: Optional[float] = None


def default_star_offset(f: AnalyticFunction) -> float:
    if isinstance(f, GridFunction):
        size = max(f.grid.sizes)
    else:
        size = GRID_SIZE
    return TWO_PI / (STAR_OFFSET_DIVISOR * size)


def star_value(f: AnalyticFunction, x: Sequence[float], h: Union[str, float, None] = "exact") -> StarValue:
    """(1/2^d) * sum of f(x_1 +- 0, ..., x_d +- 0)."""
    point = np.asarray(x, dtype=float).reshape(1, -1)
    if point.shape[1] != f.dim:
        raise ValidationError(f"Point has {point.shape[1]} coordinates, function has {f.dim}.")
    signs = np.array(list(itertools.product((-1.0, 1.0), repeat=f.dim)))
    if h == "exact":
        if not f.supports_one_sided:
            raise ValidationError(f"{f.name} has no one-sided evaluator; pass a numeric offset.")
        values = f.evaluate_one_sided(np.repeat(point, len(signs), axis=0), signs)
        return StarValue(math.fsum(values) / len(signs), "exact")
    offset = default_star_offset(f) if h is None else float(h)
    if offset <= 0:
        raise ValidationError(f"Offset must be positive, got {offset}.")
    values = f.evaluate(point + signs * offset)
    return StarValue(math.fsum(values) / len(signs), "numeric", offset)


def grid_samples(f: AnalyticFunction, grid: UniformGrid) -> GridFunction:
    """Samples any source on the grid."""
    if isinstance(f, GridFunction) and f.grid == grid:
        return f
    if f.dim != grid.dim:
        raise ValidationError(f"Function has {f.dim} variables, grid has {grid.dim}.")
    return GridFunction(grid, f.evaluate(grid.mesh()))


def as_grid_function(f: AnalyticFunction, grid: Optional[UniformGrid] = None) -> GridFunction:
    if grid is None:
        if isinstance(f, GridFunction):
            return f
        grid = UniformGrid.cube(f.dim, GRID_SIZE)
    return grid_samples(f, grid)


def parse_grid_text(text: str) -> GridFunction:
    """Reads `dims d`, `sizes m1 ... md`, then row-major samples."""
    lines = [line.strip() for line in text.strip().splitlines() if line.strip()]
    if len(lines) < 2:
        raise ValidationError("Grid text needs a dims line and a sizes line.")
    head = lines[0].split()
    if len(head) != 2 or head[0] != "dims":
        raise ValidationError(f"Expected 'dims d', got {lines[0]!r}.")
    sizes_line = lines[1].split()
    if not sizes_line or sizes_line[0] != "sizes":
        raise ValidationError(f"Expected 'sizes m1 ... md', got {lines[1]!r}.")
    try:
        dim = int(head[1])
        sizes = tuple(int(v) for v in sizes_line[1:])
        samples = [float(v) for v in " ".join(lines[2:]).split()]
    except ValueError as e:
        raise ValidationError(f"Malformed grid text: {e}") from e
    if len(sizes) != dim:
        raise ValidationError(f"dims {dim} but {len(sizes)} sizes given.")
    return GridFunction(UniformGrid(sizes), samples)


def format_grid_text(f: GridFunction) -> str:
    rows = [f"dims {f.dim}", "sizes " + " ".join(str(m) for m in f.grid.sizes)]
    last = f.grid.sizes[-1]
    flat = f.samples.reshape(-1, last)
    rows.extend(" ".join(f"{v:.17g}" for v in row) for row in flat)
    return "\n".join(rows) + "\n"
