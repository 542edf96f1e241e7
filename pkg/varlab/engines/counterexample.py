import itertools
import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, Iterator, List, Optional, Tuple

import numpy as np

from varlab.config import LOWER_BOUND_K_MAX
from varlab.engines.sequences import LambdaSeq, series_partial_sums
from varlab.engines.variation import lambda_variation_lower
from varlab.exceptions import ValidationError
from varlab.functions.base import TWO_PI, AnalyticFunction

logger = logging.getLogger(__name__)

# Sample points per mesh cell on the lines used for the grid lower bound.
SAMPLES_PER_CELL = 4
# Lines sampled for the last axis.
MAX_LAST_AXIS_LINES = 64


def _integer_root(value: float, delta: float) -> int:
    """floor(value^(1/delta)) with the float estimate corrected by exact comparison."""
    if value < 1:
        return 0
    r = int(math.floor(value ** (1.0 / delta) + 1e-9))
    while r > 0 and r ** delta > value * (1 + 1e-12):
        r -= 1
    while (r + 1) ** delta <= value * (1 + 1e-12):
        r += 1
    return r


def _floor_power(j: int, delta: float) -> int:
    return max(j, int(math.floor(j ** delta + 1e-9)))


@dataclass(frozen=True)
class CounterexampleSpec:
    """
    Parameters of f_N: mesh width pi/(N + 1/2), N_delta = [(N/2)^(1/delta)],
    m_j = [j^delta], t_j = 1 / sum_{i <= m_j} 1/lambda_i, and the index set
    W = {(i_1, ..., i_d): 1 <= i_d <= N_delta, i_d < i_s < i_d + m_{i_d} for s < d}.
    """

    d: int
    delta: float
    N: int
    lam: LambdaSeq
    n_delta: int
    m: Tuple[int, ...] = field(repr=False)
    t: Tuple[float, ...] = field(repr=False)

    @property
    def nu(self) -> float:
        return self.N + 0.5

    @property
    def cell_width(self) -> float:
        return math.pi / self.nu

    @property
    def cell_count(self) -> int:
        """Mesh cells in one period."""
        return 2 * self.N + 1

    @property
    def empty(self) -> bool:
        return w_size(self) == 0

    @property
    def max_cell_index(self) -> int:
        if self.n_delta == 0:
            return 0
        return max(j + self.m_j(j) - 1 for j in range(1, self.n_delta + 1))

    def m_j(self, j: int) -> int:
        return self.m[j - 1]

    def t_j(self, j: int) -> float:
        return self.t[j - 1]

    def describe(self) -> Dict[str, Any]:
        return {"d": self.d, "delta": self.delta, "N": self.N, "lambda": self.lam.describe()}


def build_spec(d: int, delta: float, N: int, lam: LambdaSeq) -> CounterexampleSpec:
    if d < 2:
        raise ValidationError(f"The construction needs d >= 2, got {d}.")
    if not delta > 1:
        raise ValidationError(f"delta must exceed 1, got {delta}.")
    if N < 2:
        raise ValidationError(f"N must be >= 2, got {N}.")
    n_delta = _integer_root(N / 2.0, delta)
    m = tuple(_floor_power(j, delta) for j in range(1, n_delta + 1))
    t: Tuple[float, ...] = ()
    if n_delta:
        reciprocal_sums = np.cumsum(1.0 / lam.values(max(m)))
        t = tuple(float(1.0 / reciprocal_sums[mj - 1]) for mj in m)
    spec = CounterexampleSpec(d, float(delta), int(N), lam, n_delta, m, t)
    if spec.max_cell_index > 2 * N:
        raise ValidationError(f"Cell index {spec.max_cell_index} leaves the period for N={N}.")
    if spec.empty:
        logger.info(f"Counterexample N={N}, delta={delta}: W is empty.")
    return spec


def w_size(spec: CounterexampleSpec) -> int:
    return sum((mj - 1) ** (spec.d - 1) for mj in spec.m)


def iter_w(spec: CounterexampleSpec, i_d_range: Optional[Tuple[int, int]] = None) -> Iterator[Tuple[int, ...]]:
    """Members of W in lexicographic order, optionally restricted to i_d in [lo, hi]."""
    lo, hi = i_d_range if i_d_range else (1, spec.n_delta)
    for i_d in range(max(lo, 1), min(hi, spec.n_delta) + 1):
        heads = range(i_d + 1, i_d + spec.m_j(i_d))
        for head in itertools.product(heads, repeat=spec.d - 1):
            yield head + (i_d,)


def eval_fN(spec: CounterexampleSpec, points: np.ndarray) -> np.ndarray:
    """t_{i_d} * prod_s sin((N + 1/2) x_s) on cells of W, 0 elsewhere."""
    x = np.mod(np.asarray(points, dtype=float), TWO_PI)
    cells = np.minimum(np.floor(x / spec.cell_width).astype(np.int64), spec.cell_count - 1)
    i_d = cells[..., -1]
    inside = (i_d >= 1) & (i_d <= spec.n_delta)
    safe = np.clip(i_d, 1, max(spec.n_delta, 1)) - 1
    m = np.asarray(spec.m or (1,))[safe]
    t = np.asarray(spec.t or (0.0,))[safe]
    heads = cells[..., :-1]
    inside &= np.all((heads > i_d[..., None]) & (heads < (i_d + m)[..., None]), axis=-1)
    product = np.prod(np.sin(spec.nu * x), axis=-1)
    return np.where(inside, t * product, 0.0)


class CounterexampleFunction(AnalyticFunction):
    """f_N as a closed form; continuous, with kinks on the mesh lines."""

    def __init__(self, spec: CounterexampleSpec):
        self._spec = spec

    @classmethod
    def from_params(cls, d: int = 2, delta: float = 2.0, N: int = 32, family: str = "power_log:1,-1") -> "CounterexampleFunction":
        from varlab.helpers import parse_family_string

        return cls(build_spec(int(d), float(delta), int(N), parse_family_string(family)))

    @property
    def spec(self) -> CounterexampleSpec:
        return self._spec

    @property
    def name(self) -> str:
        return "counterexample"

    @property
    def dim(self) -> int:
        return self._spec.d

    @property
    def params(self) -> Dict[str, Any]:
        return {"d": self._spec.d, "delta": self._spec.delta, "N": self._spec.N, "family": self._spec.lam.describe()}

    @property
    def is_piecewise(self) -> bool:
        return True

    def breakpoints(self, axis: int) -> List[float]:
        return [k * self._spec.cell_width for k in range(self._spec.cell_count)]

    def evaluate(self, points: np.ndarray) -> np.ndarray:
        return eval_fN(self._spec, self._as_points(points))


def lower_bound_series(lam: LambdaSeq, d: int, M: int) -> np.ndarray:
    """Partial sums of lambda_n log^{d-2} n / n^2 from n = 2; element i ends at n = i + 2."""
    if M < 2:
        raise ValidationError(f"M must be >= 2, got {M}.")
    return series_partial_sums(lam, d, M, start=2)


def lower_bound_at(lam: LambdaSeq, d: int, m: int) -> float:
    """Partial sum up to n = m; 0 below 2."""
    if m < 2:
        return 0.0
    return float(lower_bound_series(lam, d, m)[-1])


@dataclass(frozen=True)
class PVBound:
    grid_lower: float
    analytic_upper: float
    axis_lower: Tuple[float, ...]
    slice_bound: float


def _slice_bound(spec: CounterexampleSpec) -> float:
    """max_L 2 t_L sum_{j < m_L} 1/lambda_j: the Lambda-variation of m_L - 1 arches of height t_L."""
    if spec.empty:
        return 0.0
    reciprocal_sums = np.concatenate([[0.0], np.cumsum(1.0 / spec.lam.values(max(spec.m)))])
    return max(2.0 * spec.t_j(j) * reciprocal_sums[spec.m_j(j) - 1] for j in range(1, spec.n_delta + 1))


def _line(spec: CounterexampleSpec, axis: int, fixed: np.ndarray, samples_per_cell: int) -> np.ndarray:
    count = spec.cell_count * samples_per_cell
    coords = TWO_PI * np.arange(count) / count
    points = np.repeat(fixed[None, :], count, axis=0)
    points[:, axis] = coords
    return eval_fN(spec, points)


def pv_bound_fN(spec: CounterexampleSpec, samples_per_cell: int = SAMPLES_PER_CELL) -> PVBound:
    """
    Partial Lambda-variation of f_N: a certified lower bound from sampled lines
    through W cell centres, and the analytic bound d * max_L 2 t_L sum_{j < m_L} 1/lambda_j.
    """
    if samples_per_cell < 4:
        raise ValidationError(f"Need at least 4 samples per cell, got {samples_per_cell}.")
    if spec.empty:
        return PVBound(0.0, 0.0, (0.0,) * spec.d, 0.0)
    width = spec.cell_width

    def centre(i: int) -> float:
        return (i + 0.5) * width

    lam = spec.lam
    k_max = LOWER_BOUND_K_MAX

    axis_lower: List[float] = []
    for axis in range(spec.d - 1):
        best = 0.0
        for i_d in range(1, spec.n_delta + 1):
            if spec.m_j(i_d) < 2:
                continue
            fixed = np.full(spec.d, centre(i_d + 1))
            fixed[-1] = centre(i_d)
            line = _line(spec, axis, fixed, samples_per_cell)
            best = max(best, lambda_variation_lower(line, lam, k_max=k_max, local_search=False)[0])
        axis_lower.append(best)

    top = spec.max_cell_index
    candidates = np.unique(np.linspace(2, max(top, 2), min(MAX_LAST_AXIS_LINES, max(top - 1, 1))).round().astype(int))
    best = 0.0
    for c in candidates:
        line = _line(spec, spec.d - 1, np.full(spec.d, centre(int(c))), samples_per_cell)
        if np.any(line):
            best = max(best, lambda_variation_lower(line, lam, k_max=k_max, local_search=False)[0])
    axis_lower.append(best)

    bound = _slice_bound(spec)
    analytic_upper = (spec.d - 1) * bound + bound
    grid_lower = math.fsum(axis_lower)
    logger.debug(f"PV bound N={spec.N}: grid lower {grid_lower:.6g}, analytic upper {analytic_upper:.6g}")
    return PVBound(grid_lower, analytic_upper, tuple(axis_lower), bound)


@dataclass(frozen=True)
class CoefficientBoundProfile:
    values: np.ndarray  # values[i] belongs to n = i + 2
    infimum: float
    argmin: int


def coefficient_bound_profile(lam: LambdaSeq, delta: float, horizon: Optional[int] = None) -> CoefficientBoundProfile:
    """t_n log(n) n / lambda_n for 2 <= n with [n^delta] within the sequence horizon."""
    if not delta > 1:
        raise ValidationError(f"delta must exceed 1, got {delta}.")
    limit = min(horizon or lam.horizon, lam.horizon)
    n_max = _integer_root(float(limit), delta)
    if n_max < 2:
        raise ValidationError(f"Horizon {limit} too small for delta={delta}.")
    n = np.arange(2, n_max + 1)
    m = np.maximum(np.floor(n.astype(float) ** delta + 1e-9).astype(np.int64), n)
    m = np.minimum(m, limit)
    reciprocal_sums = np.cumsum(1.0 / lam.values(int(m.max())))
    t = 1.0 / reciprocal_sums[m - 1]
    values = t * np.log(n) * n / lam.values(n_max)[n - 1]
    row = int(np.argmin(values))
    return CoefficientBoundProfile(values, float(values[row]), int(n[row]))
