import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from varlab.config import GAUSS_ORDER
from varlab.engines.counterexample import CounterexampleSpec
from varlab.engines.quadrature import cell_rule, periodic_rule
from varlab.exceptions import ValidationError
from varlab.functions.base import TWO_PI, AnalyticFunction

logger = logging.getLogger(__name__)

PATHS = ("coeff", "kernel")

# Smallest equispaced resolution per axis for smooth sources.
FFT_MIN_RESOLUTION = 64
# Panels per axis are 2N + PANEL_PADDING (kernel oscillation plus headroom).
PANEL_PADDING = 32
# Lower order used for the quadrature error estimate.
LOW_ORDER = 6


def dirichlet_kernel(N: int, t) -> Union[float, np.ndarray]:
    """D_N(t) = sin((N + 1/2) t) / (2 sin(t/2)); cosine-sum form near t = 0 mod 2*pi."""
    if N < 0:
        raise ValidationError(f"Kernel degree must be >= 0, got {N}.")
    scalar = np.ndim(t) == 0
    t = np.atleast_1d(np.asarray(t, dtype=float))
    half = np.sin(t / 2.0)
    near = np.abs(half) < 1e-9
    out = np.sin((N + 0.5) * t) / (2.0 * np.where(near, 1.0, half))
    if np.any(near):
        k = np.arange(1, N + 1)
        out[near] = 0.5 + np.cos(np.outer(t[near], k)).sum(axis=1)
    return float(out[0]) if scalar else out


def _degrees(N: Union[int, Sequence[int]], dim: int) -> Tuple[int, ...]:
    degrees = (int(N),) * dim if np.ndim(N) == 0 else tuple(int(n) for n in N)  # type: ignore[union-attr]
    if len(degrees) != dim:
        raise ValidationError(f"Need {dim} degrees, got {len(degrees)}.")
    if any(n < 0 for n in degrees):
        raise ValidationError(f"Degrees must be >= 0, got {degrees}.")
    return degrees


def _panel_count(N: int, resolution: Optional[int]) -> int:
    return max(2 * N + PANEL_PADDING, resolution or 0)


@dataclass(frozen=True)
class CoeffTable:
    """Coefficients over [-N_1, N_1] x ... x [-N_d, N_d]; coeffs[n + N] = f^(n)."""

    degrees: Tuple[int, ...]
    coeffs: np.ndarray
    rule: str
    resolution: Tuple[int, ...]
    alias_safe: bool
    est_error: Optional[float] = None

    @property
    def dim(self) -> int:
        return len(self.degrees)

    def __getitem__(self, n: Sequence[int]) -> complex:
        if len(n) != self.dim or any(abs(k) > N for k, N in zip(n, self.degrees)):
            raise KeyError(f"Multi-index {tuple(n)} outside degrees {self.degrees}.")
        return complex(self.coeffs[tuple(k + N for k, N in zip(n, self.degrees))])

    def evaluate(self, points: np.ndarray) -> np.ndarray:
        """Sum of the table at points of shape (P, d); complex result of shape (P,)."""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        phases = [np.exp(1j * np.outer(points[:, s], np.arange(-N, N + 1))) for s, N in enumerate(self.degrees)]
        result = np.tensordot(phases[0], self.coeffs, axes=([1], [0]))
        for phase in phases[1:]:
            result = np.einsum("pj...,pj->p...", result, phase)
        return result


@dataclass(frozen=True)
class CoefficientValue:
    value: complex
    rule: str
    alias_safe: bool


def _gauss_coefficients(f: AnalyticFunction, freqs: List[np.ndarray], resolution: Optional[int],
                        order: int) -> Tuple[np.ndarray, Tuple[int, ...]]:
    rules, panels = [], []
    for axis, n in enumerate(freqs):
        count = _panel_count(int(np.abs(n).max()), resolution)
        rules.append(periodic_rule(count, f.breakpoints(axis), order))
        panels.append(count)
    mesh = np.stack(np.meshgrid(*[x for x, _ in rules], indexing="ij"), axis=-1)
    table = np.asarray(f.evaluate(mesh), dtype=complex)
    for (x, w), n in zip(rules, freqs):
        basis = w[:, None] * np.exp(-1j * np.outer(x, n)) / TWO_PI
        table = np.tensordot(table, basis, axes=([0], [0]))
    return table, tuple(panels)


def _fft_coefficients(f: AnalyticFunction, freqs: List[np.ndarray],
                      resolution: Optional[int]) -> Tuple[np.ndarray, Tuple[int, ...], bool]:
    needed = [2 * int(np.abs(n).max()) + 2 for n in freqs]
    sizes = tuple(resolution if resolution else max(need, FFT_MIN_RESOLUTION) for need in needed)
    axes = [TWO_PI * np.arange(R) / R for R in sizes]
    mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)
    spectrum = np.fft.fftn(np.asarray(f.evaluate(mesh), dtype=float)) / float(np.prod(sizes))
    table = spectrum[np.ix_(*[np.mod(n, R) for n, R in zip(freqs, sizes)])]
    return table, sizes, all(R >= need for R, need in zip(sizes, needed))


def _coefficients(f: AnalyticFunction, freqs: List[np.ndarray], resolution: Optional[int],
                  order: int) -> Tuple[np.ndarray, str, Tuple[int, ...], bool]:
    factors = f.factors()
    if factors:
        parts = [_coefficients(g, [n], resolution, order) for g, n in zip(factors, freqs)]
        table = parts[0][0]
        for part in parts[1:]:
            table = np.multiply.outer(table, part[0])
        rule = "separable:" + "+".join(p[1] for p in parts)
        sizes = tuple(r for p in parts for r in p[2])
        return table, rule, sizes, all(p[3] for p in parts)
    if f.is_piecewise:
        table, panels = _gauss_coefficients(f, freqs, resolution, order)
        return table, "gauss", panels, True
    table, sizes, safe = _fft_coefficients(f, freqs, resolution)
    return table, "fft", sizes, safe


def _doubled(resolution: Tuple[int, ...]) -> int:
    return 2 * max(resolution)


def coefficient_table(f: AnalyticFunction, N: Union[int, Sequence[int]], resolution: Optional[int] = None,
                      order: int = GAUSS_ORDER, estimate_error: bool = False) -> CoeffTable:
    """
    Fourier coefficients (1/(2*pi)^d) * integral of f e^{-i<n,x>} for |n_s| <= N_s.
    Smooth sources use the equispaced (FFT) rule, piecewise sources Gauss panels
    aligned to their breakpoints, product sources their one-dimensional factors.
    """
    degrees = _degrees(N, f.dim)
    freqs = [np.arange(-n, n + 1) for n in degrees]
    table, rule, sizes, safe = _coefficients(f, freqs, resolution, order)
    est_error = None
    if estimate_error:
        alt_resolution = _doubled(sizes) if "fft" in rule else resolution
        alt = _coefficients(f, freqs, alt_resolution, LOW_ORDER)[0]
        est_error = float(np.abs(table - alt).max())
    if not safe:
        logger.warning(f"Resolution {sizes} is below the alias-safe bound for degrees {degrees} on {f!r}.")
    logger.debug(f"Coefficient table for {f!r}: degrees {degrees}, rule {rule}, resolution {sizes}")
    return CoeffTable(degrees, table, rule, sizes, safe, est_error)


def fourier_coefficient(f: AnalyticFunction, n: Sequence[int], resolution: Optional[int] = None,
                        order: int = GAUSS_ORDER) -> CoefficientValue:
    if len(n) != f.dim:
        raise ValidationError(f"Multi-index {tuple(n)} does not match {f.dim} variables.")
    table, rule, sizes, safe = _coefficients(f, [np.array([int(k)]) for k in n], resolution, order)
    if not safe:
        logger.warning(f"Coefficient {tuple(n)} of {f!r}: resolution {sizes} is not alias safe.")
    return CoefficientValue(complex(table.ravel()[0]), rule, safe)


# --- partial sums ---

@dataclass(frozen=True)
class PartialSumRequest:
    degrees: Tuple[int, ...]
    points: np.ndarray
    path: str = "coeff"
    resolution: Optional[int] = None
    estimate_error: bool = False

    def __post_init__(self) -> None:
        degrees = tuple(int(n) for n in self.degrees)
        if not degrees or any(n < 0 for n in degrees):
            raise ValidationError(f"Degrees must be nonnegative, got {degrees}.")
        points = np.atleast_2d(np.asarray(self.points, dtype=float))
        if points.shape[-1] != len(degrees):
            raise ValidationError(f"Points have {points.shape[-1]} coordinates, expected {len(degrees)}.")
        if np.any(points < 0) or np.any(points > TWO_PI + 1e-12):
            raise ValidationError("Evaluation points must lie within one period [0, 2*pi].")
        if self.path not in PATHS:
            raise ValidationError(f"Unknown path {self.path!r}; expected one of {PATHS}.")
        object.__setattr__(self, "degrees", degrees)
        object.__setattr__(self, "points", points)

    @classmethod
    def square(cls, N: int, points, dim: int, path: str = "coeff", **kwargs) -> "PartialSumRequest":
        return cls((N,) * dim, points, path, **kwargs)

    @property
    def dim(self) -> int:
        return len(self.degrees)


@dataclass(frozen=True)
class PartialSumResult:
    values: np.ndarray
    path: str
    rule: str
    degrees: Tuple[int, ...]
    points: np.ndarray
    est_error: Optional[float] = None
    imag_max: float = 0.0


def _coeff_sum(f: AnalyticFunction, degrees: Tuple[int, ...], points: np.ndarray,
               resolution: Optional[int], order: int) -> Tuple[np.ndarray, str]:
    factors = f.factors()
    if factors:
        total = np.ones(points.shape[0], dtype=complex)
        rules = []
        for s, g in enumerate(factors):
            part, rule = _coeff_sum(g, (degrees[s],), points[:, [s]], resolution, order)
            total = total * part
            rules.append(rule)
        return total, "separable:" + "+".join(rules)
    freqs = [np.arange(-n, n + 1) for n in degrees]
    table, rule, sizes, safe = _coefficients(f, freqs, resolution, order)
    if not safe:
        logger.warning(f"Partial sum of {f!r}: resolution {sizes} is not alias safe for degrees {degrees}.")
    return CoeffTable(degrees, table, rule, sizes, safe).evaluate(points), rule


def _kernel_point(f: AnalyticFunction, degrees: Tuple[int, ...], x: np.ndarray,
                  resolution: Optional[int], order: int) -> float:
    rules = []
    for s, N in enumerate(degrees):
        kinks = [x[s] - b for b in f.breakpoints(s)]
        nodes, weights = periodic_rule(_panel_count(N, resolution), kinks, order)
        rules.append((nodes, weights * dirichlet_kernel(N, nodes)))
    mesh = np.stack(np.meshgrid(*[t for t, _ in rules], indexing="ij"), axis=-1)
    values = np.asarray(f.evaluate(np.mod(x - mesh, TWO_PI)), dtype=float)
    for _, w in rules:
        values = np.tensordot(values, w, axes=([0], [0]))
    return float(values) / math.pi ** len(degrees)


def _kernel_sum(f: AnalyticFunction, degrees: Tuple[int, ...], points: np.ndarray,
                resolution: Optional[int], order: int) -> Tuple[np.ndarray, str]:
    factors = f.factors()
    if factors:
        total = np.ones(points.shape[0])
        for s, g in enumerate(factors):
            part, _ = _kernel_sum(g, (degrees[s],), points[:, [s]], resolution, order)
            total = total * part
        return total, "separable:kernel"
    values = np.array([_kernel_point(f, degrees, x, resolution, order) for x in points])
    return values, "kernel-gauss"


def rectangular_partial_sum(f: AnalyticFunction, request: PartialSumRequest,
                            order: int = GAUSS_ORDER) -> PartialSumResult:
    """
    S_{N_1,...,N_d}(f; x) by summing the coefficient table ("coeff") or by
    quadrature of (1/pi^d) * integral of f(x - t) prod D_{N_s}(t_s) dt ("kernel").
    """
    if f.dim != request.dim:
        raise ValidationError(f"{f!r} has {f.dim} variables but the request has {request.dim}.")
    compute = _coeff_sum if request.path == "coeff" else _kernel_sum
    raw, rule = compute(f, request.degrees, request.points, request.resolution, order)
    raw = np.asarray(raw)
    values = np.real(raw).astype(float)
    imag_max = float(np.abs(np.imag(raw)).max()) if np.iscomplexobj(raw) else 0.0
    est_error = None
    if request.estimate_error:
        if "fft" in rule:
            alt_raw, _ = compute(f, request.degrees, request.points, 2 * max(FFT_MIN_RESOLUTION, *[2 * n + 2 for n in request.degrees]), order)
        else:
            alt_raw, _ = compute(f, request.degrees, request.points, request.resolution, LOW_ORDER)
        est_error = float(np.abs(np.real(alt_raw) - values).max())
    return PartialSumResult(values, request.path, rule, request.degrees, request.points, est_error, imag_max)


# --- counterexample at the origin ---

@dataclass(frozen=True)
class OriginSum:
    value: float
    empty: bool
    cells: int


def cell_integrals(N: int, count: int, order: int = GAUSS_ORDER) -> np.ndarray:
    """I_i = integral over the i-th mesh cell of sin^2((N+1/2)x) / (2 sin(x/2)), i < count."""
    nu = N + 0.5
    edges = np.pi * np.arange(count + 1) / nu
    x, w = cell_rule(edges, panels_per_cell=2, order=order)
    integrand = np.sin(nu * x) ** 2 / (2.0 * np.sin(x / 2.0))
    return (integrand * w).sum(axis=1)


def origin_sum_fN(spec: CounterexampleSpec, order: int = GAUSS_ORDER) -> OriginSum:
    """
    S_{N,...,N}(f_N; 0) from one-dimensional cell integrals: the sum over W
    factorizes per i_d into t_{i_d} I_{i_d} (sum of I over the admissible heads)^(d-1).
    """
    if spec.empty:
        logger.info(f"Counterexample N={spec.N}: W is empty, origin sum is 0.")
        return OriginSum(0.0, True, 0)
    count = spec.max_cell_index + 1
    integrals = cell_integrals(spec.N, count, order)
    prefix = np.concatenate([[0.0], np.cumsum(integrals)])
    terms = []
    for j in range(1, spec.n_delta + 1):
        m = spec.m_j(j)
        if m < 2:
            continue
        heads = prefix[j + m] - prefix[j + 1]
        terms.append(spec.t_j(j) * integrals[j] * heads ** (spec.d - 1))
    value = math.fsum(terms) / math.pi ** spec.d
    return OriginSum(value, False, count)
