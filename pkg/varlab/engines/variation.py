import itertools
import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterator, List, Optional, Sequence, Tuple

import numpy as np

from varlab.config import (
    EXACT_MAX_AXES,
    EXACT_MAX_AXIS_SIZE,
    EXACT_WORK_BUDGET,
    GRID_SIZE,
    LOWER_BOUND_K_MAX,
    ORACLE_CAP,
)
from varlab.engines.model import GridFunction, UniformGrid, as_grid_function
from varlab.engines.sequences import LambdaSeq
from varlab.exceptions import ExactModeRefusedError, InconsistentBoundsError, OracleRefusedError, ValidationError
from varlab.functions.base import AnalyticFunction

logger = logging.getLogger(__name__)

Pair = Tuple[int, int]

# Hill-climbing rounds per line and the largest collection it is tried on.
LOCAL_SEARCH_ROUNDS = 16
LOCAL_SEARCH_MAX_INTERVALS = 64
# Slices refined for lower bounds before branch and bound gives up.
MAX_REFINED_SLICES = 8

MODES = ("bracket", "exact", "oracle", "sample")


@dataclass(frozen=True)
class IntervalCollection:
    """Per-axis lists of grid index pairs; list order is the weight assignment order."""

    axes: Tuple[int, ...]
    intervals: Tuple[Tuple[Pair, ...], ...]
    slice_index: Tuple[int, ...] = ()

    def __post_init__(self) -> None:
        if len(self.axes) != len(self.intervals):
            raise ValidationError("One interval list per axis is required.")
        for axis, pairs in zip(self.axes, self.intervals):
            if not pairs:
                raise ValidationError(f"Empty interval list on axis {axis}.")
            ordered = sorted(pairs)
            for a, b in ordered:
                if not a < b:
                    raise ValidationError(f"Interval ({a}, {b}) on axis {axis} is degenerate.")
            for (_, b), (a, _) in zip(ordered, ordered[1:]):
                if a < b:
                    raise ValidationError(f"Overlapping intervals on axis {axis}: {ordered}.")


@dataclass(frozen=True)
class VariationBracket:
    """Certified lower and upper bounds for a variation supremum."""

    lower: float
    upper: float = math.inf
    exact: Optional[float] = None
    methods: Tuple[str, ...] = ()
    witness: Optional[IntervalCollection] = None
    alpha: Tuple[int, ...] = ()

    @property
    def has_upper(self) -> bool:
        return math.isfinite(self.upper)

    @property
    def value(self) -> float:
        """Best single number: the exact value when known, else the lower bound."""
        return self.exact if self.exact is not None else self.lower


@dataclass(frozen=True)
class ModulusTable:
    axis: int
    values: np.ndarray  # values[n - 1] = v(n)
    sizes: Tuple[int, ...] = field(default=())

    @property
    def n_max(self) -> int:
        return len(self.values)

    def at(self, n: int) -> float:
        return float(self.values[n - 1])


@dataclass(frozen=True)
class KSumResult:
    value: float
    witness: Tuple[Pair, ...]


BOUND_RTOL = 1e-10


def _normalized(lower: float, upper: float, exact: Optional[float]) -> Tuple[float, float, Optional[float]]:
    """Orders lower <= exact <= upper, absorbing rounding gaps and raising on anything larger."""
    chain = [("lower", lower)] + ([("exact", exact)] if exact is not None else []) + [("upper", upper)]
    for (low_name, low), (high_name, high) in zip(chain, chain[1:]):
        if low > high + BOUND_RTOL * max(1.0, abs(low)):
            logger.error(f"Variation bracket out of order: {low_name}={low!r} > {high_name}={high!r}")
            raise InconsistentBoundsError(f"{low_name} {low!r} exceeds {high_name} {high!r}.")
    if exact is not None:
        exact = max(exact, lower)
        upper = max(upper, exact)
    return lower, max(upper, lower), exact


def combine_brackets(brackets: Sequence[VariationBracket], alpha: Tuple[int, ...] = ()) -> VariationBracket:
    """Componentwise sum of brackets."""
    if not brackets:
        return VariationBracket(0.0, 0.0, 0.0, ("empty",), alpha=alpha)
    lower = math.fsum(b.lower for b in brackets)
    upper = math.fsum(b.upper for b in brackets) if all(b.has_upper for b in brackets) else math.inf
    exacts = [b.exact for b in brackets]
    exact = math.fsum(exacts) if all(e is not None for e in exacts) else None  # type: ignore[misc]
    methods: List[str] = []
    for b in brackets:
        methods.extend(m for m in b.methods if m not in methods)
    lower, upper, exact = _normalized(lower, upper, exact)
    return VariationBracket(lower, upper, exact, tuple(methods), alpha=alpha)


def _as_line(fline) -> np.ndarray:
    if isinstance(fline, AnalyticFunction):
        if fline.dim != 1:
            raise ValidationError(f"Expected a one-variable function, got {fline.dim} variables.")
        fline = as_grid_function(fline).samples
    line = np.asarray(fline, dtype=float).ravel()
    if line.size < 2:
        raise ValidationError(f"A line needs at least 2 samples, got {line.size}.")
    if not np.all(np.isfinite(line)):
        raise ValidationError("Line samples must be finite.")
    return line


def _weights(lam: LambdaSeq, count: int, tail_offset: int = 1) -> np.ndarray:
    if tail_offset < 1:
        raise ValidationError(f"tail_offset must be >= 1, got {tail_offset}.")
    return lam.values(count + tail_offset - 1)[tail_offset - 1:]


def collection_objective(line: np.ndarray, pairs: Sequence[Pair], weights: np.ndarray) -> float:
    """Sum of |f(b) - f(a)| / weight, largest differences on the smallest weights."""
    diffs = np.sort(np.array([abs(line[b] - line[a]) for a, b in pairs]))[::-1]
    return math.fsum(diffs / weights[: len(diffs)])


# --- k-interval maximum ---

def _next_layer(prev: np.ndarray, lines: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    neg = np.full(prev.shape[:-1] + (1,), -np.inf)
    best_minus = np.maximum.accumulate(prev - lines, axis=-1)
    best_plus = np.maximum.accumulate(prev + lines, axis=-1)
    cand = np.maximum(
        np.concatenate([neg, best_minus[..., :-1]], axis=-1) + lines,
        np.concatenate([neg, best_plus[..., :-1]], axis=-1) - lines,
    )
    return cand, np.maximum.accumulate(cand, axis=-1)


def max_ksum_table(lines, k_max: int) -> np.ndarray:
    """
    M_k for k = 1..k_max on every line at once: the largest sum of k
    interval differences |f(b) - f(a)| over interior-disjoint grid intervals.
    Returns shape (n_lines, k_max).
    """
    lines = np.atleast_2d(np.asarray(lines, dtype=float))
    m = lines.shape[1]
    if m < 2:
        raise ValidationError("Lines need at least 2 samples.")
    if not 1 <= k_max <= m - 1:
        raise ValidationError(f"k must lie in [1, {m - 1}], got {k_max}.")
    prev = np.zeros(lines.shape)
    out = np.empty((lines.shape[0], k_max))
    for j in range(k_max):
        _, prev = _next_layer(prev, lines)
        out[:, j] = prev[:, -1]
    return out


def _ksum_layers(line: np.ndarray, k_max: int) -> Tuple[List[np.ndarray], List[np.ndarray]]:
    bests = [np.zeros(line.size)]
    cands = [np.zeros(line.size)]
    for _ in range(k_max):
        cand, best = _next_layer(bests[-1], line)
        cands.append(cand)
        bests.append(best)
    return bests, cands


def _traceback(line: np.ndarray, bests: List[np.ndarray], cands: List[np.ndarray], k: int) -> Tuple[Pair, ...]:
    pairs: List[Pair] = []
    limit = line.size - 1
    for j in range(k, 0, -1):
        target = bests[j][limit]
        b = int(np.flatnonzero(cands[j][: limit + 1] == target)[0])
        scores = bests[j - 1][:b] + np.abs(line[b] - line[:b])
        a = int(np.argmax(scores))
        pairs.append((a, b))
        limit = a
    pairs.reverse()
    return tuple(pairs)


def max_ksum_dp(fline, k: int) -> KSumResult:
    """Exact maximum of the sum of k interval differences, with an achieving collection."""
    line = _as_line(fline)
    if not 1 <= k <= line.size - 1:
        raise ValidationError(f"k must lie in [1, {line.size - 1}], got {k}.")
    bests, cands = _ksum_layers(line, k)
    return KSumResult(float(bests[k][-1]), _traceback(line, bests, cands, k))


# --- exhaustive oracle ---

def enumerate_collections(m: int) -> Iterator[Tuple[Pair, ...]]:
    """Every nonempty interior-disjoint collection of grid intervals on m points, left to right."""

    def extend(start: int, current: Tuple[Pair, ...]) -> Iterator[Tuple[Pair, ...]]:
        for a in range(start, m - 1):
            for b in range(a + 1, m):
                grown = current + ((a, b),)
                yield grown
                yield from extend(b, grown)

    yield from extend(0, ())


@lru_cache(maxsize=None)
def _collection_arrays(m: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray, Tuple[Tuple[Pair, ...], ...]]:
    collections = tuple(enumerate_collections(m))
    k = m - 1
    starts = np.zeros((len(collections), k), dtype=np.int64)
    ends = np.zeros((len(collections), k), dtype=np.int64)
    mask = np.zeros((len(collections), k), dtype=bool)
    for row, pairs in enumerate(collections):
        for col, (a, b) in enumerate(pairs):
            starts[row, col] = a
            ends[row, col] = b
            mask[row, col] = True
    for array in (starts, ends, mask):
        array.setflags(write=False)
    logger.debug(f"Enumerated {len(collections)} interval collections on {m} points.")
    return starts, ends, mask, collections


def _sorted_objectives(values: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """values (..., C, K) of interval weights -> best assignment objective per collection."""
    ordered = -np.sort(-values, axis=-1)
    return (ordered / weights[: values.shape[-1]]).sum(axis=-1)


def _oracle(line: np.ndarray, weights: np.ndarray) -> Tuple[float, Tuple[Pair, ...]]:
    starts, ends, mask, collections = _collection_arrays(line.size)
    diffs = np.where(mask, np.abs(line[ends] - line[starts]), 0.0)
    objectives = _sorted_objectives(diffs, weights)
    top = objectives.max()
    tied = np.flatnonzero(objectives >= top - 1e-12 * max(1.0, abs(top)))
    best_value, best_pairs = -math.inf, collections[0]
    for row in tied:
        value = collection_objective(line, collections[row], weights)
        if value > best_value:
            best_value, best_pairs = value, collections[row]
    return best_value, best_pairs


def brute_force_lambda_variation(fline, lam: LambdaSeq, max_m: int = ORACLE_CAP, tail_offset: int = 1) -> float:
    """Exhaustive supremum over every interval collection with sorted weight assignment."""
    line = _as_line(fline)
    if line.size > max_m:
        raise OracleRefusedError(f"Oracle refuses {line.size} points (cap {max_m}).")
    return _oracle(line, _weights(lam, line.size - 1, tail_offset))[0]


# --- one-dimensional brackets ---

def _abel_upper(m_values: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """Abel summation bound from M_1..M_K (last axis) and nondecreasing weights."""
    inv = 1.0 / weights[: m_values.shape[-1]]
    coeffs = np.append(inv[:-1] - inv[1:], inv[-1])
    return m_values @ coeffs


def _run_collection(line: np.ndarray) -> Tuple[Pair, ...]:
    """Intervals between consecutive turning points (ignoring flat steps)."""
    steps = np.sign(np.diff(line))
    turning = [0]
    direction = 0.0
    for i, s in enumerate(steps):
        if s == 0:
            continue
        if direction != 0 and s != direction:
            turning.append(i)
        direction = s
    turning.append(line.size - 1)
    pairs = tuple((a, b) for a, b in zip(turning, turning[1:]) if a < b)
    return pairs or ((0, line.size - 1),)


def _neighbours(line: np.ndarray, pairs: Tuple[Pair, ...]) -> Iterator[Tuple[Pair, ...]]:
    m = line.size
    n = len(pairs)
    for i, (a, b) in enumerate(pairs):
        left = pairs[i - 1][1] if i > 0 else 0
        right = pairs[i + 1][0] if i + 1 < n else m - 1
        for na in (a - 1, a + 1):
            if left <= na < b:
                yield pairs[:i] + ((na, b),) + pairs[i + 1:]
        for nb in (b - 1, b + 1):
            if a < nb <= right:
                yield pairs[:i] + ((a, nb),) + pairs[i + 1:]
        if b - a >= 2:
            inner = np.arange(a + 1, b)
            gains = np.abs(line[inner] - line[a]) + np.abs(line[b] - line[inner])
            c = int(inner[int(np.argmax(gains))])
            yield pairs[:i] + ((a, c), (c, b)) + pairs[i + 1:]
        if n > 1:
            yield pairs[:i] + pairs[i + 1:]
        if i + 1 < n and pairs[i + 1][0] == b:
            yield pairs[:i] + ((a, pairs[i + 1][1]),) + pairs[i + 2:]


def _local_search(line: np.ndarray, pairs: Tuple[Pair, ...], weights: np.ndarray) -> Tuple[float, Tuple[Pair, ...]]:
    best = collection_objective(line, pairs, weights)
    for _ in range(LOCAL_SEARCH_ROUNDS):
        improved = False
        for candidate in _neighbours(line, pairs):
            if len(candidate) > len(weights):
                continue
            value = collection_objective(line, candidate, weights)
            if value > best:
                best, pairs, improved = value, candidate, True
                break
        if not improved:
            break
    return best, pairs


def _witness_ks(k_max: int) -> List[int]:
    ks = set(range(1, min(k_max, 16) + 1))
    k = 16
    while k < k_max:
        k *= 2
        ks.add(min(k, k_max))
    ks.add(k_max)
    return sorted(ks)


def lambda_variation_lower(fline, lam: LambdaSeq, tail_offset: int = 1,
                           k_max: int = LOWER_BOUND_K_MAX, local_search: bool = True) -> Tuple[float, Tuple[Pair, ...]]:
    """Best objective over DP witnesses, the run decomposition, and hill climbing."""
    line = _as_line(fline)
    K = line.size - 1
    weights = _weights(lam, K, tail_offset)
    k_top = min(K, k_max)
    bests, cands = _ksum_layers(line, k_top)
    candidates = [_traceback(line, bests, cands, k) for k in _witness_ks(k_top)]
    candidates.append(_run_collection(line))
    best_value, best_pairs = -math.inf, candidates[0]
    for pairs in candidates:
        value = collection_objective(line, pairs, weights)
        if value > best_value:
            best_value, best_pairs = value, pairs
    if local_search and len(best_pairs) <= LOCAL_SEARCH_MAX_INTERVALS:
        best_value, best_pairs = _local_search(line, best_pairs, weights)
    return best_value, best_pairs


def lambda_variation_1d(fline, lam: LambdaSeq, tail_offset: int = 1, use_oracle: bool = True,
                        axis: int = 0) -> VariationBracket:
    """Bracket for the Lambda-variation of one line with weights lambda_{j + tail_offset - 1}."""
    line = _as_line(fline)
    K = line.size - 1
    weights = _weights(lam, K, tail_offset)
    m_values = max_ksum_table(line, K)[0]
    upper = float(_abel_upper(m_values, weights))
    lower, pairs = lambda_variation_lower(line, lam, tail_offset)
    methods = ["dp-abel", "greedy"]
    exact: Optional[float] = None
    if lam.is_constant:
        exact = max(lower, float(m_values[-1] / weights[0]))
        methods.append("hardy")
    if use_oracle and line.size <= ORACLE_CAP:
        exact, oracle_pairs = _oracle(line, weights)
        if exact > lower:
            lower, pairs = exact, oracle_pairs
        methods.append("enumeration")
    lower, upper, exact = _normalized(lower, upper, exact)
    witness = IntervalCollection((axis,), (tuple(sorted(pairs)),))
    return VariationBracket(lower, upper, exact, tuple(methods), witness, (axis,))


def continuity_profile(fline, lam: LambdaSeq, offsets: Sequence[int]) -> List[VariationBracket]:
    """Brackets with the weight sequence tail-shifted by each offset; decays as the offset grows."""
    return [lambda_variation_1d(fline, lam, tail_offset=n) for n in offsets]


# --- slices and moduli ---

def _slices(samples: np.ndarray, axes: Sequence[int]) -> Tuple[np.ndarray, List[Tuple[int, ...]]]:
    """Moves `axes` last and flattens the rest: shape (n_slices, *sizes[axes])."""
    others = [s for s in range(samples.ndim) if s not in axes]
    moved = np.moveaxis(samples, list(axes), list(range(samples.ndim - len(axes), samples.ndim)))
    other_shape = tuple(samples.shape[s] for s in others)
    flat = moved.reshape((-1,) + tuple(samples.shape[s] for s in axes))
    index = list(itertools.product(*(range(n) for n in other_shape))) if others else [()]
    return flat, index


def _grid_function(f: AnalyticFunction, grid: Optional[UniformGrid]) -> GridFunction:
    if grid is None and not isinstance(f, GridFunction):
        grid = UniformGrid.cube(f.dim, GRID_SIZE)
    return as_grid_function(f, grid)


def modulus_of_variation(f: AnalyticFunction, axis: int, n_max: int,
                         grid: Optional[UniformGrid] = None) -> ModulusTable:
    """v_axis(n, f) for n = 1..n_max: the largest n-interval sum over all grid slices."""
    g = _grid_function(f, grid)
    if not 0 <= axis < g.dim:
        raise ValidationError(f"Axis {axis} out of range for {g.dim} variables.")
    m = g.grid.sizes[axis]
    if not 1 <= n_max <= m - 1:
        raise ValidationError(f"n_max must lie in [1, {m - 1}] on a {m}-point axis, got {n_max}.")
    lines, _ = _slices(g.samples, [axis])
    table = max_ksum_table(lines, n_max).max(axis=0)
    table = np.maximum.accumulate(table)
    logger.debug(f"Modulus of variation along axis {axis}: v(1)={table[0]:.6g}, v({n_max})={table[-1]:.6g}")
    return ModulusTable(axis, table, g.grid.sizes)


def _single_axis_bracket(g: GridFunction, axis: int, lam: LambdaSeq, tail_offset: int,
                         mode: str) -> VariationBracket:
    lines, index = _slices(g.samples, [axis])
    m = lines.shape[1]
    K = m - 1
    weights = _weights(lam, K, tail_offset)
    exact: Optional[float] = None
    methods = ["dp-abel", "greedy"]
    if mode in ("exact", "oracle"):
        if m > ORACLE_CAP:
            raise ExactModeRefusedError(f"Exact single-axis mode needs <= {ORACLE_CAP} points, got {m}.")
    m_table = max_ksum_table(lines, K)
    uppers = _abel_upper(m_table, weights)
    if lam.is_constant:
        exact = float(m_table[:, -1].max() / weights[0])
        methods.append("hardy")

    order = np.argsort(-uppers, kind="stable")
    lower, best_pairs, best_slice = -math.inf, None, 0
    for rank, row in enumerate(order):
        if rank >= MAX_REFINED_SLICES or uppers[row] <= lower:
            break
        value, pairs = lambda_variation_lower(lines[row], lam, tail_offset)
        if value > lower:
            lower, best_pairs, best_slice = value, pairs, int(row)

    if m <= ORACLE_CAP and mode != "sample":
        best_exact = -math.inf
        for row in range(lines.shape[0]):
            value, pairs = _oracle(lines[row], weights)
            if value > best_exact:
                best_exact = value
                if value > lower:
                    lower, best_pairs, best_slice = value, pairs, row
        exact = best_exact
        methods.append("enumeration")

    upper = float(uppers.max()) if mode != "sample" else math.inf
    lower, upper, exact = _normalized(lower, upper, exact)
    witness = None
    if best_pairs is not None:
        witness = IntervalCollection((axis,), (tuple(sorted(best_pairs)),), index[best_slice])
    return VariationBracket(lower, upper, exact, tuple(methods), witness, (axis,))


# --- several axes ---

def _ordered_collections(m: int, permute: bool) -> List[Tuple[Pair, ...]]:
    collections = _collection_arrays(m)[3]
    if not permute:
        return list(collections)
    ordered: List[Tuple[Pair, ...]] = []
    for pairs in collections:
        ordered.extend(itertools.permutations(pairs))
    return ordered


def _head_reduce(block: np.ndarray, head: Sequence[Tuple[Pair, ...]]) -> np.ndarray:
    """Differences along the leading axes for the given ordered collections."""
    reduced = block
    for s, pairs in enumerate(head):
        a = [p[0] for p in pairs]
        b = [p[1] for p in pairs]
        reduced = np.take(reduced, b, axis=s) - np.take(reduced, a, axis=s)
    return reduced


def _best_assignment(block: np.ndarray, heads: Sequence[Sequence[Tuple[Pair, ...]]],
                     last_collections: Sequence[Tuple[Pair, ...]],
                     weights: Sequence[np.ndarray]) -> Tuple[float, Tuple[Tuple[Pair, ...], ...]]:
    """
    Max over head collections (taken in the given order) and last-axis collections
    (sorted assignment) of sum |mixed difference| / prod weights, for one slice block.
    """
    p = block.ndim
    m_last = block.shape[-1]
    k_last = m_last - 1
    starts = np.zeros((len(last_collections), k_last), dtype=np.int64)
    ends = np.zeros_like(starts)
    mask = np.zeros(starts.shape, dtype=bool)
    for row, pairs in enumerate(last_collections):
        for col, (a, b) in enumerate(pairs):
            starts[row, col], ends[row, col], mask[row, col] = a, b, True

    best_value, best_choice = 0.0, None
    for combo in itertools.product(*heads):
        reduced = _head_reduce(block, combo)
        scale = np.ones(reduced.shape[:-1])
        for s, pairs in enumerate(combo):
            shape = [1] * (p - 1)
            shape[s] = len(pairs)
            scale = scale / weights[s][: len(pairs)].reshape(shape)
        jumps = np.abs(reduced[..., None, :] - reduced[..., :, None])
        per_pair = np.tensordot(scale, jumps, axes=p - 1)
        values = np.where(mask, per_pair[starts, ends], 0.0)
        objectives = _sorted_objectives(values, weights[-1])
        row = int(np.argmax(objectives))
        if objectives[row] > best_value:
            best_value = float(objectives[row])
            best_choice = tuple(combo) + (last_collections[row],)
    return best_value, best_choice  # type: ignore[return-value]


def _finest_cell_sum(g: GridFunction, alpha: Sequence[int], scale: float) -> Tuple[float, int]:
    """Max over slices of the sum of |mixed differences| over unit cells of the alpha axes."""
    blocks, _ = _slices(g.samples, alpha)
    cells = blocks
    for s in range(1, len(alpha) + 1):
        cells = np.diff(cells, axis=s)
    totals = np.abs(cells).reshape(cells.shape[0], -1).sum(axis=1) * scale
    row = int(np.argmax(totals))
    return float(totals[row]), row


def _candidate_collections(m: int) -> List[Tuple[Pair, ...]]:
    """Full interval, dyadic partitions, and the finest partition."""
    found: List[Tuple[Pair, ...]] = []
    parts = 1
    while parts < m - 1:
        edges = sorted(set(int(round(i * (m - 1) / parts)) for i in range(parts + 1)))
        found.append(tuple(zip(edges, edges[1:])))
        parts *= 2
    found.append(tuple((i, i + 1) for i in range(m - 1)))
    unique: List[Tuple[Pair, ...]] = []
    for pairs in found:
        if pairs not in unique:
            unique.append(pairs)
    return unique


@lru_cache(maxsize=None)
def _ordered_count(m: int, permute: bool) -> int:
    collections = _collection_arrays(m)[3]
    if not permute:
        return len(collections)
    return sum(math.factorial(len(pairs)) for pairs in collections)


def _exact_work(sizes: Sequence[int], permute: Sequence[bool], n_slices: int) -> int:
    work = n_slices
    for m, perm in zip(sizes[:-1], permute[:-1]):
        work *= _ordered_count(m, perm)
    return work * len(_collection_arrays(sizes[-1])[3]) * (sizes[-1] - 1)


def index_set_variation(f: AnalyticFunction, alpha: Sequence[int], lambdas: Sequence[LambdaSeq],
                        tail_offsets: Optional[Sequence[int]] = None, mode: str = "bracket",
                        grid: Optional[UniformGrid] = None) -> VariationBracket:
    """
    Bracket for the variation of f in the variables of alpha (0-based axes), with the
    remaining variables supremized over the grid.
    """
    if mode not in MODES:
        raise ValidationError(f"Unknown mode {mode!r}; expected one of {MODES}.")
    g = _grid_function(f, grid)
    alpha = tuple(int(a) for a in alpha)
    if not alpha or len(set(alpha)) != len(alpha) or any(not 0 <= a < g.dim for a in alpha):
        raise ValidationError(f"Invalid index set {alpha} for {g.dim} variables.")
    if len(lambdas) != len(alpha):
        raise ValidationError(f"Need one weight sequence per axis in {alpha}, got {len(lambdas)}.")
    offsets = tuple(tail_offsets) if tail_offsets is not None else (1,) * len(alpha)
    if len(offsets) != len(alpha):
        raise ValidationError("Need one tail offset per axis.")

    if len(alpha) == 1:
        return _single_axis_bracket(g, alpha[0], lambdas[0], offsets[0], mode)

    sizes = [g.grid.sizes[a] for a in alpha]
    weights = [_weights(lam, m - 1, off) for lam, m, off in zip(lambdas, sizes, offsets)]

    # "oracle" forces enumeration even where the finest partition is known to be optimal.
    if all(lam.is_constant for lam in lambdas) and mode in ("bracket", "exact"):
        scale = 1.0 / float(np.prod([w[0] for w in weights]))
        value, row = _finest_cell_sum(g, alpha, scale)
        _, index = _slices(g.samples, alpha)
        finest = tuple(tuple((i, i + 1) for i in range(m - 1)) for m in sizes)
        witness = IntervalCollection(alpha, finest, index[row])
        return VariationBracket(value, value, value, ("finest-partition",), witness, alpha)

    blocks, index = _slices(g.samples, alpha)
    permute = [not lam.is_constant for lam in lambdas]
    within_caps = len(alpha) <= EXACT_MAX_AXES and all(m <= EXACT_MAX_AXIS_SIZE for m in sizes)
    work = _exact_work(sizes, permute, blocks.shape[0]) if within_caps else EXACT_WORK_BUDGET + 1

    if mode != "sample" and work <= EXACT_WORK_BUDGET:
        heads = [_ordered_collections(m, perm) for m, perm in zip(sizes[:-1], permute[:-1])]
        last = _collection_arrays(sizes[-1])[3]
        best, best_choice, best_row = 0.0, None, 0
        for row in range(blocks.shape[0]):
            value, choice = _best_assignment(blocks[row], heads, last, weights)
            if value > best:
                best, best_choice, best_row = value, choice, row
        witness = IntervalCollection(alpha, best_choice, index[best_row]) if best_choice else None
        return VariationBracket(best, best, best, ("enumeration",), witness, alpha)

    if mode in ("exact", "oracle"):
        raise ExactModeRefusedError(
            f"Exact variation over axes {alpha} with sizes {sizes} exceeds the enumeration caps "
            f"(sizes <= {EXACT_MAX_AXIS_SIZE}, axes <= {EXACT_MAX_AXES}, work <= {EXACT_WORK_BUDGET})."
        )
    if mode == "bracket":
        logger.warning(f"Exact enumeration over axes {alpha} refused (sizes {sizes}); reporting a lower bound only.")

    candidates = [_candidate_collections(m) for m in sizes]
    best, best_choice, best_row = 0.0, None, 0
    for row in range(blocks.shape[0]):
        value, choice = _best_assignment(blocks[row], candidates[:-1], candidates[-1], weights)
        if value > best:
            best, best_choice, best_row = value, choice, row
    witness = IntervalCollection(alpha, best_choice, index[best_row]) if best_choice else None
    return VariationBracket(best, math.inf, None, ("sampling",), witness, alpha)


def partial_variation(f: AnalyticFunction, lam: LambdaSeq, mode: str = "bracket",
                      grid: Optional[UniformGrid] = None) -> VariationBracket:
    """Sum over axes of the single-axis variations."""
    g = _grid_function(f, grid)
    parts = [index_set_variation(g, (axis,), [lam], mode=mode) for axis in range(g.dim)]
    return combine_brackets(parts)


def total_variation(f: AnalyticFunction, lambdas: Sequence[LambdaSeq], mode: str = "bracket",
                    grid: Optional[UniformGrid] = None) -> VariationBracket:
    """Sum of index-set variations over the 2^d - 1 nonempty index sets."""
    g = _grid_function(f, grid)
    if len(lambdas) != g.dim:
        raise ValidationError(f"Need {g.dim} weight sequences, got {len(lambdas)}.")
    parts = [index_set_bracket for _, index_set_bracket in iter_index_set_variations(g, lambdas, mode)]
    return combine_brackets(parts, tuple(range(g.dim)))


def iter_index_set_variations(g: GridFunction, lambdas: Sequence[LambdaSeq],
                              mode: str = "bracket") -> Iterator[Tuple[Tuple[int, ...], VariationBracket]]:
    for p in range(1, g.dim + 1):
        for alpha in itertools.combinations(range(g.dim), p):
            seqs = [lambdas[a] for a in alpha]
            try:
                bracket = index_set_variation(g, alpha, seqs, mode=mode)
            except ExactModeRefusedError as e:
                logger.warning(f"Index set {alpha}: {e}. Falling back to a lower bound.")
                bracket = index_set_variation(g, alpha, seqs, mode="sample")
            yield alpha, bracket
