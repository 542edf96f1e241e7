import logging
import math
import threading
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import integrate, stats

from varlab.config import SEQUENCE_HORIZON
from varlab.exceptions import (
    HorizonError,
    PreconditionError,
    UnknownConditionError,
    ValidationError,
)

logger = logging.getLogger(__name__)

FAMILIES = ("harmonic", "constant", "power_log", "explicit")

# Largest prefix scanned for numeric evidence.
_SCAN_LIMIT = 100_000
# check_lambda2 thresholds on the fitted log-log slope of r_n.
_SLOPE_THRESHOLD = 0.05
_SLOPE_SIGMAS = 3.0


class Condition(str, Enum):
    LAMBDA = "lambda"
    LAMBDA1 = "lambda1"
    LAMBDA2 = "lambda2"
    LAMBDA3 = "lambda3"
    VAR = "var"


class Verdict(str, Enum):
    HOLDS = "holds"
    FAILS = "fails"
    INCONCLUSIVE = "inconclusive"


def parse_condition(condition: Any) -> Condition:
    try:
        return Condition(condition)
    except ValueError:
        raise UnknownConditionError(
            f"Unknown condition {condition!r}; expected one of {[c.value for c in Condition]}."
        ) from None


class LambdaSeq:
    """
    Positive nondecreasing weight sequence lambda_1, lambda_2, ... with lazy,
    lock-guarded materialization up to `horizon`. Indices are 1-based.
    """

    def __init__(
        self,
        family: str,
        params: Optional[Dict[str, Any]] = None,
        horizon: int = SEQUENCE_HORIZON,
        source: Optional[Callable[[np.ndarray], np.ndarray]] = None,
        label: Optional[str] = None,
        exponents: Optional[Tuple[float, float]] = None,
        constant: bool = False,
    ):
        self.family = family
        self.params: Dict[str, Any] = dict(params or {})
        self.horizon = int(horizon)
        self._source = source
        self._label = label
        self._exponents = exponents
        self._constant = constant
        self._cache = np.empty(0)
        self._lock = threading.Lock()

    # --- construction helpers ---

    @classmethod
    def from_values(cls, values: Sequence[float], label: str = "explicit", check: bool = True) -> "LambdaSeq":
        array = np.asarray(values, dtype=float).copy()
        if array.ndim != 1 or array.size == 0:
            raise ValidationError("Explicit sequence needs at least one value.")
        if check:
            _check_normalized(array, label)
        array.setflags(write=False)
        constant = bool(np.all(array == array[0]))
        seq = cls("explicit", {"values": label}, horizon=array.size, label=label, constant=constant)
        seq._cache = array
        return seq

    def _formula(self, n: np.ndarray) -> np.ndarray:
        if self._source is not None:
            return self._source(n)
        if self.family == "harmonic":
            return n.astype(float)
        if self.family == "constant":
            return np.full(n.shape, float(self.params.get("c", 1.0)))
        if self.family == "power_log":
            a = float(self.params["a"])
            b = float(self.params["b"])
            n_star = power_log_pivot(a, b)
            x = n.astype(float)
            return x ** a * (np.log(np.maximum(x, n_star)) / math.log(n_star)) ** b
        raise ValidationError(f"Sequence family {self.family!r} has no formula.")

    def _grow(self, target: int) -> None:
        start = self._cache.size
        idx = np.arange(start + 1, target + 1)
        fresh = np.asarray(self._formula(idx), dtype=float)
        merged = np.concatenate([self._cache, fresh])
        _check_normalized(merged[max(0, start - 1):], self.describe(), offset=max(0, start - 1))
        merged.setflags(write=False)
        self._cache = merged
        logger.debug(f"Materialized {self.describe()} up to n={target}.")

    def values(self, n: int) -> np.ndarray:
        """lambda_1 .. lambda_n as a read-only array."""
        n = int(n)
        if n < 1:
            raise ValidationError(f"Need at least one term, got n={n}.")
        if n > self.horizon:
            raise HorizonError(f"{self.describe()}: index {n} beyond horizon {self.horizon}.")
        if self._cache.size < n:
            with self._lock:
                if self._cache.size < n:
                    self._grow(min(self.horizon, max(n, 2 * self._cache.size, 64)))
        return self._cache[:n]

    def __getitem__(self, n: int) -> float:
        if n < 1:
            raise IndexError("Sequences are indexed from 1.")
        return float(self.values(n)[n - 1])

    # --- metadata ---

    @property
    def exponents(self) -> Optional[Tuple[float, float]]:
        """(a, b) with lambda_n comparable to n^a log^b n, for closed families."""
        if self._exponents is not None:
            return self._exponents
        if self.family == "harmonic":
            return (1.0, 0.0)
        if self.family == "constant":
            return (0.0, 0.0)
        if self.family == "power_log":
            return (float(self.params["a"]), float(self.params["b"]))
        return None

    @property
    def is_constant(self) -> bool:
        if self.family == "constant" or self._constant:
            return True
        return self.family == "power_log" and self.exponents == (0.0, 0.0)

    @property
    def diverges(self) -> Optional[bool]:
        """lambda_n -> infinity, from family metadata; None when unknown."""
        exps = self.exponents
        if exps is None:
            return None
        a, b = exps
        return a > 0 or b > 0

    @property
    def scale(self) -> float:
        """Constant factor k with lambda_n = k * n^a log^b n for large n."""
        if self.family == "constant":
            return float(self.params.get("c", 1.0))
        if self.family == "power_log":
            a, b = self.exponents  # type: ignore[misc]
            return math.log(power_log_pivot(a, b)) ** (-b)
        if self.family == "harmonic":
            return 1.0
        return float(self.params.get("scale", 1.0))

    def describe(self) -> str:
        if self._label:
            return self._label
        if self.family == "power_log":
            return f"power_log:{self.params['a']:g},{self.params['b']:g}"
        if self.family == "constant" and self.params.get("c", 1.0) != 1.0:
            return f"constant:{self.params['c']:g}"
        return self.family

    def shifted(self, n: int) -> "LambdaSeq":
        """Tail view lambda_n, lambda_{n+1}, ..."""
        if n < 1:
            raise ValidationError(f"Shift must be >= 1, got {n}.")
        base = self

        def source(idx: np.ndarray) -> np.ndarray:
            return base.values(int(idx[-1]) + n - 1)[idx + n - 2]

        return LambdaSeq(
            "shifted",
            {"base": self.describe(), "offset": n},
            horizon=self.horizon - n + 1,
            source=source,
            label=f"{self.describe()}>>{n}",
            exponents=self.exponents,
            constant=self.is_constant,
        )

    def __repr__(self) -> str:
        return f"LambdaSeq({self.describe()}, horizon={self.horizon})"


def power_log_pivot(a: float, b: float) -> float:
    """Point from which n^a log^b n is nondecreasing (at least 2)."""
    if a > 0:
        return max(2.0, math.exp(-b / a))
    return 2.0


def _check_normalized(values: np.ndarray, name: str, offset: int = 0) -> None:
    if not np.all(np.isfinite(values)) or np.any(values <= 0):
        bad = int(np.flatnonzero(~(np.isfinite(values) & (values > 0)))[0])
        raise ValidationError(f"{name}: term {bad + offset + 1} is not positive and finite.")
    drops = np.flatnonzero(np.diff(values) < 0)
    if drops.size:
        i = int(drops[0]) + offset + 1
        raise ValidationError(f"{name}: decreases between n={i} and n={i + 1}.")


def make_lambda(family: str, params: Optional[Dict[str, Any]] = None, horizon: int = SEQUENCE_HORIZON) -> LambdaSeq:
    """
    Builds and checks a weight sequence. Families: harmonic, constant (c),
    power_log (a, b), explicit (values).
    """
    params = dict(params or {})
    if family not in FAMILIES:
        raise ValidationError(f"Unknown sequence family {family!r}; expected one of {FAMILIES}.")
    if family == "explicit":
        values = params.get("values")
        if values is None or len(values) == 0:
            raise ValidationError("Explicit family needs a nonempty 'values' list.")
        return LambdaSeq.from_values(values, label=params.get("label", "explicit"))
    if horizon < 1:
        raise ValidationError(f"Horizon must be positive, got {horizon}.")
    if family == "constant":
        c = float(params.get("c", 1.0))
        if c <= 0:
            raise ValidationError(f"Constant family needs c > 0, got {c}.")
        params = {"c": c}
    elif family == "power_log":
        try:
            a = float(params["a"])
            b = float(params.get("b", 0.0))
        except (KeyError, TypeError, ValueError) as e:
            raise ValidationError(f"power_log needs numeric a and b: {e}") from e
        if not (0 < a <= 1 or (a == 0 and b >= 0)):
            raise ValidationError(f"power_log needs a in (0, 1], or a = 0 with b >= 0; got a={a}, b={b}.")
        params = {"a": a, "b": b}
    seq = LambdaSeq(family, params, horizon=horizon)
    seq.values(horizon)
    logger.info(f"Built weight sequence {seq.describe()} (horizon {horizon}).")
    return seq


# --- series ---

def series_term(lam: LambdaSeq, n, d: int) -> np.ndarray:
    """lambda_n * log^{d-2}(max(n, 2)) / n^2."""
    idx = np.atleast_1d(np.asarray(n, dtype=np.int64))
    values = lam.values(int(idx.max()))[idx - 1]
    logs = np.log(np.maximum(idx, 2).astype(float)) ** (d - 2)
    return values * logs / idx.astype(float) ** 2


def series_partial_sums(lam: LambdaSeq, d: int, count: int, start: int = 1) -> np.ndarray:
    """Cumulative sums of series_term from `start` to `count` (element i ends at n = start + i)."""
    if count < start:
        raise ValidationError(f"count {count} below start {start}.")
    return np.cumsum(series_term(lam, np.arange(start, count + 1), d))


def _integral_remainder(lam: LambdaSeq, d: int, start: float) -> Tuple[float, bool]:
    """Integral of the series term from `start` to infinity; second item flags truncation."""
    exps = lam.exponents
    if exps is None:
        return 0.0, True
    a, b = exps
    c = b + d - 2
    u0 = math.log(start)
    if a >= 1:
        if c >= -1:
            return math.inf, False
        return lam.scale * u0 ** (c + 1) / (-(c + 1)), False
    value, _ = integrate.quad(lambda u: math.exp((a - 1) * u) * u ** c, u0, math.inf, limit=200)
    return lam.scale * value, False


@dataclass(frozen=True)
class TailEstimate:
    value: float
    numeric: float
    remainder: float
    truncated: bool


def tail_sums(lam: LambdaSeq, d: int, horizon: int) -> Tuple[np.ndarray, float, bool]:
    """T_n for n = 1..horizon (index n-1), plus the remainder past the horizon."""
    terms = series_term(lam, np.arange(1, horizon + 1), d)
    remainder, truncated = _integral_remainder(lam, d, horizon + 0.5)
    tails = np.cumsum(terms[::-1])[::-1] + remainder
    return tails, remainder, truncated


def tail_sum(lam: LambdaSeq, n: int, d: int, horizon: Optional[int] = None) -> TailEstimate:
    """sum_{k >= n} of series_term: numeric part to the horizon plus an integral remainder."""
    horizon = min(horizon or lam.horizon, lam.horizon)
    if n > horizon:
        raise HorizonError(f"Tail start {n} beyond horizon {horizon}.")
    numeric = math.fsum(series_term(lam, np.arange(n, horizon + 1), d))
    remainder, truncated = _integral_remainder(lam, d, horizon + 0.5)
    return TailEstimate(numeric + remainder, numeric, remainder, truncated)


# --- conditions ---

@dataclass
class ConditionReport:
    condition: Condition
    verdict: Verdict
    evidence: Dict[str, Any] = field(default_factory=dict)
    params: Dict[str, Any] = field(default_factory=dict)

    def evidence_text(self) -> str:
        parts = []
        for key, value in self.evidence.items():
            text = f"{value:.17g}" if isinstance(value, float) else str(value)
            parts.append(f"{key}={text}")
        return ";".join(parts)


def _series_converges(a: float, b: float, d: int) -> bool:
    return a < 1 or (a == 1 and b + d - 2 < -1)


def _numeric_series_evidence(lam: LambdaSeq, d: int) -> Dict[str, Any]:
    n = min(lam.horizon, _SCAN_LIMIT)
    sums = series_partial_sums(lam, d, n)
    half = sums[n // 2 - 1] if n >= 2 else sums[0]
    return {"scan_n": n, "partial_sum": float(sums[-1]), "last_half_increment": float(sums[-1] - half)}


def _ratio_scan(lam: LambdaSeq) -> Dict[str, Any]:
    n = min(lam.horizon, _SCAN_LIMIT)
    ratios = lam.values(n) / np.arange(1, n + 1)
    rises = np.flatnonzero(np.diff(ratios) > 1e-15 * ratios[:-1])
    return {"ratio_scan_n": n, "ratio_nonincreasing": not rises.size,
            "first_rise": int(rises[0]) + 1 if rises.size else 0}


def classify_condition(seq: LambdaSeq, condition: Any, d: int = 2, delta: Optional[float] = None) -> ConditionReport:
    """Symbolic verdict for closed families; numeric evidence only for explicit lists."""
    cond = parse_condition(condition)
    if d < 1:
        raise ValidationError(f"Dimension must be >= 1, got {d}.")
    params = {"d": d, "family": seq.describe()}
    if delta is not None:
        params["delta"] = delta
    exps = seq.exponents

    if cond is Condition.VAR:
        return ConditionReport(cond, Verdict.INCONCLUSIVE,
                               {"note": "decided from modulus tables by check_var"}, params)

    if cond is Condition.LAMBDA2:
        if exps is None:
            return check_lambda2(seq, delta if delta is not None else 2.0)
        a, b = exps
        verdict = Verdict.HOLDS if a == 1 else Verdict.FAILS
        rule = "a == 1: r_n tends to delta^(-b)" if a == 1 else "a < 1: r_n grows like n^((1-a)(delta-1))"
        return ConditionReport(cond, verdict, {"rule": rule, "a": a, "b": b}, params)

    if cond in (Condition.LAMBDA1, Condition.LAMBDA3, Condition.LAMBDA):
        if exps is None:
            evidence = _numeric_series_evidence(seq, d)
            if cond is Condition.LAMBDA:
                evidence.update(_ratio_scan(seq))
                if not evidence["ratio_nonincreasing"]:
                    return ConditionReport(cond, Verdict.FAILS, evidence, params)
            return ConditionReport(cond, Verdict.INCONCLUSIVE, evidence, params)
        a, b = exps
        converges = _series_converges(a, b, d)
        evidence: Dict[str, Any] = {
            "rule": "sum n^(a-2) log^(b+d-2) n converges iff a < 1 or (a = 1 and b + d - 2 < -1)",
            "a": a, "b": b, "log_exponent": b + d - 2, "series_converges": converges,
        }
        if cond is Condition.LAMBDA1:
            verdict = Verdict.HOLDS if converges else Verdict.FAILS
        elif cond is Condition.LAMBDA3:
            verdict = Verdict.FAILS if converges else Verdict.HOLDS
        else:
            eventually = a < 1 or (a == 1 and b <= 0)
            evidence["ratio_eventually_decreasing"] = eventually
            evidence.update(_ratio_scan(seq))
            ok = converges and eventually and evidence["ratio_nonincreasing"] and bool(seq.diverges or a < 1)
            verdict = Verdict.HOLDS if ok else Verdict.FAILS
        logger.debug(f"{cond.value} for {seq.describe()} (d={d}): {verdict.value}")
        return ConditionReport(cond, verdict, evidence, params)

    raise UnknownConditionError(f"Unhandled condition {cond}.")  # pragma: no cover


def _floor_power(n: np.ndarray, delta: float) -> np.ndarray:
    raw = np.floor(n.astype(float) ** delta + 1e-9).astype(np.int64)
    return np.maximum(raw, 1)


def check_lambda2(seq: LambdaSeq, delta: float, n_range: Optional[Tuple[int, int]] = None) -> ConditionReport:
    """
    r_n = (lambda_n / n) / (lambda_[n^delta] / [n^delta]) on log-spaced n; a
    log-log slope fit decides bounded (holds) against power growth (fails).
    """
    if delta is None or delta <= 1:
        raise ValidationError(f"delta must exceed 1, got {delta}.")
    if n_range is None:
        hi = int(math.floor(seq.horizon ** (1.0 / delta) + 1e-9))
        while hi > 1 and _floor_power(np.array([hi]), delta)[0] > seq.horizon:
            hi -= 1
        lo = 2
    else:
        lo, hi = (int(v) for v in n_range)
    if hi < 4 or lo >= hi:
        raise HorizonError(f"Horizon {seq.horizon} too small for delta={delta} (n range {lo}..{hi}).")
    top = int(_floor_power(np.array([hi]), delta)[0])
    if top > seq.horizon:
        raise HorizonError(f"[{hi}^{delta}] = {top} exceeds horizon {seq.horizon}.")

    fit_lo = max(lo, int(math.sqrt(lo * hi)))
    ns = np.unique(np.round(np.geomspace(fit_lo, hi, 40)).astype(np.int64))
    powers = _floor_power(ns, delta)
    values = seq.values(top)
    ratios = (values[ns - 1] / ns) / (values[powers - 1] / powers)
    fit = stats.linregress(np.log(ns), np.log(ratios))
    slope, stderr = float(fit.slope), float(fit.stderr)
    if slope - _SLOPE_SIGMAS * stderr > _SLOPE_THRESHOLD:
        verdict = Verdict.FAILS
    elif slope + _SLOPE_SIGMAS * stderr < _SLOPE_THRESHOLD:
        verdict = Verdict.HOLDS
    else:
        verdict = Verdict.INCONCLUSIVE
    evidence = {"sup_ratio": float(ratios.max()), "slope": slope, "stderr": stderr,
                "n_lo": int(ns[0]), "n_hi": int(ns[-1])}
    return ConditionReport(Condition.LAMBDA2, verdict, evidence, {"delta": delta, "family": seq.describe()})


def _table_values(table: Any) -> np.ndarray:
    values = getattr(table, "values", table)
    return np.asarray(values, dtype=float).ravel()


def _dyadic(values: np.ndarray) -> np.ndarray:
    """v(2^j) for j = 0..floor(log2 n_max)."""
    J = int(math.floor(math.log2(values.size)))
    return values[(2 ** np.arange(J + 1)) - 1]


def check_var(tables: Sequence[Any], d: int, exponents: Optional[Sequence[float]] = None) -> ConditionReport:
    """
    Convergence of sum_j v_i(2^j)^{1/d} / 2^{j/d} for every axis. Declared growth
    exponents decide the verdict; the tables only supply fitted evidence.
    """
    if not tables:
        raise ValidationError("check_var needs at least one modulus table.")
    evidence: Dict[str, Any] = {}
    for axis, table in enumerate(tables):
        dyadic = _dyadic(_table_values(table))
        js = np.arange(dyadic.size)
        evidence[f"partial_sum_axis{axis}"] = float(np.sum(dyadic ** (1.0 / d) / 2.0 ** (js / d)))
        positive = dyadic > 0
        if positive.sum() >= 3:
            fit = stats.linregress(js[positive] * math.log(2), np.log(dyadic[positive]))
            evidence[f"fitted_exponent_axis{axis}"] = float(fit.slope)
        else:
            evidence[f"fitted_exponent_axis{axis}"] = 0.0
    params: Dict[str, Any] = {"d": d}
    if exponents is None:
        return ConditionReport(Condition.VAR, Verdict.INCONCLUSIVE, evidence, params)
    params["exponents"] = ",".join(f"{e:g}" for e in exponents)
    verdict = Verdict.HOLDS if all(e < 1 for e in exponents) else Verdict.FAILS
    evidence["rule"] = "holds iff every declared exponent is below 1"
    return ConditionReport(Condition.VAR, verdict, evidence, params)


# --- constructions ---

@dataclass
class GammaConstruction:
    A: np.ndarray
    gamma: Optional[LambdaSeq]
    checks: Dict[str, bool]
    weighted_sum: float
    weighted_bound: float
    constants: Dict[int, float]
    constant: float
    tail_total: float
    horizon: int
    failures: List[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(self.checks.values())

    def gamma_over_n(self, n: int) -> float:
        return 1.0 / float(self.A[n - 1])


def construct_gamma(lam: LambdaSeq, d: int, horizon: int = SEQUENCE_HORIZON, theta: float = 0.5) -> GammaConstruction:
    """
    A_n = (T_n / T_1)^(-theta/d) from the series tails T_n, repaired in one pass so
    that A_n is nondecreasing and lambda_n A_n / n nonincreasing; gamma_n = n / A_n.
    Every property is verified on [1, horizon] and reported.
    """
    if not 0 < theta < 1:
        raise ValidationError(f"theta must lie in (0, 1), got {theta}.")
    pre = classify_condition(lam, Condition.LAMBDA, d)
    if pre.verdict is Verdict.FAILS:
        raise PreconditionError(f"{lam.describe()} does not satisfy the convergence hypothesis for d={d}: {pre.evidence_text()}")
    H = min(horizon, lam.horizon)
    tails, remainder, truncated = tail_sums(lam, d, H)
    if not math.isfinite(tails[0]):
        raise PreconditionError(f"Series for {lam.describe()} diverges (d={d}).")
    t1 = float(tails[0])
    raw = (tails / t1) ** (-theta / d)

    lam_values = lam.values(H)
    lv = lam_values.tolist()
    rv = raw.tolist()
    repaired = [rv[0]]
    failures: List[str] = []
    for i in range(1, H):
        n = i + 1
        prev = repaired[-1]
        cap = prev * (n * lv[i - 1]) / ((n - 1) * lv[i])
        if cap < prev and not failures:
            failures.append(f"empty repair interval at n={n}: lambda_n/n increases")
        repaired.append(min(max(rv[i], prev), cap))
    A = np.asarray(repaired)
    n_idx = np.arange(1, H + 1, dtype=float)
    s = lam_values * A / n_idx
    terms = series_term(lam, np.arange(1, H + 1), d)
    weighted_sum = math.fsum(terms * A ** d)
    weighted_bound = t1 / (1.0 - theta)
    gamma_values = n_idx / A

    checks = {
        "A_increasing": bool(np.all(np.diff(A) >= 0) and (H == 1 or A[-1] > A[0])),
        "s_decreasing": bool(np.all(np.diff(s) <= 1e-12 * s[:-1])),
        "weighted_sum_finite": bool(weighted_sum <= weighted_bound * (1 + 1e-9)),
        "gamma_over_n_decreasing": bool(np.all(np.diff(1.0 / A) <= 0)),
        "gamma_nondecreasing": bool(np.all(np.diff(gamma_values) >= -1e-12 * gamma_values[:-1])),
        "tails_complete": not truncated,
    }
    for name, passed in checks.items():
        if name == "tails_complete":
            if not passed:
                failures.append(f"explicit sequence: tails truncated at n={H}")
        elif not passed:
            failures.append(f"{name} fails on [1, {H}]")

    harmonic = np.cumsum(1.0 / n_idx)
    constants: Dict[int, float] = {1: float(s.max())}
    for p in range(2, d + 1):
        body = math.fsum(lam_values * A ** p * harmonic ** (p - 2) / n_idx ** 2)
        factor = (1 + 1 / math.log(2)) ** (p - 2) / math.log(2) ** (d - p)
        tail = factor * t1 ** theta * remainder ** (1 - theta) / (1 - theta)
        constants[p] = math.factorial(p) * 2 ** (p - 1) * (body + tail)

    gamma = None
    if checks["gamma_nondecreasing"]:
        monotone = np.maximum.accumulate(gamma_values)
        gamma = LambdaSeq.from_values(monotone, label=f"gamma[{lam.describe()},d={d}]")
    result = GammaConstruction(
        A=A, gamma=gamma, checks=checks, weighted_sum=weighted_sum, weighted_bound=weighted_bound,
        constants=constants, constant=max(constants.values()), tail_total=t1, horizon=H, failures=failures,
    )
    if result.ok:
        logger.info(f"Gamma construction for {lam.describe()} (d={d}, H={H}) verified; C={result.constant:.6g}")
    else:
        logger.warning(f"Gamma construction for {lam.describe()} (d={d}) failed checks: {failures}")
    return result


@dataclass
class DeltaConstruction:
    B: Optional[np.ndarray]  # B[j] = B_{2^j}
    delta: Optional[LambdaSeq]
    U: np.ndarray
    checks: Dict[str, bool]
    weighted_sum: float
    weighted_bound: float
    degenerate: bool
    truncated: bool = True

    @property
    def ok(self) -> bool:
        return not self.degenerate and all(self.checks.values())

    def B_at(self, n: int) -> float:
        if self.B is None:
            return math.inf
        j = min(int(math.floor(math.log2(n))), self.B.size - 1)
        return float(self.B[j])


def construct_delta(tables: Sequence[Any], d: int, horizon: Optional[int] = None) -> DeltaConstruction:
    """
    U_j = max over axes of sum_{l >= j} v(2^l)^{1/d} / 2^{l/d} (finite tables),
    B_{2^j} = (U_0 / U_j)^{1/2} on dyadic plateaus, delta = nondecreasing
    envelope of n / B_n.
    """
    if not tables:
        raise ValidationError("construct_delta needs at least one modulus table.")
    dyadics = [_dyadic(_table_values(t)) for t in tables]
    J = min(v.size for v in dyadics) - 1
    js = np.arange(J + 1)
    per_axis = [np.cumsum((v[: J + 1] ** (1.0 / d) / 2.0 ** (js / d))[::-1])[::-1] for v in dyadics]
    U = np.max(np.vstack(per_axis), axis=0)
    if U[0] <= 0:
        logger.warning("Modulus tables are identically zero; delta construction is degenerate.")
        return DeltaConstruction(None, None, U, {}, 0.0, 0.0, degenerate=True)

    B = np.maximum.accumulate(np.sqrt(U[0] / U))
    n_max = horizon or 2 ** (J + 1) - 1
    n = np.arange(1, n_max + 1)
    plateau = np.minimum(np.floor(np.log2(n)).astype(np.int64), J)
    B_n = B[plateau]
    delta_values = np.maximum.accumulate(n / B_n)
    decrements = U - np.append(U[1:], 0.0)
    weighted_sum = math.fsum(decrements * B)
    weighted_bound = 2.0 * U[0]
    ratio = delta_values / n
    checks = {
        "B_increasing": bool(np.all(np.diff(B) >= 0) and (J == 0 or B[-1] > B[0])),
        "delta_over_n_decreasing": bool(np.all(np.diff(ratio) <= 1e-12 * ratio[:-1])),
        "weighted_sum_finite": bool(weighted_sum <= weighted_bound * (1 + 1e-9)),
    }
    delta = LambdaSeq.from_values(delta_values, label=f"delta[d={d}]")
    logger.info(f"Delta construction over {J + 1} dyadic levels: B_max={B[-1]:.6g}, checks={checks}")
    return DeltaConstruction(B, delta, U, checks, weighted_sum, weighted_bound, degenerate=False)
