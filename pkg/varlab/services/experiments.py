import itertools
import logging
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import stats

from varlab.engines.counterexample import build_spec, lower_bound_at, pv_bound_fN, w_size
from varlab.engines.fourier import PartialSumRequest, origin_sum_fN, rectangular_partial_sum
from varlab.engines.model import UniformGrid, star_value
from varlab.engines.sequences import Condition, LambdaSeq, check_var, classify_condition, construct_delta, construct_gamma
from varlab.engines.variation import index_set_variation, modulus_of_variation, partial_variation
from varlab.exceptions import PreconditionError, ValidationError
from varlab.functions import AnalyticFunction
from varlab.functions.ridge import MAX_TERMS, RidgeSum
from varlab.helpers import parse_family_string, parse_source_string

logger = logging.getLogger(__name__)

Row = Dict[str, Any]


@dataclass
class Table:
    columns: List[str]
    rows: List[Row] = field(default_factory=list)


@dataclass
class Prepared:
    """State shared by every schedule point of one run."""

    lam: LambdaSeq
    function: Optional[AnalyticFunction] = None
    x0: Tuple[float, ...] = ()
    extra: Dict[str, Any] = field(default_factory=dict)
    summary: Dict[str, Any] = field(default_factory=dict)
    tables: Dict[str, Table] = field(default_factory=dict)


class Experiment(ABC):
    """One experiment archetype: a schedule of independent points plus a summary."""

    @property
    @abstractmethod
    def name(self) -> str:
        pass

    @property
    @abstractmethod
    def columns(self) -> List[str]:
        pass

    @property
    def plot(self) -> Tuple[str, str, bool, bool]:
        """x column, y column, log x, log y."""
        return self.columns[0], self.columns[1], True, False

    @property
    def defaults(self) -> Dict[str, Any]:
        return {}

    @abstractmethod
    def prepare(self, config: Any) -> Prepared:
        pass

    def items(self, config: Any, prepared: Prepared) -> Sequence[Any]:
        return list(config.schedule)

    @abstractmethod
    def run_point(self, config: Any, prepared: Prepared, item: Any) -> List[Row]:
        pass

    def finish(self, config: Any, prepared: Prepared, rows: List[Row]) -> None:
        """Fills prepared.summary from the ordered rows."""
        return None


def _x0(config: Any, dim: int) -> Tuple[float, ...]:
    point = tuple(config.x0) if config.x0 else (0.0, 1.0, 1.0)[:dim]
    if len(point) != dim:
        raise ValidationError(f"x0 has {len(point)} coordinates, expected {dim}")
    return point


def _convergence_row(f: AnalyticFunction, x0: Tuple[float, ...], f_star: float, N: int, estimate_error: bool) -> Row:
    request = PartialSumRequest.square(N, [x0], f.dim, path="coeff", estimate_error=estimate_error)
    result = rectangular_partial_sum(f, request)
    value = float(result.values[0])
    return {
        "N": N,
        "S": value,
        "f_star": f_star,
        "error": abs(value - f_star),
        "est_error": result.est_error if result.est_error is not None else math.nan,
    }


def counterexample_row(d: int, delta: float, N: int, lam: LambdaSeq) -> Row:
    """One row of the f_N table: sizes, the origin partial sum and the variation bounds."""
    spec = build_spec(d, delta, N, lam)
    bound = pv_bound_fN(spec)
    return {
        "N": spec.N,
        "N_delta": spec.n_delta,
        "w_size": w_size(spec),
        "S_origin": origin_sum_fN(spec).value,
        "pv_grid_lower": bound.grid_lower,
        "pv_analytic_upper": bound.analytic_upper,
        "lower_bound_series_at_N_delta": lower_bound_at(lam, d, spec.n_delta),
    }


COUNTEREXAMPLE_COLUMNS = ["N", "N_delta", "w_size", "S_origin", "pv_grid_lower", "pv_analytic_upper",
                          "lower_bound_series_at_N_delta"]


def _monotone_tail(values: List[float], count: int = 3) -> bool:
    tail = values[-count:]
    return all(b <= a for a, b in zip(tail, tail[1:]))


class ConvergenceDemo(Experiment):
    """|S_{N,...,N}(f; x0) - f*(x0)| for a piecewise-smooth f of bounded partial Lambda-variation."""

    @property
    def name(self) -> str:
        return "convergence-demo"

    @property
    def columns(self) -> List[str]:
        return ["N", "S", "f_star", "error", "est_error"]

    @property
    def plot(self) -> Tuple[str, str, bool, bool]:
        return "N", "error", True, True

    @property
    def defaults(self) -> Dict[str, Any]:
        return {"function": "jump_line(dim=2)", "family": "power_log:1,-1.5", "schedule": [8, 16, 32, 64, 128, 256]}

    def prepare(self, config: Any) -> Prepared:
        f = parse_source_string(config.function)
        lam = parse_family_string(config.family)
        x0 = _x0(config, f.dim)
        prepared = Prepared(lam, f, x0)
        prepared.extra["f_star"] = star_value(f, x0).value
        report = classify_condition(lam, Condition.LAMBDA1, f.dim)
        prepared.summary["lambda1"] = report.verdict.value
        coarse = partial_variation(f, lam, grid=UniformGrid.cube(f.dim, min(config.grid, 64)))
        prepared.summary["pv_upper_coarse"] = coarse.upper
        return prepared

    def run_point(self, config: Any, prepared: Prepared, item: Any) -> List[Row]:
        return [_convergence_row(prepared.function, prepared.x0, prepared.extra["f_star"], int(item), config.estimate_error)]

    def finish(self, config: Any, prepared: Prepared, rows: List[Row]) -> None:
        errors = [r["error"] for r in rows if r.get("status") != "failed"]
        if errors:
            prepared.summary["initial_error"] = errors[0]
            prepared.summary["final_error"] = errors[-1]
            prepared.summary["final_over_initial"] = errors[-1] / errors[0] if errors[0] else math.nan
            prepared.summary["last_three_nonincreasing"] = _monotone_tail(errors)


class DivergenceGrowth(Experiment):
    """S_{N,...,N}(f_N; 0) against the lower-bound series, with the partial-variation bounds of f_N."""

    @property
    def name(self) -> str:
        return "divergence-growth"

    @property
    def columns(self) -> List[str]:
        return list(COUNTEREXAMPLE_COLUMNS)

    @property
    def plot(self) -> Tuple[str, str, bool, bool]:
        return "N", "S_origin", True, False

    @property
    def defaults(self) -> Dict[str, Any]:
        return {"family": "power_log:1,-1", "delta": 2.0, "schedule": [2 ** k for k in range(5, 12)]}

    def prepare(self, config: Any) -> Prepared:
        return Prepared(parse_family_string(config.family))

    def run_point(self, config: Any, prepared: Prepared, item: Any) -> List[Row]:
        return [counterexample_row(config.d, config.delta, int(item), prepared.lam)]

    def finish(self, config: Any, prepared: Prepared, rows: List[Row]) -> None:
        good = [r for r in rows if r.get("status") != "failed"]
        s = np.array([r["S_origin"] for r in good])
        lb = np.array([r["lower_bound_series_at_N_delta"] for r in good])
        prepared.summary["s_origin_increasing"] = bool(np.all(np.diff(s) > 0)) if s.size else False
        if s.size >= 3 and np.ptp(s) > 0 and np.ptp(lb) > 0:
            prepared.summary["pearson_r"] = float(stats.pearsonr(s, lb)[0])
        uppers = [r["pv_analytic_upper"] for r in good if r["pv_analytic_upper"] > 0]
        if uppers:
            prepared.summary["upper_ratio"] = max(uppers) / min(uppers)


class GammaInclusion(Experiment):
    """V_Gamma^alpha(f) <= C * PV_Lambda(f) on seeded ridge sums, with Gamma from the tail construction."""

    @property
    def name(self) -> str:
        return "gamma-inclusion"

    @property
    def columns(self) -> List[str]:
        return ["sample", "alpha", "v_gamma_lower", "pv_lambda_upper", "constant", "bound", "ok"]

    @property
    def plot(self) -> Tuple[str, str, bool, bool]:
        return "sample", "v_gamma_lower", False, False

    @property
    def defaults(self) -> Dict[str, Any]:
        return {"family": "power_log:1,-2", "grid": 16, "samples": 50}

    def prepare(self, config: Any) -> Prepared:
        lam = parse_family_string(config.family)
        construction = construct_gamma(lam, config.d, horizon=config.horizon)
        prepared = Prepared(lam)
        prepared.extra["construction"] = construction
        prepared.summary["constant"] = construction.constant
        prepared.summary["checks_passed"] = construction.ok
        for name, passed in construction.checks.items():
            prepared.summary[f"check_{name}"] = passed
        return prepared

    def items(self, config: Any, prepared: Prepared) -> Sequence[Any]:
        return list(range(config.samples))

    def run_point(self, config: Any, prepared: Prepared, item: Any) -> List[Row]:
        construction = prepared.extra["construction"]
        if construction.gamma is None:
            raise PreconditionError("gamma construction failed its checks; no sequence to test")
        rng = np.random.default_rng([config.seed, int(item)])
        f = RidgeSum(dim=config.d, terms=int(rng.integers(1, MAX_TERMS + 1)), seed=int(rng.integers(2 ** 31)), cells=config.grid)
        grid = UniformGrid.cube(config.d, config.grid)
        pv = partial_variation(f, prepared.lam, grid=grid)
        rows = []
        for p in range(1, config.d + 1):
            for alpha in _index_sets(config.d, p):
                mode = "bracket" if p == 1 else "sample"
                bracket = index_set_variation(f, alpha, [construction.gamma] * p, mode=mode, grid=grid)
                bound = construction.constant * pv.upper
                rows.append({
                    "sample": int(item),
                    "alpha": "+".join(str(a + 1) for a in alpha),
                    "v_gamma_lower": bracket.value,
                    "pv_lambda_upper": pv.upper,
                    "constant": construction.constant,
                    "bound": bound,
                    "ok": int(bracket.value <= bound * (1 + 1e-12)),
                })
        return rows

    def finish(self, config: Any, prepared: Prepared, rows: List[Row]) -> None:
        prepared.summary["violations"] = sum(1 for r in rows if r.get("ok") == 0)


def _index_sets(d: int, p: int) -> List[Tuple[int, ...]]:
    return list(itertools.combinations(range(d), p))


class ModulusClass(Experiment):
    """Modulus tables, the (var) verdict, the delta envelope, and a convergence sweep."""

    @property
    def name(self) -> str:
        return "modulus-class"

    @property
    def columns(self) -> List[str]:
        return ["N", "S", "f_star", "error", "est_error"]

    @property
    def plot(self) -> Tuple[str, str, bool, bool]:
        return "N", "error", True, True

    @property
    def defaults(self) -> Dict[str, Any]:
        return {"function": "zigzag(dim=2)", "family": "power_log:1,-1.5", "grid": 512,
                "schedule": [8, 16, 32, 64, 128, 256]}

    def prepare(self, config: Any) -> Prepared:
        f = parse_source_string(config.function)
        lam = parse_family_string(config.family)
        x0 = _x0(config, f.dim)
        prepared = Prepared(lam, f, x0)
        prepared.extra["f_star"] = star_value(f, x0).value
        grid = UniformGrid.cube(f.dim, config.grid)
        n_max = min(64, config.grid - 1)
        tables = [modulus_of_variation(f, axis, n_max, grid) for axis in range(f.dim)]
        report = check_var(tables, f.dim, f.modulus_exponents)
        delta = construct_delta(tables, f.dim)
        prepared.summary["var"] = report.verdict.value
        prepared.summary["delta_degenerate"] = delta.degenerate
        for name, passed in delta.checks.items():
            prepared.summary[f"delta_{name}"] = passed
        for key, value in report.evidence.items():
            if key.startswith("fitted_exponent"):
                prepared.summary[key] = value
        modulus = Table(["n"] + [f"v_{axis + 1}" for axis in range(f.dim)])
        for n in range(1, n_max + 1):
            row: Row = {"n": n}
            for table in tables:
                row[f"v_{table.axis + 1}"] = table.at(n)
            modulus.rows.append(row)
        prepared.tables["modulus"] = modulus
        return prepared

    def run_point(self, config: Any, prepared: Prepared, item: Any) -> List[Row]:
        return [_convergence_row(prepared.function, prepared.x0, prepared.extra["f_star"], int(item), config.estimate_error)]

    def finish(self, config: Any, prepared: Prepared, rows: List[Row]) -> None:
        ConvergenceDemo().finish(config, prepared, rows)


# Experiment registry, looked up by id
EXPERIMENTS: Dict[str, Experiment] = {
    e.name: e for e in (ConvergenceDemo(), DivergenceGrowth(), GammaInclusion(), ModulusClass())
}
