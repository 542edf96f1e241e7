import argparse
import logging
import time
from typing import Any, Dict, List, Optional, Sequence

from varlab.config import GRID_SIZE, SEQUENCE_HORIZON
from varlab.context import RunContext
from varlab.engines.fourier import PATHS, PartialSumRequest, rectangular_partial_sum
from varlab.engines.model import UniformGrid
from varlab.engines.sequences import (
    Condition,
    LambdaSeq,
    check_var,
    classify_condition,
    construct_delta,
    construct_gamma,
    parse_condition,
)
from varlab.engines.variation import MODES, index_set_variation, modulus_of_variation
from varlab.exceptions import ValidationError
from varlab.functions import AnalyticFunction
from varlab.handlers.utils import Subcommand, emit_table
from varlab.helpers import parse_alpha, parse_family_string, parse_int_list, parse_points, parse_source_string
from varlab.presentation.tables import save_csv, two_column_rows
from varlab.services.experiments import COUNTEREXAMPLE_COLUMNS, counterexample_row
from varlab.utils.decorators import exit_on_error, timed

logger = logging.getLogger(__name__)

DUMP_COUNT = 1024
MODULUS_N_MAX = 64


def _grid(text: Optional[str], dim: int) -> Optional[UniformGrid]:
    if not text:
        return None
    sizes = parse_int_list(text)
    if len(sizes) == 1:
        sizes = sizes * dim
    if len(sizes) != dim:
        raise ValidationError(f"--grid gives {len(sizes)} sizes for a function of {dim} variables.")
    return UniformGrid(tuple(sizes))


def _families(text: str, count: int) -> List[LambdaSeq]:
    """One family for every axis, or `;`-separated families per axis."""
    parts = [p for p in text.split(";") if p.strip()]
    if len(parts) == 1:
        return [parse_family_string(parts[0])] * count
    if len(parts) != count:
        raise ValidationError(f"--lambda gives {len(parts)} families for {count} axes.")
    return [parse_family_string(p) for p in parts]


def _index_sets(dim: int) -> List[tuple]:
    sets = []
    for mask in range(1, 2 ** dim):
        sets.append(tuple(a for a in range(dim) if mask >> a & 1))
    return sorted(sets, key=lambda alpha: (len(alpha), alpha))


# --- variation ---

def _configure_variation(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--f", dest="function", required=True, help="function source: name(k=v,...) or grid:<path>")
    parser.add_argument("--lambda", dest="family", default="harmonic",
                        help="weight family (harmonic, constant[:c], power_log:a,b, explicit:...); ';' separates per-axis families")
    parser.add_argument("--mode", choices=MODES, default="bracket", help="bracket, exact, oracle or sample")
    parser.add_argument("--alpha", default=None, help="1-based axes, e.g. 1,2 (default: every nonempty index set)")
    parser.add_argument("--grid", default=None, help=f"grid points per axis, one value or one per axis (default {GRID_SIZE})")
    parser.add_argument("--out", default=None, help="CSV file (default stdout)")


@exit_on_error
@timed
async def variation_command(args: argparse.Namespace, context: RunContext) -> int:
    """Variation brackets of a source over one or all index sets."""
    f = parse_source_string(args.function)
    grid = _grid(args.grid, f.dim)
    families = _families(args.family, f.dim)
    sets = [parse_alpha(args.alpha, f.dim)] if args.alpha else _index_sets(f.dim)
    rows: List[Dict[str, Any]] = []
    for alpha in sets:
        start = time.perf_counter()
        bracket = index_set_variation(f, alpha, [families[a] for a in alpha], mode=args.mode, grid=grid)
        rows.append({
            "alpha": "+".join(str(a + 1) for a in alpha),
            "lower": bracket.lower,
            "upper": bracket.upper,
            "exact": bracket.exact,
            "method": "+".join(bracket.methods),
            "runtime_ms": (time.perf_counter() - start) * 1000.0,
        })
        logger.info(f"Variation of {f.name} over {alpha}: [{bracket.lower:.6g}, {bracket.upper:.6g}]")
    emit_table(["alpha", "lower", "upper", "exact", "method", "runtime_ms"], rows, args.out)
    return 0


# --- sequence ---

def _configure_sequence(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--family", required=True, help="weight family, e.g. power_log:1,-1")
    parser.add_argument("--check", default="lambda1", help="comma list of lambda, lambda1, lambda2, lambda3, var")
    parser.add_argument("--d", type=int, default=2, help="dimension")
    parser.add_argument("--delta", type=float, default=None, help="delta > 1 for lambda2")
    parser.add_argument("--construct", choices=("gamma", "delta"), default=None, help="build the Gamma or Delta sequence")
    parser.add_argument("--f", dest="function", default=None, help="source for modulus tables (var check, delta construction)")
    parser.add_argument("--grid", type=int, default=512, help="grid points per axis for modulus tables")
    parser.add_argument("--horizon", type=int, default=SEQUENCE_HORIZON, help="materialized length for constructions")
    parser.add_argument("--dump", default=None, help="two-column (n, value) CSV for the constructed sequence")
    parser.add_argument("--dump-count", type=int, default=DUMP_COUNT, help="rows in the dump")
    parser.add_argument("--out", default=None, help="CSV file (default stdout)")


def _modulus_tables(f: AnalyticFunction, grid_size: int) -> list:
    grid = UniformGrid.cube(f.dim, grid_size)
    n_max = min(MODULUS_N_MAX, grid_size - 1)
    return [modulus_of_variation(f, axis, n_max, grid) for axis in range(f.dim)]


def _check_rows(name: str, checks: Dict[str, bool], evidence: str) -> List[Dict[str, Any]]:
    return [{"condition": f"{name}:{check}", "verdict": "holds" if passed else "fails", "evidence": evidence}
            for check, passed in checks.items()]


@exit_on_error
@timed
async def sequence_command(args: argparse.Namespace, context: RunContext) -> int:
    """Condition verdicts for a weight family, optionally with the Gamma / Delta construction."""
    lam = parse_family_string(args.family)
    conditions = [parse_condition(c.strip()) for c in args.check.split(",") if c.strip()]
    f = parse_source_string(args.function) if args.function else None
    tables = _modulus_tables(f, args.grid) if f is not None else None

    rows: List[Dict[str, Any]] = []
    for condition in conditions:
        if condition is Condition.VAR:
            if tables is None:
                raise ValidationError("--check var needs --f to build modulus tables.")
            report = check_var(tables, f.dim, f.modulus_exponents)  # type: ignore[union-attr]
        else:
            report = classify_condition(lam, condition, args.d, args.delta)
        rows.append({"condition": report.condition.value, "verdict": report.verdict.value,
                     "evidence": report.evidence_text()})

    dumped: Optional[LambdaSeq] = None
    if args.construct == "gamma":
        construction = construct_gamma(lam, args.d, horizon=args.horizon)
        rows += _check_rows("gamma", construction.checks,
                            f"constant={construction.constant:.17g};weighted_sum={construction.weighted_sum:.17g}")
        dumped = construction.gamma
    elif args.construct == "delta":
        if tables is None:
            raise ValidationError("--construct delta needs --f to build modulus tables.")
        construction_d = construct_delta(tables, f.dim, args.horizon)  # type: ignore[union-attr]
        rows += _check_rows("delta", construction_d.checks,
                            f"degenerate={construction_d.degenerate};weighted_sum={construction_d.weighted_sum:.17g}")
        dumped = construction_d.delta

    emit_table(["condition", "verdict", "evidence"], rows, args.out)
    if args.construct and dumped is not None:
        path = args.dump or f"{args.construct}.csv"
        count = min(args.dump_count, dumped.horizon)
        save_csv(path, ["n", "value"], two_column_rows(dumped.values(count)))
        logger.info(f"Wrote {count} terms of {args.construct} to {path}")
    elif args.construct:
        logger.warning(f"{args.construct} construction produced no sequence; nothing dumped.")
    return 0


# --- fourier ---

def _configure_fourier(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--f", dest="function", required=True, help="function source")
    parser.add_argument("--N", dest="schedule", type=parse_int_list, default=[8, 16, 32], help="degrees, e.g. 8,16 or 8..256")
    parser.add_argument("--x", dest="points", default=None, help="points 'x1,x2;y1,y2' (default: the origin)")
    parser.add_argument("--path", choices=PATHS + ("both",), default="coeff", help="coeff, kernel or both")
    parser.add_argument("--resolution", type=int, default=None, help="quadrature panels / FFT size override")
    parser.add_argument("--estimate-error", action="store_true", help="add a second-rule error estimate")
    parser.add_argument("--out", default=None, help="CSV file (default stdout)")


@exit_on_error
@timed
async def fourier_command(args: argparse.Namespace, context: RunContext) -> int:
    """Square partial sums S_{N,...,N}(f; x) along a degree schedule."""
    f = parse_source_string(args.function)
    points = parse_points(args.points, f.dim) if args.points else [(0.0,) * f.dim]
    if not args.schedule:
        raise ValidationError("--N needs at least one degree.")
    paths: Sequence[str] = PATHS if args.path == "both" else (args.path,)
    rows: List[Dict[str, Any]] = []
    for N in args.schedule:
        for path in paths:
            request = PartialSumRequest.square(N, points, f.dim, path=path, resolution=args.resolution,
                                               estimate_error=args.estimate_error)
            result = rectangular_partial_sum(f, request)
            for x, value in zip(points, result.values):
                rows.append({"N": N, "x": x, "S": float(value), "path": path, "est_error": result.est_error})
    emit_table(["N", "x", "S", "path", "est_error"], rows, args.out)
    return 0


# --- counterexample ---

def _configure_counterexample(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--d", type=int, default=2, help="dimension")
    parser.add_argument("--delta", type=float, default=2.0, help="delta > 1")
    parser.add_argument("--N", dest="schedule", type=parse_int_list, default=[2 ** k for k in range(5, 10)],
                        help="degrees, e.g. 32,64 or 2^5..2^11")
    parser.add_argument("--lambda", dest="family", default="power_log:1,-1", help="weight family")
    parser.add_argument("--out", default=None, help="CSV file (default stdout)")


@exit_on_error
@timed
async def counterexample_command(args: argparse.Namespace, context: RunContext) -> int:
    """The f_N table along a degree schedule."""
    lam = parse_family_string(args.family)
    if not args.schedule:
        raise ValidationError("--N needs at least one degree.")
    rows = [counterexample_row(args.d, args.delta, N, lam) for N in args.schedule]
    emit_table(COUNTEREXAMPLE_COLUMNS, rows, args.out)
    return 0


variation_handler = Subcommand("variation", "variation brackets of a function", _configure_variation, variation_command)
sequence_handler = Subcommand("sequence", "weight-sequence conditions and constructions", _configure_sequence, sequence_command)
fourier_handler = Subcommand("fourier", "rectangular Fourier partial sums", _configure_fourier, fourier_command)
counterexample_handler = Subcommand("counterexample", "the f_N divergence table", _configure_counterexample, counterexample_command)
command_handlers = [variation_handler, sequence_handler, fourier_handler, counterexample_handler]
