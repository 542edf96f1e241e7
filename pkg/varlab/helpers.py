# varlab/helpers.py
import os
import logging
import re
from typing import List, Optional, Tuple

from varlab.engines.model import parse_grid_text
from varlab.engines.sequences import LambdaSeq, make_lambda
from varlab.exceptions import ValidationError
from varlab.functions import AnalyticFunction, get_function

logger = logging.getLogger(__name__)

_POWER_TOKEN = re.compile(r"^\s*(\d+)\s*\^\s*(\d+)\s*$")


def parse_source_string(text: str) -> AnalyticFunction:
    """
    A function source: `grid:<path>` (or an existing path) holding grid text,
    otherwise a registered closed form `name(key=value, ...)`.
    """
    text = text.strip()
    path = text[len("grid:"):] if text.startswith("grid:") else text
    if text.startswith("grid:") or (os.path.isfile(path) and "(" not in text):
        try:
            with open(path, "r", encoding="utf-8") as handle:
                return parse_grid_text(handle.read())
        except OSError as e:
            raise ValidationError(f"Cannot read grid file {path}: {e}") from e
    return get_function(text)


def parse_family_string(text: str, horizon: Optional[int] = None) -> LambdaSeq:
    """
    Weight sequence from `harmonic`, `constant[:c]`, `power_log:a,b` or `explicit:v1,v2,...`.
    """
    family, _, rest = text.strip().partition(":")
    family = family.strip()
    params = {}
    try:
        if family == "constant" and rest:
            params = {"c": float(rest)}
        elif family == "power_log":
            values = parse_float_list(rest)
            if len(values) not in (1, 2):
                raise ValidationError(f"power_log takes a,b; got {rest!r}.")
            params = {"a": values[0], "b": values[1] if len(values) == 2 else 0.0}
        elif family == "explicit":
            params = {"values": parse_float_list(rest)}
        elif rest:
            raise ValidationError(f"Family {family!r} takes no parameters, got {rest!r}.")
    except ValueError as e:
        raise ValidationError(f"Cannot parse family {text!r}: {e}") from e
    if horizon is None:
        return make_lambda(family, params)
    return make_lambda(family, params, horizon=horizon)


def _parse_int_token(token: str) -> int:
    match = _POWER_TOKEN.match(token)
    if match:
        return int(match.group(1)) ** int(match.group(2))
    return int(token)


def parse_int_list(text: str) -> List[int]:
    """
    Comma list of integers; `2^k` tokens allowed, and `lo..hi` expands to
    lo, 2 lo, 4 lo, ... up to hi.
    """
    values: List[int] = []
    try:
        for token in str(text).split(","):
            token = token.strip()
            if not token:
                continue
            if ".." in token:
                lo_text, hi_text = token.split("..", 1)
                lo, hi = _parse_int_token(lo_text), _parse_int_token(hi_text)
                if lo < 1 or hi < lo:
                    raise ValidationError(f"Bad doubling range {token!r}.")
                n = lo
                while n <= hi:
                    values.append(n)
                    n *= 2
            else:
                values.append(_parse_int_token(token))
    except ValueError as e:
        raise ValidationError(f"Cannot parse integer list {text!r}: {e}") from e
    return values


def parse_float_list(text: str) -> List[float]:
    try:
        return [float(token) for token in str(text).split(",") if token.strip()]
    except ValueError as e:
        raise ValidationError(f"Cannot parse number list {text!r}: {e}") from e


def parse_points(text: str, dim: int) -> List[Tuple[float, ...]]:
    """Points separated by `;`, coordinates by `,`."""
    points = []
    for chunk in str(text).split(";"):
        if not chunk.strip():
            continue
        coords = parse_float_list(chunk)
        if len(coords) != dim:
            raise ValidationError(f"Point {chunk.strip()!r} has {len(coords)} coordinates, expected {dim}.")
        points.append(tuple(coords))
    if not points:
        raise ValidationError("At least one evaluation point is required.")
    return points


def parse_alpha(text: str, dim: int) -> Tuple[int, ...]:
    """1-based axis list (`1,2`) to 0-based axes."""
    try:
        axes = tuple(_parse_int_token(t) - 1 for t in str(text).split(",") if t.strip())
    except ValueError as e:
        raise ValidationError(f"Cannot parse index set {text!r}: {e}") from e
    if not axes or any(not 0 <= a < dim for a in axes) or len(set(axes)) != len(axes):
        raise ValidationError(f"Index set {text!r} is not a set of distinct axes in 1..{dim}.")
    return axes


def cleanup_file(file_path: str) -> None:
    """Attempts to delete a file and logs errors."""
    try:
        if os.path.exists(file_path):
            os.remove(file_path)
            logger.info(f"Cleaned up partial output: {file_path}")
    except OSError as e:
        logger.error(f"Error deleting file {file_path}: {e}")
