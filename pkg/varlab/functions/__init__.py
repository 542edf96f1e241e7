import re
from typing import Any, Callable, Dict

from varlab.exceptions import UnknownFunctionError, ValidationError

from .base import AnalyticFunction, CallableFunction
from .jump_line import JumpLine
from .product import ProductFunction, StepFunction
from .ridge import RidgeSum
from .sinusoid import ConstantFunction, SineFunction
from .steps import Quadrant, SignProduct, SquareWave
from .trig_poly import TrigPolynomial
from .zigzag import Zigzag


def _counterexample(**params: Any) -> AnalyticFunction:
    # engines import this package, so the counterexample module is loaded on demand
    from varlab.engines.counterexample import CounterexampleFunction

    return CounterexampleFunction.from_params(**params)


# Closed-form registry, looked up by name
FUNCTIONS: Dict[str, Callable[..., AnalyticFunction]] = {
    "sine": SineFunction,
    "constant": ConstantFunction,
    "square_wave": SquareWave,
    "sign_product": SignProduct,
    "quadrant": Quadrant,
    "trig_poly": TrigPolynomial,
    "ridge_sum": RidgeSum,
    "jump_line": JumpLine,
    "zigzag": Zigzag,
    "counterexample": _counterexample,
}

_SPEC_PATTERN = re.compile(r"^\s*(\w+)\s*(?:\((.*)\))?\s*$")
_ARG_SPLIT = re.compile(r",(?=\s*\w+\s*=)")


def _coerce(raw: str) -> Any:
    text = raw.strip().strip("'\"")
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            continue
    return text


def parse_function_spec(spec: str) -> tuple[str, Dict[str, Any]]:
    """Splits `name(key=value, ...)` into the name and keyword arguments."""
    match = _SPEC_PATTERN.match(spec)
    if not match:
        raise ValidationError(f"Cannot parse function spec {spec!r}; expected name(key=value,...).")
    name, inner = match.group(1), match.group(2)
    params: Dict[str, Any] = {}
    if inner and inner.strip():
        for part in _ARG_SPLIT.split(inner):
            key, sep, value = part.partition("=")
            if not sep or not key.strip():
                raise ValidationError(f"Bad argument {part!r} in {spec!r}.")
            params[key.strip()] = _coerce(value)
    return name, params


def get_function(spec: str) -> AnalyticFunction:
    """Returns the registered closed form for `name(key=value, ...)`."""
    name, params = parse_function_spec(spec)
    factory = FUNCTIONS.get(name)
    if factory is None:
        raise UnknownFunctionError(f"Unknown function {name!r}; registered: {sorted(FUNCTIONS)}.")
    try:
        return factory(**params)
    except (TypeError, ValueError) as e:
        raise ValidationError(f"Bad parameters for {name}: {e}") from e


__all__ = [
    'AnalyticFunction',
    'CallableFunction',
    'ProductFunction',
    'StepFunction',
    'FUNCTIONS',
    'get_function',
    'parse_function_spec',
]
