import argparse
import logging
import sys
from dataclasses import dataclass
from typing import Any, Awaitable, Callable, Dict, Iterable, Mapping, Optional, Sequence

from varlab.context import RunContext
from varlab.exceptions import ValidationError
from varlab.presentation.tables import save_csv, write_csv

logger = logging.getLogger(__name__)

SubcommandCallback = Callable[[argparse.Namespace, RunContext], Awaitable[int]]

_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


@dataclass(frozen=True)
class Subcommand:
    """One CLI subcommand: its flags and the async callback that runs it."""

    name: str
    help: str
    configure: Callable[[argparse.ArgumentParser], None]
    callback: SubcommandCallback


def parse_config_file(path: str) -> Dict[str, str]:
    """
    Flat `key = value` file. Blank lines, `#` comments and `[section]`
    headers are skipped, so a run manifest can be fed back in.
    """
    values: Dict[str, str] = {}
    try:
        with open(path, "r", encoding="utf-8") as handle:
            lines = handle.readlines()
    except OSError as e:
        raise ValidationError(f"Cannot read config file {path}: {e}") from e
    for number, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#") or (line.startswith("[") and line.endswith("]")):
            continue
        key, sep, value = line.partition("=")
        if not sep or not key.strip():
            raise ValidationError(f"{path}:{number}: expected key=value, got {line!r}.")
        values[key.strip().replace("-", "_")] = value.strip()
    logger.debug(f"Read {len(values)} values from {path}")
    return values


def parse_bool(text: str) -> bool:
    lowered = str(text).strip().lower()
    if lowered in _TRUE:
        return True
    if lowered in _FALSE:
        return False
    raise ValidationError(f"Expected a boolean, got {text!r}.")


def option_aliases(parser: argparse.ArgumentParser) -> Dict[str, argparse.Action]:
    """Maps dest names, positionals included, and bare flag names (`f`, `lambda`, `N`) to their actions."""
    aliases: Dict[str, argparse.Action] = {}
    for action in parser._actions:
        if action.dest in ("help", argparse.SUPPRESS):
            continue
        aliases[action.dest] = action
        for option in action.option_strings:
            aliases[option.lstrip("-").replace("-", "_")] = action
    return aliases


def file_defaults(parser: argparse.ArgumentParser, file_values: Mapping[str, str]) -> Dict[str, Any]:
    """
    Converts config-file strings with each flag's own type. Keys the
    subcommand does not know are ignored with a debug message.
    """
    aliases = option_aliases(parser)
    defaults: Dict[str, Any] = {}
    for key, text in file_values.items():
        action = aliases.get(key)
        if action is None:
            logger.debug(f"Config key {key!r} is not a flag of this subcommand; ignored.")
            continue
        try:
            if isinstance(action, (argparse._StoreTrueAction, argparse._StoreFalseAction)):
                value: Any = parse_bool(text)
            elif action.type is not None:
                value = action.type(text)  # type: ignore[misc]
            else:
                value = text
        except (TypeError, ValueError) as e:
            raise ValidationError(f"Config value {key}={text!r}: {e}") from e
        if action.choices is not None and value not in action.choices:
            raise ValidationError(f"Config value {key}={text!r} not in {list(action.choices)}.")
        defaults[action.dest] = value
    return defaults


def given_flags(parser: argparse.ArgumentParser, argv: Sequence[str]) -> set:
    """Dest names of the flags that appear literally in argv."""
    aliases = option_aliases(parser)
    dests = set()
    for token in argv:
        if not token.startswith("-") or token == "-":
            continue
        name = token.split("=", 1)[0]
        if name.startswith("--"):
            action = aliases.get(name[2:].replace("-", "_"))
        else:
            action = aliases.get(name[1:])
        if action is not None:
            dests.add(action.dest)
    return dests


def emit_table(columns: Sequence[str], rows: Iterable[Mapping[str, Any]], out: Optional[str] = None) -> int:
    """CSV to the --out file when given, stdout otherwise."""
    if out:
        count = save_csv(out, columns, rows)
        logger.info(f"Wrote {count} rows to {out}")
        return count
    return write_csv(sys.stdout, columns, rows)
