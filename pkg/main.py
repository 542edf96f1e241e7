import argparse
import asyncio
import logging
import logging.handlers
import os
import sys
from typing import Dict, List, Optional, Sequence, Tuple

from varlab import __version__
from varlab.config import (
    DATABASE_FILE,
    LOG_BACKUP_COUNT,
    LOG_DIR,
    LOG_FILE,
    LOG_MAX_BYTES,
)
from varlab.context import RunContext
from varlab.database import RunLedger
from varlab.exceptions import ValidationError
from varlab.handlers import all_handlers
from varlab.handlers.utils import Subcommand, file_defaults, given_flags, parse_config_file
from varlab.utils.decorators import EXIT_RUNTIME, EXIT_VALIDATION

logger = logging.getLogger(__name__)


def setup_logging(level: int = logging.INFO) -> None:
    """Console plus rotating file handler on the root logger, once per process."""
    root_logger = logging.getLogger()
    if root_logger.handlers:
        return
    os.makedirs(LOG_DIR, exist_ok=True)
    log_formatter = logging.Formatter("%(asctime)s - %(name)s - %(levelname)s - %(message)s")
    console_handler = logging.StreamHandler()  # stderr; stdout carries CSV
    console_handler.setFormatter(log_formatter)
    console_handler.setLevel(level)
    file_handler = logging.handlers.RotatingFileHandler(
        LOG_FILE,
        maxBytes=LOG_MAX_BYTES,
        backupCount=LOG_BACKUP_COUNT,
        encoding='utf-8'
    )
    file_handler.setFormatter(log_formatter)
    file_handler.setLevel(logging.INFO)
    root_logger.setLevel(min(level, logging.INFO))
    root_logger.addHandler(console_handler)
    root_logger.addHandler(file_handler)
    logging.getLogger("aiosqlite").setLevel(logging.WARNING)


class VarlabArgumentParser(argparse.ArgumentParser):
    """Usage errors exit with the validation code."""

    def error(self, message: str) -> None:  # type: ignore[override]
        self.print_usage(sys.stderr)
        self.exit(EXIT_VALIDATION, f"{self.prog}: error: {message}\n")


def build_parser() -> Tuple[VarlabArgumentParser, Dict[str, Tuple[Subcommand, argparse.ArgumentParser]]]:
    parser = VarlabArgumentParser(
        prog="varlab",
        description="Generalized variation, Fourier partial sums and divergence experiments.",
    )
    parser.add_argument("--config", default=None, help="flat key=value file; command-line flags override it")
    parser.add_argument("--log-level", default="INFO", choices=("DEBUG", "INFO", "WARNING", "ERROR"), help="console log level")
    parser.add_argument("--version", action="version", version=f"varlab {__version__}")
    subparsers = parser.add_subparsers(dest="command", metavar="command")
    subparsers.required = True
    registry = {}
    for handler in all_handlers:
        sub = subparsers.add_parser(handler.name, help=handler.help, description=handler.help,
                                    formatter_class=argparse.ArgumentDefaultsHelpFormatter)
        handler.configure(sub)
        registry[handler.name] = (handler, sub)
    return parser, registry


def _config_path(argv: Sequence[str]) -> Optional[str]:
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config", default=None)
    known, _ = pre.parse_known_args(list(argv))
    return known.config


def _apply_file_values(registry: Dict[str, Tuple[Subcommand, argparse.ArgumentParser]],
                       file_values: Dict[str, str]) -> None:
    for _, sub in registry.values():
        defaults = file_defaults(sub, file_values)
        for action in sub._actions:
            if action.dest in defaults:
                action.required = False  # satisfied by the file
        sub.set_defaults(**defaults)


def parse_cli(argv: Sequence[str]) -> Tuple[Subcommand, argparse.Namespace, RunContext]:
    """
    Resolves the subcommand and its settings. Precedence: command-line flag,
    then --config file value, then the flag default.
    """
    argv = list(argv)
    parser, registry = build_parser()
    path = _config_path(argv)
    file_values = parse_config_file(path) if path else {}
    if file_values:
        _apply_file_values(registry, file_values)
    args = parser.parse_args(argv)
    handler, sub = registry[args.command]
    flags = given_flags(sub, argv)
    overrides = {dest: getattr(args, dest) for dest in sorted(flags) if hasattr(args, dest)}
    context = RunContext(settings=vars(args), file_values=file_values, overrides=overrides)
    return handler, args, context


async def _dispatch(handler: Subcommand, args: argparse.Namespace, context: RunContext, use_ledger: bool = True) -> int:
    ledger = RunLedger(DATABASE_FILE)
    if use_ledger:
        try:
            await ledger.connect()
            context.shared['ledger'] = ledger
        except Exception as e:
            logger.error(f"Run ledger unavailable at {DATABASE_FILE}: {e}")
    try:
        return await handler.callback(args, context)
    finally:
        try:
            await ledger.close()
        except Exception as e:
            logger.error(f"Error closing run ledger: {e}", exc_info=True)


def main(argv: Optional[List[str]] = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        handler, args, context = parse_cli(argv)
    except ValidationError as e:
        print(f"varlab: error: {e}", file=sys.stderr)
        return EXIT_VALIDATION
    setup_logging(getattr(logging, args.log_level))
    logger.info(f"varlab {__version__}: {args.command}")
    use_ledger = True
    try:
        RunLedger.sync_init_db(DATABASE_FILE)
    except Exception:
        logger.critical("Run ledger schema initialization failed; continuing without a ledger.")
        use_ledger = False
    try:
        return asyncio.run(_dispatch(handler, args, context, use_ledger))
    except Exception as e:
        logger.critical(f"{args.command} crashed: {e}", exc_info=True)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
