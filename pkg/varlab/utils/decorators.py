import logging
import sys
import time
from functools import wraps
from typing import Any, Awaitable, Callable

from varlab.exceptions import (
    ExactModeRefusedError,
    OracleRefusedError,
    PreconditionError,
    ServiceError,
    ValidationError,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_RUNTIME = 2

AsyncHandler = Callable[..., Awaitable[int]]


def exit_on_error(func: AsyncHandler) -> AsyncHandler:
    """
    Maps a subcommand's exceptions to exit codes: 1 for invalid input,
    2 for anything that failed while running.
    """
    @wraps(func)
    async def wrapped(*args: Any, **kwargs: Any) -> int:
        try:
            code = await func(*args, **kwargs)
            return EXIT_OK if code is None else code
        except ValidationError as e:
            logger.error(f"{func.__name__}: invalid input: {e}")
            print(f"error: {e}", file=sys.stderr)
            return EXIT_VALIDATION
        except (PreconditionError, OracleRefusedError, ExactModeRefusedError, ServiceError) as e:
            logger.error(f"{func.__name__}: {type(e).__name__}: {e}")
            print(f"error: {e}", file=sys.stderr)
            return EXIT_RUNTIME
        except Exception as e:
            logger.exception(f"Unexpected error in {func.__name__}")
            print(f"error: unexpected {type(e).__name__}: {e}", file=sys.stderr)
            return EXIT_RUNTIME

    return wrapped


def timed(func: AsyncHandler) -> AsyncHandler:
    """Logs the wall time of a subcommand."""
    @wraps(func)
    async def wrapped(*args: Any, **kwargs: Any) -> int:
        start = time.perf_counter()
        try:
            return await func(*args, **kwargs)
        finally:
            logger.info(f"{func.__name__} finished in {time.perf_counter() - start:.3f}s")

    return wrapped
