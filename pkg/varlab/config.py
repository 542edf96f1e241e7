import os
import logging
from dotenv import load_dotenv

load_dotenv() # Load environment variables from .env file
logger = logging.getLogger(__name__) # Use logger for warnings


def _int_from_env(name: str, default: int, minimum: int = 1) -> int:
    """Reads a positive integer from the environment, falling back to the default."""
    raw_value: str | None = os.getenv(name)
    if raw_value is None or not raw_value.strip():
        return default
    try:
        value = int(raw_value.strip())
    except ValueError:
        logger.warning(f"{name}={raw_value!r} is not an integer. Using default {default}.")
        return default
    if value < minimum:
        logger.warning(f"{name}={value} is below {minimum}. Using default {default}.")
        return default
    return value


# --- Parallelism ---
# Read at call time so a sweep honours the environment it is started in.
DEFAULT_THREADS: int = 1

def get_thread_count() -> int:
    """Worker cap for data-parallel sweeps (VARLAB_THREADS)."""
    return _int_from_env("VARLAB_THREADS", DEFAULT_THREADS)

# --- Output ---
OUTPUT_DIR: str = os.getenv("VARLAB_OUTPUT_DIR", "results")

# --- Run ledger ---
DATABASE_FILE: str = os.getenv("VARLAB_DATABASE_FILE", "varlab_runs.db")

# --- Logging ---
LOG_DIR: str = os.getenv("VARLAB_LOG_DIR", "logs")
LOG_FILE: str = os.path.join(LOG_DIR, "varlab.log")
LOG_MAX_BYTES: int = 10 * 1024 * 1024  # 10 MB
LOG_BACKUP_COUNT: int = 5

# --- Numerics ---
# Default evaluation grid (points per axis) for closed-form sources.
GRID_SIZE: int = _int_from_env("VARLAB_GRID_SIZE", 256, minimum=2)

# Largest 1-D instance accepted by the exhaustive oracle.
ORACLE_CAP: int = _int_from_env("VARLAB_ORACLE_CAP", 12, minimum=2)

# Gauss-Legendre nodes per panel.
GAUSS_ORDER: int = _int_from_env("VARLAB_GAUSS_ORDER", 8, minimum=2)

# star_value offset is 2*pi / (STAR_OFFSET_DIVISOR * max grid size).
STAR_OFFSET_DIVISOR: int = 64

# Exact multi-axis variation caps.
EXACT_MAX_AXIS_SIZE: int = 8
EXACT_MAX_AXES: int = 3
EXACT_WORK_BUDGET: int = 2_000_000

# Witness collections tried per line for lower bounds.
LOWER_BOUND_K_MAX: int = 64

# Default horizon for materialized weight sequences.
SEQUENCE_HORIZON: int = 1_000_000
