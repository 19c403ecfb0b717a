"""
Runtime configuration for ratdyn
Defaults can be overridden through environment variables or a .env file
"""
import logging
import os

# Try to load environment variables from .env file
try:
    from dotenv import load_dotenv
    load_dotenv()
except ImportError:
    pass  # python-dotenv not installed, will use system environment variables

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'


def _env_int(name: str, default: int) -> int:
    raw = os.getenv(name)
    if raw is None or raw.strip() == "":
        return default
    try:
        value = int(raw)
    except ValueError:
        raise ValueError(f"{name} environment variable must be an integer, got {raw!r}")
    if value < 1:
        raise ValueError(f"{name} environment variable must be >= 1, got {value}")
    return value


def _env_float(name: str, default: float) -> float:
    raw = os.getenv(name)
    if raw is None or raw.strip() == "":
        return default
    try:
        value = float(raw)
    except ValueError:
        raise ValueError(f"{name} environment variable must be a number, got {raw!r}")
    if not value > 0:
        raise ValueError(f"{name} environment variable must be positive, got {value}")
    return value


# Worker pool cap for sweeps and certificate subcases
THREADS = _env_int("RATDYN_THREADS", os.cpu_count() or 1)

# Orbit classification
TOL = _env_float("RATDYN_TOL", 1e-9)
WINDOW = _env_int("RATDYN_WINDOW", 64)
BURN_IN = _env_int("RATDYN_BURN_IN", 1000)
STEP_CAP = _env_int("RATDYN_STEP_CAP", 1_000_000)

# Invariant interval refinement
REFINE_TOL = _env_float("RATDYN_REFINE_TOL", 1e-10)
REFINE_MAX_ITER = _env_int("RATDYN_REFINE_MAX_ITER", 10_000)

# Exact soundness samples per certificate
SAMPLES = _env_int("RATDYN_SAMPLES", 1000)

LOG_LEVEL = os.getenv("RATDYN_LOG_LEVEL", "INFO").upper()
if LOG_LEVEL not in ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"):
    raise ValueError(f"RATDYN_LOG_LEVEL environment variable has unknown level {LOG_LEVEL!r}")
