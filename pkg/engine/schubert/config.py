import os
import logging
from typing import Optional

from dotenv import load_dotenv
from pydantic import BaseModel, Field

# Load environment variables
load_dotenv()

logger = logging.getLogger(__name__)


class Settings(BaseModel):
    """
    Process-wide defaults, read from the environment (or a .env file).
    Command-line flags take precedence over these values.
    """

    seed: Optional[int] = None
    threads: int = Field(default=1, ge=1)
    log_level: str = "INFO"
    incidence_tol: float = Field(default=1e-8, gt=0)
    rank_tol: float = Field(default=1e-7, gt=0)
    bezout_cap: int = Field(default=20000, ge=1)
    monodromy_loops: int = Field(default=50, ge=0)
    data_dir: str = "data"


def _env_int(name: str) -> Optional[int]:
    value = os.getenv(name)
    if value is None or value.strip() == "":
        return None
    try:
        return int(value)
    except ValueError:
        logger.warning(f"Ignoring {name}={value!r}: not an integer")
        return None


def _env_float(name: str) -> Optional[float]:
    value = os.getenv(name)
    if value is None or value.strip() == "":
        return None
    try:
        return float(value)
    except ValueError:
        logger.warning(f"Ignoring {name}={value!r}: not a number")
        return None


def load_settings() -> Settings:
    """Build Settings from SCHUBERT_* environment variables"""
    values = {
        "seed": _env_int("SCHUBERT_SEED"),
        "threads": _env_int("SCHUBERT_THREADS"),
        "log_level": os.getenv("SCHUBERT_LOG_LEVEL"),
        "incidence_tol": _env_float("SCHUBERT_INCIDENCE_TOL"),
        "rank_tol": _env_float("SCHUBERT_RANK_TOL"),
        "bezout_cap": _env_int("SCHUBERT_BEZOUT_CAP"),
        "monodromy_loops": _env_int("SCHUBERT_MONODROMY_LOOPS"),
        "data_dir": os.getenv("SCHUBERT_DATA_DIR"),
    }
    return Settings(**{key: value for key, value in values.items() if value is not None})
