import os
import logging
from dataclasses import dataclass
from functools import lru_cache

from dotenv import load_dotenv

logger = logging.getLogger(__name__)

DELTA_STAR_CONVENTIONS = ("quadratic", "norm")


@dataclass(frozen=True)
class Settings:
    seed: int = 20240101
    log_level: str = "WARNING"
    quad_epsabs: float = 1e-12
    quad_epsrel: float = 1e-10
    quad_limit: int = 200
    block_size: int = 65536
    delta_star_convention: str = "quadratic"


def _env(name: str, default, cast):
    raw = os.environ.get(name)
    if raw is None or raw.strip() == "":
        return default
    try:
        return cast(raw.strip())
    except ValueError:
        logger.warning("Ignoring invalid %s=%r, using %r", name, raw, default)
        return default


@lru_cache(maxsize=1)
def get_settings() -> Settings:
    """Load settings from .env and the environment once per process"""
    load_dotenv()
    convention = _env("SKEWMEASURES_DELTA_STAR", Settings.delta_star_convention, str).lower()
    if convention not in DELTA_STAR_CONVENTIONS:
        logger.warning("Unknown delta-star convention %r, using 'quadratic'", convention)
        convention = "quadratic"
    return Settings(
        seed=_env("SKEWMEASURES_SEED", Settings.seed, int),
        log_level=_env("SKEWMEASURES_LOG_LEVEL", Settings.log_level, str).upper(),
        quad_epsabs=_env("SKEWMEASURES_QUAD_EPSABS", Settings.quad_epsabs, float),
        quad_epsrel=_env("SKEWMEASURES_QUAD_EPSREL", Settings.quad_epsrel, float),
        quad_limit=_env("SKEWMEASURES_QUAD_LIMIT", Settings.quad_limit, int),
        block_size=_env("SKEWMEASURES_BLOCK_SIZE", Settings.block_size, int),
        delta_star_convention=convention,
    )
