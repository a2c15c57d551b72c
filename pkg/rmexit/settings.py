import os
import logging
from functools import lru_cache
from typing import Optional

from dotenv import load_dotenv
from pydantic import BaseModel, Field, ValidationError

from .errors import ConfigError

logger = logging.getLogger(__name__)

_ENV_PREFIX = "RMEXIT_"


class Settings(BaseModel):
    max_hadamard_n: int = Field(default=24, ge=0, le=30)
    exact_max_n: int = Field(default=16, ge=1, le=24)
    enum_max_k: int = Field(default=24, ge=1, le=30)
    log_level: str = "INFO"
    workers: int = Field(default=1, ge=1)
    z: float = Field(default=1.96, gt=0)


def _read_env() -> dict:
    values = {}
    for name in Settings.model_fields:
        raw = os.getenv(_ENV_PREFIX + name.upper())
        if raw is not None and raw.strip():
            values[name] = raw.strip()
    return values


@lru_cache(maxsize=1)
def get_settings() -> Settings:
    load_dotenv()
    values = _read_env()
    try:
        settings = Settings(**values)
    except ValidationError as exc:
        raise ConfigError(f"Invalid RMEXIT_* environment settings: {exc}") from exc

    logger.debug("Loaded settings: %s", settings.model_dump())
    return settings


def safe_get_settings() -> Optional[Settings]:
    try:
        return get_settings()
    except ConfigError as exc:
        logger.error("Settings error: %s", exc)
    return None


def configure_logging(level: Optional[str] = None) -> None:
    settings = safe_get_settings() or Settings()
    logging.basicConfig(
        level=(level or settings.log_level).upper(),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
