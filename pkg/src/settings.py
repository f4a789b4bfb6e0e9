"""
Configuration management using pydantic-settings.
"""

from functools import lru_cache

from dotenv import load_dotenv
from pydantic import Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

# Load environment variables from .env file
load_dotenv()


class Settings(BaseSettings):
    """Process-wide settings with environment variable support.

    Every field can be overridden with a ``VG_STEIN_`` prefixed variable,
    e.g. ``VG_STEIN_THREADS=8`` caps certification parallelism.
    """

    model_config = SettingsConfigDict(
        env_prefix="VG_STEIN_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
    )

    # Parallelism
    threads: int = Field(default=1, ge=1, description="Upper bound on worker processes")

    # Logging
    log_level: str = Field(default="INFO")

    # Quadrature defaults
    quad_epsrel: float = Field(default=1e-10, gt=0.0, lt=1e-3)
    quad_limit: int = Field(default=200, ge=10, description="Subdivision budget per panel")

    @field_validator("log_level")
    @classmethod
    def validate_log_level(cls, v: str) -> str:
        """Ensure the level is one the logging module knows."""
        level = v.strip().upper()
        if level not in {"DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"}:
            raise ValueError(f"Unknown log level: {v}")
        return level


@lru_cache(maxsize=1)
def get_settings() -> Settings:
    """Return the cached settings instance."""
    return Settings()
