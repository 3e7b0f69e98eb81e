"""Configuration management for chemokin."""

from __future__ import annotations

import logging
from functools import lru_cache
from pathlib import Path

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Process-wide settings loaded from the environment."""

    # Execution
    threads: int = Field(
        default=1, ge=1, description="Worker threads for agent blocks, kinetic slabs and sweeps"
    )
    seed: int = Field(default=20240101, ge=0, description="Master seed when a config omits one")

    # Outputs
    output_dir: str = Field(default="results", description="Directory for CSV/JSON outputs")
    strict: bool = Field(
        default=False, description="Exit non-zero when an acceptance check fails"
    )

    log_level: str = Field(default="INFO", description="Logging level")

    model_config = SettingsConfigDict(
        env_prefix="CHEMOKIN_", env_file=".env", env_file_encoding="utf-8", extra="ignore"
    )

    @property
    def output_path(self) -> Path:
        """Output directory as a Path."""
        return Path(self.output_dir)


@lru_cache
def get_settings() -> Settings:
    """Get cached settings instance."""
    return Settings()


def configure_logging(settings: Settings | None = None) -> None:
    """Configure application logging."""
    if settings is None:
        settings = get_settings()

    level = getattr(logging, settings.log_level.upper(), logging.INFO)
    logging.basicConfig(
        level=level,
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
    )
    # basicConfig is a no-op once the root logger has handlers
    logging.getLogger("chemokin").setLevel(level)
