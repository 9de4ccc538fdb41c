"""Application Settings - Environment-based configuration.

Uses Pydantic Settings for validation and type coercion. These are
process-level knobs (logging, metrics, parallelism); everything that
changes simulation results lives in the RunConfig document instead.
"""

from __future__ import annotations

from functools import lru_cache
from typing import Literal

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Application settings loaded from DRIFTCTL_* environment variables."""

    model_config = SettingsConfigDict(
        env_prefix="DRIFTCTL_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
    )

    log_level: Literal["DEBUG", "INFO", "WARNING", "ERROR"] = Field(
        default="INFO", description="Logging level"
    )
    log_json: bool = Field(default=False, description="Emit JSON log lines")

    metrics_enabled: bool = Field(
        default=True, description="Write metrics.prom into each output directory"
    )

    default_parallel: int = Field(
        default=1, ge=1, le=64, description="Worker threads when --parallel is not given"
    )
    output_root: str = Field(
        default="runs", description="Parent directory for outputs when --out is not given"
    )


@lru_cache
def get_settings() -> Settings:
    """Get cached settings instance."""
    return Settings()
