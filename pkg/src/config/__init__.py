"""Run constants and process settings."""

from src.config.constants import DRIFT, DriftConstants
from src.config.settings import Settings, get_settings

__all__ = ["DRIFT", "DriftConstants", "Settings", "get_settings"]
