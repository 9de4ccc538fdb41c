"""Tests for Application Settings.

Tests cover:
- Defaults
- DRIFTCTL_* environment overrides
- Validation ranges
- get_settings caching
"""

import pytest
from pydantic import ValidationError

from src.config.settings import Settings, get_settings


class TestSettingsDefaults:
    """Tests for default settings values."""

    def test_defaults(self, monkeypatch):
        """Defaults without environment variables."""
        for name in ("LOG_LEVEL", "LOG_JSON", "METRICS_ENABLED", "DEFAULT_PARALLEL", "OUTPUT_ROOT"):
            monkeypatch.delenv(f"DRIFTCTL_{name}", raising=False)
        settings = Settings(_env_file=None)
        assert settings.log_level == "INFO"
        assert settings.log_json is False
        assert settings.metrics_enabled is True
        assert settings.default_parallel == 1
        assert settings.output_root == "runs"

    def test_fixture_settings(self, test_settings):
        """Test fixture builds a quiet configuration."""
        assert test_settings.log_level == "WARNING"
        assert test_settings.metrics_enabled is False


class TestSettingsEnvironment:
    """Tests for environment overrides."""

    def test_env_prefix(self, monkeypatch):
        """DRIFTCTL_ variables are read."""
        monkeypatch.setenv("DRIFTCTL_LOG_LEVEL", "DEBUG")
        monkeypatch.setenv("DRIFTCTL_DEFAULT_PARALLEL", "4")
        settings = Settings(_env_file=None)
        assert settings.log_level == "DEBUG"
        assert settings.default_parallel == 4

    def test_case_insensitive(self, monkeypatch):
        """Variable names are case-insensitive."""
        monkeypatch.setenv("driftctl_output_root", "/tmp/runs")
        assert Settings(_env_file=None).output_root == "/tmp/runs"

    def test_unrelated_variables_ignored(self, monkeypatch):
        """Unknown keys do not fail validation."""
        monkeypatch.setenv("DRIFTCTL_UNKNOWN_KNOB", "1")
        Settings(_env_file=None)


class TestSettingsValidation:
    """Tests for settings validation."""

    def test_parallel_range(self):
        """default_parallel must be 1..64."""
        with pytest.raises(ValidationError):
            Settings(_env_file=None, default_parallel=0)
        with pytest.raises(ValidationError):
            Settings(_env_file=None, default_parallel=65)

    def test_log_level_choices(self):
        """Only standard levels are accepted."""
        with pytest.raises(ValidationError):
            Settings(_env_file=None, log_level="TRACE")


class TestGetSettings:
    """Tests for the cached accessor."""

    def test_cached(self):
        """Repeated calls return the same instance."""
        assert get_settings() is get_settings()

    def test_cache_clear_rereads_env(self, monkeypatch):
        """Clearing the cache picks up new environment."""
        get_settings.cache_clear()
        monkeypatch.setenv("DRIFTCTL_LOG_JSON", "true")
        assert get_settings().log_json is True
