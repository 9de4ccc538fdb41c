"""Pytest configuration and shared fixtures."""

import os
from collections.abc import Generator
from pathlib import Path

import numpy as np
import pytest

# Set test environment variables before importing settings
os.environ.update({
    "DRIFTCTL_LOG_LEVEL": "WARNING",
    "DRIFTCTL_LOG_JSON": "false",
    "DRIFTCTL_METRICS_ENABLED": "true",
    "DRIFTCTL_DEFAULT_PARALLEL": "1",
})


@pytest.fixture(autouse=True)
def _fresh_settings() -> Generator[None, None, None]:
    """Drop cached settings so env changes in a test take effect."""
    from src.config.settings import get_settings

    get_settings.cache_clear()
    yield
    get_settings.cache_clear()


@pytest.fixture
def test_settings():
    """Provide test settings instance."""
    from src.config.settings import Settings

    return Settings(
        _env_file=None,
        log_level="WARNING",
        log_json=False,
        metrics_enabled=False,
        default_parallel=1,
    )


@pytest.fixture
def ou_spec():
    """Slow OU drift, 500 Hz stationary std."""
    from src.noise.generators import NoiseSpec

    return NoiseSpec.from_dict({
        "components": [{"kind": "ou", "relaxation_rate": 0.01, "stationary_std": 500.0}],
        "seed": 7,
    })


@pytest.fixture
def ou_trace(ou_spec):
    """2000 s of OU drift at dt = 1 s."""
    from src.noise.generators import generate

    return generate(ou_spec, duration_s=2000.0, dt_s=1.0, label="ou")


@pytest.fixture
def ramp_trace():
    """Linear ramp, 1 Hz per second, 0..1000 s."""
    from src.noise.trace import NoiseTrace

    return NoiseTrace(dt_s=1.0, values=np.arange(1001, dtype=np.float64), label="ramp")


@pytest.fixture
def small_model():
    """Tiny LSTM trained for a few epochs on a sine."""
    from src.predictor.dataset import build_dataset
    from src.predictor.training import TrainConfig, train

    series = 100.0 * np.sin(2 * np.pi * np.arange(400) / 50.0)
    dataset = build_dataset(series, m=10, n=3, validation_fraction=0.2)
    model, _ = train(dataset, hidden=4, cfg=TrainConfig(epochs=5, batch_size=16, seed=1))
    return model


@pytest.fixture
def out_dir(tmp_path: Path) -> Path:
    """Fresh output directory."""
    return tmp_path / "out"
