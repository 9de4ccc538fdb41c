"""Tests for run config loading and validation.

Tests cover:
- field_path and to_config_error mapping
- load_run_config error classes
- Section validators (noise/trace_path, sweep timing, speeds)
- CLI overrides and resolved defaults
- Sweep point construction
"""

import json

import pytest

from src.config.run_config import RunConfig, SweepPointConfig, load_run_config
from src.config.validation import field_path, parse_model
from src.control.policy import Scheme
from src.exceptions import InvalidConfigError, MissingConfigError, ParameterError
from src.noise.generators import NoiseSpec
from src.tracking.config import OdmrConfig, TrackerSection


def _write(tmp_path, doc) -> str:
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(doc) if not isinstance(doc, str) else doc)
    return str(path)


class TestFieldPath:
    """Tests for error paths."""

    def test_join(self):
        """Locations join with dots."""
        assert field_path(("noise", "components", 0, "dt_s")) == "noise.components.0.dt_s"

    def test_prefix(self):
        """Prefix is prepended."""
        assert field_path(("dt_s",), prefix="noise") == "noise.dt_s"


class TestLoadRunConfig:
    """Tests for load_run_config."""

    def test_minimal(self, tmp_path):
        """Only the seed is required."""
        cfg = load_run_config(_write(tmp_path, {"seed": 3}))
        assert cfg.seed == 3
        assert cfg.noise is None
        assert cfg.control.scheme == "feedback"

    def test_missing_file(self, tmp_path):
        """Absent file is a MissingConfigError."""
        with pytest.raises(MissingConfigError, match="not found"):
            load_run_config(tmp_path / "absent.json")

    def test_bad_json(self, tmp_path):
        """Malformed JSON names the line."""
        with pytest.raises(InvalidConfigError, match="invalid JSON at line"):
            load_run_config(_write(tmp_path, "{\n  'seed': 1"))

    def test_missing_seed(self, tmp_path):
        """Seed is required."""
        with pytest.raises(MissingConfigError, match="seed"):
            load_run_config(_write(tmp_path, {}))

    def test_unknown_key(self, tmp_path):
        """Typos fail loudly."""
        with pytest.raises(InvalidConfigError, match="sede"):
            load_run_config(_write(tmp_path, {"seed": 1, "sede": 2}))

    def test_nested_path_in_error(self, tmp_path):
        """The dotted path reaches into component lists."""
        doc = {
            "seed": 1,
            "noise": {"components": [{"kind": "ou", "relaxation_rate": 0.01, "stationary_std": -5}]},
        }
        with pytest.raises(InvalidConfigError) as info:
            load_run_config(_write(tmp_path, doc))
        key = info.value.config_key
        assert key.startswith("noise.components.0")
        assert key.endswith("stationary_std")
        assert info.value.exit_code == 2

    def test_nan_rejected(self, tmp_path):
        """Non-finite numbers are rejected."""
        with pytest.raises(InvalidConfigError, match="control.update_period_s"):
            load_run_config(_write(tmp_path, '{"seed": 1, "control": {"update_period_s": NaN}}'))

    def test_noise_and_trace_exclusive(self, tmp_path):
        """Give one trace source."""
        with pytest.raises(InvalidConfigError, match="either noise or trace_path"):
            load_run_config(_write(tmp_path, {"seed": 1, "noise": {}, "trace_path": "t.csv"}))

    def test_shipped_configs_load(self):
        """Every shipped config validates."""
        from pathlib import Path

        root = Path(__file__).resolve().parents[1] / "configs"
        files = sorted(root.glob("*.json"))
        assert len(files) >= 10
        for path in files:
            load_run_config(path)


class TestParameterErrors:
    """Tests for error_cls selection."""

    def test_noise_spec_uses_parameter_error(self):
        """NoiseSpec.from_dict raises ParameterError."""
        with pytest.raises(ParameterError, match="exponent"):
            NoiseSpec.from_dict({
                "components": [
                    {"kind": "power_law", "exponent": 4, "rms_amplitude": 1, "low_cutoff": 0.1, "high_cutoff": 0.2}
                ]
            })

    def test_parse_model_prefix(self):
        """Prefix shows in the config key."""
        with pytest.raises(InvalidConfigError) as info:
            parse_model(OdmrConfig, {"n_points": 1}, prefix="tracker.odmr")
        assert info.value.config_key == "tracker.odmr.n_points"


class TestOverrides:
    """Tests for CLI overrides."""

    def test_seed_override(self):
        """--seed replaces the config seed."""
        cfg = RunConfig(seed=1).with_overrides(seed=9)
        assert cfg.seed == 9

    def test_scheme_override_alias(self):
        """--scheme accepts the short forms."""
        cfg = RunConfig(seed=1).with_overrides(scheme="ideal")
        assert cfg.control.scheme == "ideal_feedback"
        assert cfg.sweep.scheme == "ideal_feedback"

    def test_bad_scheme(self):
        """Unknown scheme names are parameter errors."""
        with pytest.raises(ParameterError, match="scheme"):
            RunConfig(seed=1).with_overrides(scheme="magic")

    def test_no_overrides_returns_self(self):
        """Nothing to change, same object."""
        cfg = RunConfig(seed=1)
        assert cfg.with_overrides() is cfg

    def test_resolved_fills_defaults(self):
        """resolved() is JSON-ready with every section."""
        doc = RunConfig(seed=1).resolved()
        assert doc["ramsey"]["bias_hz"] == 1.0e6
        assert doc["tracker"]["method"] == "lia"


class TestSweepPoints:
    """Tests for sweep point construction."""

    def test_exactly_one_timing(self):
        """update_period_s xor speed_hz."""
        with pytest.raises(ValueError, match="exactly one"):
            SweepPointConfig(scheme="feedback")
        with pytest.raises(ValueError, match="exactly one"):
            SweepPointConfig(scheme="feedback", update_period_s=10, speed_hz=0.1)

    def test_build_points(self):
        """Explicit points first, then speeds."""
        cfg = RunConfig.model_validate({
            "seed": 1,
            "sweep": {
                "points": [{"scheme": "feedback", "speed_hz": 0.1, "tracker": "odmr", "label": "odmr"}],
                "speeds_hz": [0.01, 0.2],
                "scheme": "open_loop",
            },
        })
        points = cfg.sweep.build_points(TrackerSection())
        assert [p.label for p in points] == ["odmr", "open_loop@0.01Hz", "open_loop@0.2Hz"]
        assert points[0].scheme is Scheme.FEEDBACK
        assert points[0].update_period_s == pytest.approx(10.0)
        assert isinstance(points[0].tracker, OdmrConfig)
        assert points[1].tracker is None

    def test_speeds_positive(self):
        """Zero speeds are rejected."""
        with pytest.raises(ValueError, match="speeds_hz"):
            RunConfig.model_validate({"seed": 1, "sweep": {"speeds_hz": [0.1, 0.0]}})
