"""Tests for Exception Hierarchy.

Tests cover:
- DriftCtlError base class
- Configuration exceptions (exit 2)
- Input exceptions (exit 3)
- Numeric exceptions (exit 4)
"""

import pytest

from src.exceptions import (
    ConfigurationError,
    CoverageError,
    DatasetSizeError,
    DegenerateFitError,
    DriftCtlError,
    FitError,
    InputError,
    InvalidConfigError,
    InvalidTraceError,
    MissingConfigError,
    ModelError,
    ModelFormatError,
    NumericError,
    NyquistError,
    OracleBindingError,
    ParameterError,
    PartialSweepError,
    TraceFormatError,
    TrainingError,
    UndefinedEfficiencyError,
)


class TestDriftCtlError:
    """Tests for DriftCtlError base class."""

    def test_basic_creation(self):
        """Create basic error with message."""
        error = DriftCtlError("Something went wrong")
        assert str(error) == "Something went wrong"
        assert error.message == "Something went wrong"
        assert error.details == {}
        assert error.recoverable is False

    def test_with_details(self):
        """Details appear in str()."""
        error = DriftCtlError("Operation failed", details={"stage": "track"})
        assert "stage" in str(error)

    def test_to_dict(self):
        """Serialize error to dictionary."""
        error = DriftCtlError("Test error", details={"key": "value"}, recoverable=True)
        assert error.to_dict() == {
            "type": "DriftCtlError",
            "message": "Test error",
            "details": {"key": "value"},
            "recoverable": True,
        }

    def test_is_exception(self):
        """DriftCtlError can be raised and caught."""
        with pytest.raises(DriftCtlError, match="boom"):
            raise DriftCtlError("boom")


class TestConfigurationErrors:
    """Tests for configuration exceptions."""

    def test_exit_code(self):
        """Every configuration error exits with 2."""
        for error in (
            MissingConfigError("seed"),
            InvalidConfigError("noise.dt_s", -1, "must be > 0"),
            ParameterError("tau", 0.0, "must be > 0"),
            NyquistError(1.0, 1.0),
            OracleBindingError(),
        ):
            assert isinstance(error, ConfigurationError)
            assert error.exit_code == 2

    def test_missing_config(self):
        """MissingConfigError names the key."""
        error = MissingConfigError("noise", "give a noise section")
        assert error.config_key == "noise"
        assert "give a noise section" in error.message

    def test_invalid_config_details(self):
        """InvalidConfigError records key, value and reason."""
        error = InvalidConfigError("noise.components.0.stationary_std", -5, "must be >= 0")
        assert error.details["config_key"] == "noise.components.0.stationary_std"
        assert error.details["value"] == "-5"

    def test_nyquist_reports_limit(self):
        """NyquistError carries the Nyquist frequency."""
        error = NyquistError(0.8, 1.0)
        assert error.details["nyquist_hz"] == 0.5
        assert error.parameter == "high_cutoff"


class TestInputErrors:
    """Tests for input exceptions."""

    def test_exit_code(self):
        """Every input error exits with 3."""
        for error in (
            TraceFormatError("t.csv", 4, "bad"),
            InvalidTraceError("empty"),
            CoverageError("simulate_ramsey", 10.0, 5.0),
            DatasetSizeError(10, 8, 4),
            ModelError("shape"),
            ModelFormatError("m.json", "bad json"),
        ):
            assert isinstance(error, InputError)
            assert error.exit_code == 3

    def test_trace_format_row(self):
        """TraceFormatError includes file and row."""
        error = TraceFormatError("trace.csv", 7, "non-numeric field")
        assert "trace.csv:7" in error.message
        assert error.row == 7

    def test_trace_format_without_row(self):
        """Row is optional."""
        error = TraceFormatError("trace.csv", None, "cannot open")
        assert error.message.startswith("Malformed trace trace.csv:")

    def test_model_format_is_model_error(self):
        """ModelFormatError subclasses ModelError."""
        assert isinstance(ModelFormatError("m.json", "x"), ModelError)


class TestNumericErrors:
    """Tests for numeric exceptions."""

    def test_exit_code(self):
        """Every numeric error exits with 4."""
        for error in (
            FitError("lorentzian", "no convergence"),
            DegenerateFitError("lorentzian", 1.0, 10.0),
            TrainingError(3, "nan loss"),
            UndefinedEfficiencyError(),
            PartialSweepError(1, 5),
        ):
            assert isinstance(error, NumericError)
            assert error.exit_code == 4

    def test_fit_error_is_recoverable(self):
        """Fit failures can be skipped by a sweep."""
        error = FitError("linewidth_law", "singular", last_params=[1.0, 2.0])
        assert error.recoverable is True
        assert error.last_params == [1.0, 2.0]

    def test_degenerate_fit_details(self):
        """DegenerateFitError records hwhm and bin width."""
        error = DegenerateFitError("lorentzian", 2.0, 50.0)
        assert isinstance(error, FitError)
        assert error.details["bin_hz"] == 50.0

    def test_training_error_carries_model(self):
        """TrainingError keeps the last finite model."""
        sentinel = object()
        error = TrainingError(12, "loss is nan", last_model=sentinel)
        assert error.epoch == 12
        assert error.last_model is sentinel

    def test_partial_sweep_counts(self):
        """PartialSweepError reports failed/total."""
        error = PartialSweepError(2, 6)
        assert error.message == "2 of 6 sweep points failed"
        assert error.details == {"failed": 2, "total": 6}
