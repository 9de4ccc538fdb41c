"""Tests for Structured Logging.

Tests cover:
- configure_logging with JSON and console formats
- stderr looked up when loggers are created, not at configure time
- get_logger function
- bind_run and unbind_run
- RunLogger, TrackingLogger, ControlLogger events
- TrainingLogger, FitLogger, SweepLogger events
- init_logging function
"""

import io
import json
import sys

import pytest
import structlog

from src.observability.logging import (
    ControlLogger,
    FitLogger,
    RunLogger,
    SweepLogger,
    TrackingLogger,
    TrainingLogger,
    bind_run,
    configure_logging,
    get_logger,
    init_logging,
    unbind_run,
)


def _json_lines(text: str) -> list[dict]:
    return [json.loads(line) for line in text.splitlines() if line.startswith("{")]


class TestConfigureLogging:
    """Tests for configure_logging function."""

    def test_configure_json_format(self, capsys):
        """JSON lines go to stderr."""
        configure_logging(level="INFO", json_format=True)
        get_logger("test").info("hello", answer=42)
        lines = _json_lines(capsys.readouterr().err)
        assert lines[-1]["event"] == "hello"
        assert lines[-1]["answer"] == 42
        assert lines[-1]["level"] == "info"

    def test_configure_console_format(self):
        """Configure logging with console format."""
        configure_logging(level="DEBUG", json_format=False)

    def test_level_filters(self, capsys):
        """Events below the level are dropped."""
        configure_logging(level="WARNING", json_format=True)
        get_logger("test").info("dropped")
        assert "dropped" not in capsys.readouterr().err

    def test_stdout_untouched(self, capsys):
        """Logs never reach stdout."""
        configure_logging(level="DEBUG", json_format=True)
        get_logger("test").warning("only_stderr")
        assert capsys.readouterr().out == ""

    def test_stderr_resolved_after_configure(self, monkeypatch):
        """A stderr swapped in after configure_logging still receives the lines."""
        configure_logging(level="INFO", json_format=True)
        sink = io.StringIO()
        monkeypatch.setattr(sys, "stderr", sink)
        get_logger("test").info("late_stream")
        assert _json_lines(sink.getvalue())[-1]["event"] == "late_stream"


class TestGetLogger:
    """Tests for get_logger function."""

    def test_get_logger_with_name(self):
        """Get logger with specific name."""
        assert get_logger("test_module") is not None

    def test_get_logger_returns_bound_logger(self):
        """get_logger returns something with bind()."""
        assert hasattr(get_logger("test"), "bind")


class TestBindRun:
    """Tests for bind_run and unbind_run."""

    def test_bound_fields_in_output(self, capsys):
        """run_id and command appear on every line."""
        configure_logging(level="INFO", json_format=True)
        bind_run("abc123", "track")
        try:
            get_logger("x").info("inside")
        finally:
            unbind_run()
        line = _json_lines(capsys.readouterr().err)[-1]
        assert line["run_id"] == "abc123"
        assert line["command"] == "track"

    def test_unbind_removes_fields(self, capsys):
        """After unbind_run the context is clean."""
        configure_logging(level="INFO", json_format=True)
        bind_run("abc123", "track")
        unbind_run()
        get_logger("x").info("outside")
        line = _json_lines(capsys.readouterr().err)[-1]
        assert "run_id" not in line
        assert structlog.contextvars.get_contextvars() == {}


class TestEventLoggers:
    """Tests for event logger classes."""

    @pytest.fixture(autouse=True)
    def json_logs(self):
        configure_logging(level="DEBUG", json_format=True)

    def test_run_logger_events(self, capsys):
        """Command lifecycle events carry event_type."""
        log = RunLogger("loop")
        log.command_started({"seed": 1})
        log.artifact_written("out/a.csv", "0" * 64)
        log.command_finished(1.5, outputs=3)
        log.command_failed({"type": "FitError", "message": "x"}, exit_code=4)
        types = [line["event_type"] for line in _json_lines(capsys.readouterr().err)]
        assert types == ["run.started", "run.artifact", "run.finished", "run.failed"]

    def test_tracking_logger(self, capsys):
        """Tracking events are bound to the method."""
        log = TrackingLogger("odmr")
        log.estimate_held(300.0, "held", "fit failed")
        log.tracking_completed(estimates=10, held=1, out_of_capture=0)
        lines = _json_lines(capsys.readouterr().err)
        assert all(line["method"] == "odmr" for line in lines)
        assert lines[-1]["event_type"] == "tracking.completed"

    def test_control_logger(self, capsys):
        """Predictor failures are warnings."""
        log = ControlLogger("feedforward")
        log.predictor_failed(12.0, "non-finite prediction")
        log.loop_completed(5.0, updates=100, warmup_s=60.0, residual_rms_hz=12.5)
        lines = _json_lines(capsys.readouterr().err)
        assert lines[0]["level"] == "warning"
        assert lines[1]["updates"] == 100

    def test_training_logger(self, capsys):
        """Training events include the architecture."""
        log = TrainingLogger(hidden=16, m=60, n=20)
        log.epoch_completed(1, 0.5, 0.6)
        log.early_stopped(20, best_epoch=10, best_val_loss=0.1)
        log.training_diverged(21, "nan loss")
        lines = _json_lines(capsys.readouterr().err)
        assert [line["event_type"] for line in lines] == [
            "training.epoch",
            "training.early_stopped",
            "training.diverged",
        ]
        assert lines[0]["hidden"] == 16

    def test_fit_logger(self, capsys):
        """Fit failures name the model."""
        log = FitLogger("lorentzian")
        log.fit_failed("max iterations", nfev=200)
        log.fit_degenerate(1.0, 40.0)
        lines = _json_lines(capsys.readouterr().err)
        assert {line["model"] for line in lines} == {"lorentzian"}

    def test_sweep_logger(self, capsys):
        """Failed points carry the serialized error."""
        log = SweepLogger(points=3)
        log.point_completed("a", 0.1, 30e3, 10e-6)
        log.point_failed("b", 0.2, {"type": "FitError", "message": "boom"})
        log.split_calibrated("lia_feedforward", 30e3, 90e3)
        lines = _json_lines(capsys.readouterr().err)
        assert lines[1]["type"] == "FitError"
        assert lines[1]["points"] == 3
        assert lines[2]["event_type"] == "sweep.split_calibrated"
        assert lines[2]["split_hz"] == 90e3


class TestInitLogging:
    """Tests for init_logging function."""

    def test_init_logging_default(self):
        """Initialize logging with defaults."""
        init_logging()

    def test_init_logging_console(self):
        """Initialize logging with console format."""
        init_logging(json_format=False, level="DEBUG")
