"""Structured Logging - JSON logs with run correlation.

Provides structured logging for:
- Command lifecycle (start, finish, failure, artifacts)
- Tracking (held and out-of-capture estimates)
- Control loops and predictor failures
- Training progress and divergence
- Fit failures and sweep points

Every line emitted inside a CLI command carries run_id and command.
Logs go to stderr; stdout is reserved for command summaries.
"""

from __future__ import annotations

import logging
import sys
from typing import Any

import structlog


def _stderr_logger(*args: Any) -> structlog.PrintLogger:
    """PrintLogger on whatever sys.stderr is when the logger is created."""
    return structlog.PrintLogger(file=sys.stderr)


def configure_logging(
    level: str = "INFO",
    json_format: bool = True,
) -> None:
    """Configure structured logging.

    Args:
        level: Log level (DEBUG, INFO, WARNING, ERROR)
        json_format: If True, output JSON; else human-readable
    """
    processors: list[Any] = [
        structlog.contextvars.merge_contextvars,
        structlog.processors.add_log_level,
        structlog.processors.TimeStamper(fmt="iso"),
        structlog.processors.StackInfoRenderer(),
        structlog.processors.UnicodeDecoder(),
    ]

    if json_format:
        processors.append(structlog.processors.JSONRenderer())
    else:
        processors.append(structlog.dev.ConsoleRenderer(colors=False))

    structlog.configure(
        processors=processors,
        wrapper_class=structlog.make_filtering_bound_logger(
            getattr(logging, level.upper())
        ),
        context_class=dict,
        logger_factory=_stderr_logger,
        cache_logger_on_first_use=False,
    )

    logging.basicConfig(
        format="%(message)s",
        stream=sys.stderr,
        level=getattr(logging, level.upper()),
    )


def get_logger(name: str | None = None) -> Any:
    """Get a structured logger.

    Args:
        name: Logger name (usually __name__)

    Returns:
        Bound structlog logger
    """
    return structlog.get_logger(name)


def bind_run(run_id: str, command: str) -> None:
    """Bind run identity to all logs in the current context.

    Args:
        run_id: Run identifier (config hash prefix)
        command: CLI subcommand name
    """
    structlog.contextvars.bind_contextvars(run_id=run_id, command=command)


def unbind_run() -> None:
    """Remove run identity from log context."""
    structlog.contextvars.unbind_contextvars("run_id", "command")


# -----------------------------------------------------------------------------
# Event-specific logging functions
# -----------------------------------------------------------------------------


class RunLogger:
    """Logger for command lifecycle events."""

    def __init__(self, command: str) -> None:
        self._command = command
        self._log = get_logger("run").bind(component="cli")

    def command_started(self, metadata: dict[str, Any] | None = None) -> None:
        """Log command start."""
        self._log.info(
            "command_started",
            event_type="run.started",
            **(metadata or {}),
        )

    def command_finished(self, elapsed_s: float, outputs: int) -> None:
        """Log command completion."""
        self._log.info(
            "command_finished",
            event_type="run.finished",
            elapsed_s=elapsed_s,
            outputs=outputs,
        )

    def command_failed(self, error: dict[str, Any], exit_code: int) -> None:
        """Log command failure with the serialized error."""
        self._log.error(
            "command_failed",
            event_type="run.failed",
            exit_code=exit_code,
            **error,
        )

    def artifact_written(self, path: str, sha256: str) -> None:
        """Log an output file."""
        self._log.debug(
            "artifact_written",
            event_type="run.artifact",
            path=path,
            sha256=sha256,
        )


class TrackingLogger:
    """Logger for frequency-tracking events."""

    def __init__(self, method: str) -> None:
        self._log = get_logger("tracking").bind(method=method)

    def estimate_held(self, t_avail_s: float, flag: str, reason: str) -> None:
        """Log an estimate replaced by the last valid one."""
        self._log.debug(
            "estimate_held",
            event_type="tracking.estimate_held",
            t_avail_s=t_avail_s,
            flag=flag,
            reason=reason,
        )

    def tracking_completed(self, estimates: int, held: int, out_of_capture: int) -> None:
        """Log tracker summary."""
        self._log.info(
            "tracking_completed",
            event_type="tracking.completed",
            estimates=estimates,
            held=held,
            out_of_capture=out_of_capture,
        )


class ControlLogger:
    """Logger for control-loop events."""

    def __init__(self, scheme: str) -> None:
        self._log = get_logger("control").bind(scheme=scheme)

    def predictor_failed(self, t_s: float, error: str) -> None:
        """Log a predictor failure; the previous correction is held."""
        self._log.warning(
            "predictor_failed",
            event_type="control.predictor_failed",
            t_s=t_s,
            error=error,
        )

    def loop_completed(
        self,
        update_period_s: float,
        updates: int,
        warmup_s: float,
        residual_rms_hz: float,
    ) -> None:
        """Log control-loop summary."""
        self._log.info(
            "loop_completed",
            event_type="control.completed",
            update_period_s=update_period_s,
            updates=updates,
            warmup_s=warmup_s,
            residual_rms_hz=residual_rms_hz,
        )


class TrainingLogger:
    """Logger for predictor training."""

    def __init__(self, hidden: int, m: int, n: int) -> None:
        self._log = get_logger("training").bind(hidden=hidden, m=m, n=n)

    def epoch_completed(self, epoch: int, train_loss: float, val_loss: float) -> None:
        """Log one epoch."""
        self._log.debug(
            "epoch_completed",
            event_type="training.epoch",
            epoch=epoch,
            train_loss=train_loss,
            val_loss=val_loss,
        )

    def early_stopped(self, epoch: int, best_epoch: int, best_val_loss: float) -> None:
        """Log early stop on validation plateau."""
        self._log.info(
            "early_stopped",
            event_type="training.early_stopped",
            epoch=epoch,
            best_epoch=best_epoch,
            best_val_loss=best_val_loss,
        )

    def training_diverged(self, epoch: int, reason: str) -> None:
        """Log non-finite loss."""
        self._log.error(
            "training_diverged",
            event_type="training.diverged",
            epoch=epoch,
            reason=reason,
        )


class FitLogger:
    """Logger for least-squares fits."""

    def __init__(self, model: str) -> None:
        self._log = get_logger("fit").bind(model=model)

    def fit_failed(self, reason: str, nfev: int) -> None:
        """Log non-convergence."""
        self._log.warning(
            "fit_failed",
            event_type="fit.failed",
            reason=reason,
            nfev=nfev,
        )

    def fit_degenerate(self, hwhm_hz: float, bin_hz: float) -> None:
        """Log a linewidth collapse."""
        self._log.warning(
            "fit_degenerate",
            event_type="fit.degenerate",
            hwhm_hz=hwhm_hz,
            bin_hz=bin_hz,
        )


class SweepLogger:
    """Logger for linewidth sweep points."""

    def __init__(self, points: int) -> None:
        self._log = get_logger("sweep").bind(points=points)

    def point_completed(self, label: str, nu_hz: float, l_hz: float, t2_star_s: float) -> None:
        """Log a finished sweep point."""
        self._log.info(
            "point_completed",
            event_type="sweep.point_completed",
            label=label,
            nu_hz=nu_hz,
            l_hz=l_hz,
            t2_star_s=t2_star_s,
        )

    def point_failed(self, label: str, nu_hz: float, error: dict[str, Any]) -> None:
        """Log a failed sweep point; the row is kept with a failure flag."""
        self._log.error(
            "point_failed",
            event_type="sweep.point_failed",
            label=label,
            nu_hz=nu_hz,
            **error,
        )

    def split_calibrated(self, reference: str, l_hz: float, split_hz: float) -> None:
        """Log the doublet split derived from a reference linewidth."""
        self._log.info(
            "split_calibrated",
            event_type="sweep.split_calibrated",
            reference=reference,
            l_hz=l_hz,
            split_hz=split_hz,
        )


def init_logging(json_format: bool = True, level: str = "INFO") -> None:
    """Initialize logging with defaults.

    Call this once at process startup.
    """
    configure_logging(level=level, json_format=json_format)
