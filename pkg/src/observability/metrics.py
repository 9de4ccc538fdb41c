"""Prometheus Metrics - run observability.

Exports:
- Command counts by status
- Estimate counts by tracking method and flag
- Fit failures by model
- Training epochs
- Sweep point outcomes
- Stage durations
- Last efficiency per scheme

There is no metrics server; commands dump the registry into their
output directory with write_metrics_file().
"""

from __future__ import annotations

from pathlib import Path

from prometheus_client import REGISTRY, Counter, Gauge, Histogram, Info, write_to_textfile

# -----------------------------------------------------------------------------
# Counters
# -----------------------------------------------------------------------------

COMMANDS = Counter(
    "driftctl_commands_total",
    "CLI commands run",
    ["command", "status"],  # ok, config_error, input_error, numeric_error
)

ESTIMATES = Counter(
    "driftctl_estimates_total",
    "Tracker estimates produced",
    ["method", "flag"],  # odmr/lia x valid/held/out_of_capture
)

FIT_FAILURES = Counter(
    "driftctl_fit_failures_total",
    "Least-squares fits that failed or degenerated",
    ["model"],  # lorentzian, ramsey_decay, linewidth_law
)

TRAINING_EPOCHS = Counter(
    "driftctl_training_epochs_total",
    "Predictor training epochs completed",
)

SWEEP_POINTS = Counter(
    "driftctl_sweep_points_total",
    "Linewidth sweep points",
    ["status"],  # ok, failed
)

# -----------------------------------------------------------------------------
# Histograms
# -----------------------------------------------------------------------------

STAGE_SECONDS = Histogram(
    "driftctl_stage_seconds",
    "Wall time per pipeline stage",
    ["stage"],  # generate, track, loop, train, ramsey, sweep_point
    buckets=[0.01, 0.05, 0.1, 0.5, 1.0, 5.0, 10.0, 30.0, 60.0, 300.0],
)

# -----------------------------------------------------------------------------
# Gauges
# -----------------------------------------------------------------------------

LAST_EFFICIENCY = Gauge(
    "driftctl_last_efficiency",
    "Noise-reduction efficiency of the most recent loop",
    ["scheme"],
)

# -----------------------------------------------------------------------------
# Info
# -----------------------------------------------------------------------------

BUILD_INFO = Info(
    "driftctl_build",
    "Build information",
)


# -----------------------------------------------------------------------------
# Helper functions
# -----------------------------------------------------------------------------


def record_command(command: str, status: str = "ok") -> None:
    """Record a finished CLI command."""
    COMMANDS.labels(command=command, status=status).inc()


def record_estimates(method: str, flag: str, count: int = 1) -> None:
    """Record tracker estimates."""
    if count > 0:
        ESTIMATES.labels(method=method, flag=flag).inc(count)


def record_fit_failure(model: str) -> None:
    """Record a failed fit."""
    FIT_FAILURES.labels(model=model).inc()


def record_training_epoch() -> None:
    """Record one training epoch."""
    TRAINING_EPOCHS.inc()


def record_sweep_point(status: str = "ok") -> None:
    """Record a sweep point outcome."""
    SWEEP_POINTS.labels(status=status).inc()


def record_stage(stage: str, seconds: float) -> None:
    """Record stage wall time in seconds."""
    STAGE_SECONDS.labels(stage=stage).observe(seconds)


def update_efficiency(scheme: str, efficiency: float) -> None:
    """Update last efficiency gauge."""
    LAST_EFFICIENCY.labels(scheme=scheme).set(efficiency)


def set_build_info(version: str, numpy_version: str, scipy_version: str) -> None:
    """Set build information."""
    BUILD_INFO.info({
        "version": version,
        "numpy": numpy_version,
        "scipy": scipy_version,
    })


def write_metrics_file(path: Path) -> None:
    """Dump the default registry in text exposition format."""
    write_to_textfile(str(path), REGISTRY)
