"""driftctl Exception Hierarchy.

Provides structured exception classes for every failure the simulator
can report. Each top-level class maps to one CLI exit code.

Hierarchy:
    DriftCtlError (base)
    ├── ConfigurationError                  exit 2
    │   ├── MissingConfigError
    │   ├── InvalidConfigError
    │   ├── ParameterError
    │   │   └── NyquistError
    │   └── OracleBindingError
    ├── InputError                          exit 3
    │   ├── TraceFormatError
    │   ├── InvalidTraceError
    │   ├── CoverageError
    │   ├── DatasetSizeError
    │   └── ModelError
    │       └── ModelFormatError
    └── NumericError                        exit 4
        ├── FitError
        │   └── DegenerateFitError
        ├── TrainingError
        ├── UndefinedEfficiencyError
        └── PartialSweepError
"""

from __future__ import annotations

from typing import Any

from src.config.constants import DRIFT


class DriftCtlError(Exception):
    """Base exception for all driftctl errors.

    Attributes:
        message: Human-readable error description
        details: Additional context about the error
        recoverable: Whether the caller can continue past the error
    """

    exit_code: int = DRIFT.EXIT_NUMERIC

    def __init__(
        self,
        message: str,
        details: dict[str, Any] | None = None,
        recoverable: bool = False,
    ) -> None:
        super().__init__(message)
        self.message = message
        self.details = details or {}
        self.recoverable = recoverable

    def __str__(self) -> str:
        if self.details:
            return f"{self.message} ({self.details})"
        return self.message

    def to_dict(self) -> dict[str, Any]:
        """Convert exception to dictionary for logging/serialization."""
        return {
            "type": self.__class__.__name__,
            "message": self.message,
            "details": self.details,
            "recoverable": self.recoverable,
        }


# =============================================================================
# Configuration Errors
# =============================================================================


class ConfigurationError(DriftCtlError):
    """Base exception for configuration-related errors."""

    exit_code = DRIFT.EXIT_CONFIG


class MissingConfigError(ConfigurationError):
    """Raised when a required configuration is missing."""

    def __init__(self, config_key: str, description: str | None = None) -> None:
        message = f"Missing required configuration: {config_key}"
        if description:
            message += f" - {description}"
        super().__init__(
            message=message,
            details={"config_key": config_key},
            recoverable=False,
        )
        self.config_key = config_key


class InvalidConfigError(ConfigurationError):
    """Raised when a configuration value is invalid."""

    def __init__(
        self,
        config_key: str,
        value: Any,
        reason: str,
    ) -> None:
        super().__init__(
            message=f"Invalid configuration for {config_key}: {reason}",
            details={
                "config_key": config_key,
                "value": str(value),
                "reason": reason,
            },
            recoverable=False,
        )
        self.config_key = config_key


class ParameterError(ConfigurationError):
    """Raised when a model parameter is non-finite or out of range."""

    def __init__(self, parameter: str, value: Any, reason: str) -> None:
        super().__init__(
            message=f"Invalid parameter {parameter}={value}: {reason}",
            details={"parameter": parameter, "value": str(value), "reason": reason},
        )
        self.parameter = parameter


class NyquistError(ParameterError):
    """Raised when a requested frequency exceeds the sampling Nyquist limit."""

    def __init__(self, frequency_hz: float, dt_s: float, parameter: str = "high_cutoff") -> None:
        nyquist = 0.5 / dt_s
        super().__init__(
            parameter=parameter,
            value=frequency_hz,
            reason=f"exceeds Nyquist {nyquist:g} Hz for dt={dt_s:g} s",
        )
        self.details["nyquist_hz"] = nyquist


class OracleBindingError(ConfigurationError):
    """Raised when an oracle predictor is used without a bound trace."""

    def __init__(self, reason: str = "oracle predictor has no bound trace") -> None:
        super().__init__(message=f"Oracle predictor misconfigured: {reason}")


# =============================================================================
# Input Errors
# =============================================================================


class InputError(DriftCtlError):
    """Base exception for malformed or insufficient inputs."""

    exit_code = DRIFT.EXIT_INPUT


class TraceFormatError(InputError):
    """Raised when a trace file does not follow the CSV trace format."""

    def __init__(self, path: str, row: int | None, reason: str) -> None:
        where = f"{path}:{row}" if row is not None else path
        super().__init__(
            message=f"Malformed trace {where}: {reason}",
            details={"path": path, "row": row, "reason": reason},
        )
        self.path = path
        self.row = row


class InvalidTraceError(InputError):
    """Raised when an in-memory trace violates its invariants."""

    def __init__(self, reason: str) -> None:
        super().__init__(message=f"Invalid trace: {reason}")


class CoverageError(InputError):
    """Raised when a trace is too short for the requested operation."""

    def __init__(self, operation: str, required_s: float, available_s: float) -> None:
        super().__init__(
            message=(
                f"{operation} needs {required_s:g} s of trace, "
                f"only {available_s:g} s available"
            ),
            details={
                "operation": operation,
                "required_s": required_s,
                "available_s": available_s,
            },
        )


class DatasetSizeError(InputError):
    """Raised when a series is too short to build a window dataset."""

    def __init__(self, length: int, m: int, n: int) -> None:
        super().__init__(
            message=f"Series of length {length} is shorter than M+N={m + n}",
            details={"length": length, "m": m, "n": n},
        )


class ModelError(InputError):
    """Raised for predictor models with inconsistent shapes or kinds."""

    def __init__(self, reason: str, details: dict[str, Any] | None = None) -> None:
        super().__init__(message=f"Model error: {reason}", details=details)


class ModelFormatError(ModelError):
    """Raised when a persisted model document cannot be read."""

    def __init__(self, path: str, reason: str) -> None:
        super().__init__(reason, details={"path": path})


# =============================================================================
# Numeric Errors
# =============================================================================


class NumericError(DriftCtlError):
    """Base exception for numerical failures."""

    exit_code = DRIFT.EXIT_NUMERIC


class FitError(NumericError):
    """Raised when a least-squares fit does not converge."""

    def __init__(
        self,
        model: str,
        reason: str,
        last_params: list[float] | None = None,
    ) -> None:
        super().__init__(
            message=f"{model} fit failed: {reason}",
            details={"model": model, "reason": reason},
            recoverable=True,
        )
        self.model = model
        self.last_params = last_params


class DegenerateFitError(FitError):
    """Raised when a fitted linewidth collapses below the grid resolution."""

    def __init__(self, model: str, hwhm_hz: float, bin_hz: float) -> None:
        super().__init__(model, f"hwhm {hwhm_hz:g} Hz below one bin ({bin_hz:g} Hz)")
        self.details.update({"hwhm_hz": hwhm_hz, "bin_hz": bin_hz})


class TrainingError(NumericError):
    """Raised when training diverges.

    Carries the last model whose loss was finite.
    """

    def __init__(self, epoch: int, reason: str, last_model: Any = None) -> None:
        super().__init__(
            message=f"Training diverged at epoch {epoch}: {reason}",
            details={"epoch": epoch, "reason": reason},
        )
        self.epoch = epoch
        self.last_model = last_model


class UndefinedEfficiencyError(NumericError):
    """Raised when the reference trace has zero rms."""

    def __init__(self) -> None:
        super().__init__(message="Efficiency undefined: original trace has zero rms")


class PartialSweepError(NumericError):
    """Raised after a sweep in which some points failed."""

    def __init__(self, failed: int, total: int) -> None:
        super().__init__(
            message=f"{failed} of {total} sweep points failed",
            details={"failed": failed, "total": total},
            recoverable=True,
        )
        self.failed = failed
        self.total = total
