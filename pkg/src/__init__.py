"""driftctl v1.0 - Drift-correction simulator for resonance tracking."""

__version__ = "1.0.0"

# Export exception hierarchy for easy importing
from src.exceptions import (
    DriftCtlError,
    ConfigurationError,
    MissingConfigError,
    InvalidConfigError,
    ParameterError,
    NyquistError,
    OracleBindingError,
    InputError,
    TraceFormatError,
    InvalidTraceError,
    CoverageError,
    DatasetSizeError,
    ModelError,
    ModelFormatError,
    NumericError,
    FitError,
    DegenerateFitError,
    TrainingError,
    UndefinedEfficiencyError,
    PartialSweepError,
)

__all__ = [
    "__version__",
    # Base
    "DriftCtlError",
    # Configuration
    "ConfigurationError",
    "MissingConfigError",
    "InvalidConfigError",
    "ParameterError",
    "NyquistError",
    "OracleBindingError",
    # Input
    "InputError",
    "TraceFormatError",
    "InvalidTraceError",
    "CoverageError",
    "DatasetSizeError",
    "ModelError",
    "ModelFormatError",
    # Numeric
    "NumericError",
    "FitError",
    "DegenerateFitError",
    "TrainingError",
    "UndefinedEfficiencyError",
    "PartialSweepError",
]
