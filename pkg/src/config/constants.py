"""driftctl Constants - numerical defaults and scenario anchors.

Numerical tolerances used by the fitters and the trainer, plus the
scenario values the shipped configs are built around.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Final


@dataclass(frozen=True)
class DriftConstants:
    """Immutable simulator constants.

    Times in seconds, frequencies in Hz unless otherwise noted.
    """

    # Exit codes per failure class
    EXIT_OK: Final[int] = 0
    EXIT_CONFIG: Final[int] = 2
    EXIT_INPUT: Final[int] = 3
    EXIT_NUMERIC: Final[int] = 4

    # Trace grid
    DEFAULT_DT_S: Final[float] = 1.0
    DEFAULT_DURATION_S: Final[float] = 20000.0
    TRACE_JITTER_REL: Final[float] = 1e-6  # allowed relative jitter in time column
    GRID_SNAP_REL: Final[float] = 1e-9  # tolerance for "on the grid"

    # Tracking anchors
    ODMR_PERIOD_S: Final[float] = 300.0
    LIA_WINDOW_S: Final[float] = 20.0
    LIA_UPDATE_PERIOD_S: Final[float] = 1.0
    ODMR_LINEWIDTH_FRACTION: Final[float] = 0.2  # HWHM = fraction * sweep span

    # Scheme update speeds (Hz): ODMR feedback, LIA feedback, feedforward
    SCHEME_SPEEDS_HZ: Final[tuple[float, ...]] = (0.0033, 0.1, 0.2)

    # Levenberg-Marquardt
    LM_MAX_ITERATIONS: Final[int] = 200
    LM_XTOL: Final[float] = 1e-10
    LM_FTOL: Final[float] = 1e-12
    MIN_POINTS_PER_PARAM: Final[int] = 5
    # Two-line fits count as a doublet only when the lines are this far apart
    # (in units of hwhm1 + hwhm2) and the weaker one has this share of the stronger
    DOUBLET_MIN_SEPARATION: Final[float] = 1.0
    DOUBLET_MIN_AMPLITUDE_RATIO: Final[float] = 0.2
    DOUBLET_SPLIT_FACTOR: Final[float] = 3.0

    # Predictor
    STD_FLOOR_HZ: Final[float] = 1e-9
    ADAM_BETA1: Final[float] = 0.9
    ADAM_BETA2: Final[float] = 0.999
    ADAM_EPS: Final[float] = 1e-8
    FORGET_GATE_BIAS: Final[float] = 1.0
    INIT_SCALE: Final[float] = 1.0  # uniform(-s/sqrt(H), s/sqrt(H))
    EARLY_STOP_PATIENCE: Final[int] = 10
    GRAD_CHECK_STEP: Final[float] = 1e-5
    GRAD_CHECK_FLOOR: Final[float] = 1e-5  # denominator floor for relative error
    MODEL_FORMAT_VERSION: Final[int] = 1

    # Ramsey
    RAMSEY_BIAS_HZ: Final[float] = 1.0e6
    SHOT_WALL_TIME_S: Final[float] = 5e-3
    MAX_SWEEP_FRACTION: Final[float] = 0.5
    T2_DECAY_MIN_DROP: Final[float] = 0.2  # envelope must fall by 20% to trust T2*

    # Spectral defaults
    ZERO_PAD_FACTOR: Final[int] = 4
    WELCH_SEGMENTS: Final[int] = 8


# Singleton instance for import convenience
DRIFT = DriftConstants()
