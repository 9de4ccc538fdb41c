"""Noise-reduction efficiency.

eta = 1 - rms(residual) / rms(original), with rms taken about zero so
that removing a DC offset counts as correction.
"""

from __future__ import annotations

import numpy as np

from src.exceptions import InvalidTraceError, UndefinedEfficiencyError
from src.noise.trace import NoiseTrace


def efficiency(original: NoiseTrace, residual: NoiseTrace, start_index: int = 0) -> float:
    """Efficiency over samples start_index.. of two traces on the same grid.

    Raises:
        InvalidTraceError: length or dt differ, or nothing left after start_index
        UndefinedEfficiencyError: original rms is zero
    """
    if len(original) != len(residual) or original.dt_s != residual.dt_s:
        raise InvalidTraceError("efficiency needs traces of equal length and dt")
    if not 0 <= start_index < len(original):
        raise InvalidTraceError(f"start_index {start_index} leaves no samples")
    orig = original.values[start_index:]
    res = residual.values[start_index:]
    rms_orig = float(np.sqrt(np.mean(orig**2)))
    if rms_orig == 0.0:
        raise UndefinedEfficiencyError()
    return 1.0 - float(np.sqrt(np.mean(res**2))) / rms_orig
