"""Noise traces - uniformly sampled resonance-frequency offsets.

A NoiseTrace is the signal every other stage consumes: trackers sample
it, the control loop subtracts corrections from it, and the Ramsey
simulator reads detuning from it.

The CSV format is `time_s,freq_offset_hz`, one sample per row, UTF-8,
LF line endings, values written with %.17g so a save/load round trip is
bit-exact.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from numpy.typing import NDArray
from scipy.integrate import cumulative_trapezoid

from src.config.constants import DRIFT
from src.exceptions import InvalidTraceError, TraceFormatError
from src.utils.io import atomic_write_text, csv_text

TRACE_HEADER = ("time_s", "freq_offset_hz")


@dataclass(frozen=True, eq=False)
class NoiseTrace:
    """Uniformly sampled frequency offset (Hz) versus time (s).

    Sample i sits at t0_s + i * dt_s, computed directly rather than
    accumulated. The values array is made read-only on construction.

    Usage:
        trace = NoiseTrace(dt_s=1.0, values=np.zeros(101))
        trace.duration_s      # 100.0
        trace.value_at(12.5)  # linear interpolation
    """

    dt_s: float
    values: NDArray[np.float64]
    t0_s: float = 0.0
    label: str = ""
    _integral: NDArray[np.float64] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if not (math.isfinite(self.dt_s) and self.dt_s > 0):
            raise InvalidTraceError(f"dt_s must be finite and > 0, got {self.dt_s}")
        if not math.isfinite(self.t0_s):
            raise InvalidTraceError(f"t0_s must be finite, got {self.t0_s}")
        values = np.array(self.values, dtype=np.float64, copy=True).reshape(-1)
        if values.size == 0:
            raise InvalidTraceError("values must be non-empty")
        if not np.all(np.isfinite(values)):
            bad = int(np.flatnonzero(~np.isfinite(values))[0])
            raise InvalidTraceError(f"non-finite value at sample {bad}")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        integral = np.zeros(values.size)
        if values.size > 1:
            integral[1:] = cumulative_trapezoid(values, dx=self.dt_s)
        integral.setflags(write=False)
        object.__setattr__(self, "_integral", integral)

    def __len__(self) -> int:
        return int(self.values.size)

    @property
    def times(self) -> NDArray[np.float64]:
        """Sample times t0 + i*dt."""
        return self.t0_s + np.arange(self.values.size) * self.dt_s

    @property
    def duration_s(self) -> float:
        """(len - 1) * dt."""
        return (self.values.size - 1) * self.dt_s

    @property
    def t_end_s(self) -> float:
        """Time of the last sample."""
        return self.t0_s + self.duration_s

    def rms(self) -> float:
        """Root mean square about zero."""
        return float(np.sqrt(np.mean(self.values**2)))

    def grid_position(self, t: float | NDArray[np.float64]) -> NDArray[np.float64]:
        """Fractional sample index of time t, snapped to integers within tolerance."""
        pos = (np.asarray(t, dtype=np.float64) - self.t0_s) / self.dt_s
        nearest = np.rint(pos)
        tol = DRIFT.GRID_SNAP_REL * np.maximum(1.0, np.abs(pos))
        return np.where(np.abs(pos - nearest) <= tol, nearest, pos)

    def value_at(self, t: float | NDArray[np.float64]) -> NDArray[np.float64]:
        """Linear interpolation; exact sample values at grid times.

        Times outside the trace clamp to the end values.
        """
        pos = self.grid_position(t)
        return np.interp(pos, np.arange(self.values.size, dtype=np.float64), self.values)

    def integral_to(self, t: float | NDArray[np.float64]) -> NDArray[np.float64]:
        """Integral of the piecewise-linear interpolant from t0 to t."""
        pos = np.clip(self.grid_position(t), 0.0, self.values.size - 1)
        idx = np.minimum(np.floor(pos).astype(np.int64), self.values.size - 1)
        frac = pos - idx
        nxt = np.minimum(idx + 1, self.values.size - 1)
        v0 = self.values[idx]
        slope = self.values[nxt] - v0
        return self._integral[idx] + self.dt_s * (v0 * frac + 0.5 * slope * frac * frac)

    def mean_over(
        self, t_start: float | NDArray[np.float64], t_stop: float | NDArray[np.float64]
    ) -> NDArray[np.float64]:
        """Mean of the interpolant over [t_start, t_stop] (exact for piecewise-linear data)."""
        a = np.asarray(t_start, dtype=np.float64)
        b = np.asarray(t_stop, dtype=np.float64)
        span = b - a
        if np.any(span <= 0):
            raise InvalidTraceError("mean_over needs t_stop > t_start")
        return (self.integral_to(b) - self.integral_to(a)) / span

    def with_values(self, values: NDArray[np.float64], label: str | None = None) -> NoiseTrace:
        """Same grid, new values."""
        return NoiseTrace(
            dt_s=self.dt_s,
            values=values,
            t0_s=self.t0_s,
            label=self.label if label is None else label,
        )


def trace_to_csv(trace: NoiseTrace) -> str:
    """`time_s,freq_offset_hz` rows."""
    return csv_text(TRACE_HEADER, zip(trace.times.tolist(), trace.values.tolist(), strict=True))


def save_trace(trace: NoiseTrace, path: str | Path) -> Path:
    """Write a trace in CSV trace format (atomic)."""
    return atomic_write_text(path, trace_to_csv(trace))


def load_trace(path: str | Path, label: str | None = None) -> NoiseTrace:
    """Read a CSV trace file.

    Args:
        path: File in `time_s,freq_offset_hz` format
        label: Provenance tag; defaults to the file name

    Raises:
        TraceFormatError: malformed row, non-monotone time or non-uniform dt,
            with the 1-based line number of the offending row
    """
    source = str(path)
    try:
        fh = open(path, encoding="utf-8", newline="")
    except OSError as exc:
        raise TraceFormatError(source, None, f"cannot open: {exc.strerror}") from exc

    times: list[float] = []
    values: list[float] = []
    with fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(h.strip() for h in header) != TRACE_HEADER:
            raise TraceFormatError(source, 1, f"header must be {','.join(TRACE_HEADER)}")
        for line_no, row in enumerate(reader, start=2):
            if not row:
                raise TraceFormatError(source, line_no, "empty row")
            if len(row) != 2:
                raise TraceFormatError(source, line_no, f"expected 2 columns, got {len(row)}")
            try:
                t, v = float(row[0]), float(row[1])
            except ValueError as exc:
                raise TraceFormatError(source, line_no, "non-numeric field") from exc
            if not (math.isfinite(t) and math.isfinite(v)):
                raise TraceFormatError(source, line_no, "non-finite field")
            if times and t <= times[-1]:
                raise TraceFormatError(source, line_no, "time not strictly increasing")
            times.append(t)
            values.append(v)

    if len(times) < 2:
        raise TraceFormatError(source, None, "need at least two samples to infer dt")

    step = times[1] - times[0]
    tolerance = DRIFT.TRACE_JITTER_REL * step
    for i in range(2, len(times)):
        if abs(times[i] - times[i - 1] - step) > tolerance:
            raise TraceFormatError(source, i + 2, f"non-uniform sampling (dt {step:.17g} expected)")

    t0 = times[0]
    dt = (times[-1] - t0) / (len(times) - 1)

    return NoiseTrace(
        dt_s=dt,
        values=np.asarray(values, dtype=np.float64),
        t0_s=t0,
        label=Path(source).name if label is None else label,
    )


def resample(trace: NoiseTrace, dt_new: float) -> NoiseTrace:
    """Linearly interpolate onto a new grid starting at the same t0.

    The first sample is preserved, and so is the last whenever the
    duration is a multiple of dt_new.
    """
    if not (math.isfinite(dt_new) and dt_new > 0):
        raise InvalidTraceError(f"dt_new must be finite and > 0, got {dt_new}")
    ratio = dt_new / trace.dt_s
    count = int(math.floor(trace.duration_s / dt_new * (1 + DRIFT.GRID_SNAP_REL))) + 1
    positions = np.arange(count) * ratio
    snapped = np.rint(positions)
    tol = DRIFT.GRID_SNAP_REL * np.maximum(1.0, snapped)
    positions = np.where(np.abs(positions - snapped) <= tol, snapped, positions)
    positions = np.minimum(positions, trace.values.size - 1)
    values = np.interp(positions, np.arange(trace.values.size, dtype=np.float64), trace.values)
    return NoiseTrace(dt_s=dt_new, values=values, t0_s=trace.t0_s, label=trace.label)
