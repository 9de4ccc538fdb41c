"""Estimate streams - time-stamped tracker output.

Each entry records when the estimate becomes usable (t_avail_s) and the
effective centre time of the data it summarises (t_eff_s). Their
difference is the tracker latency.
"""

from __future__ import annotations

import csv
import math
from collections.abc import Sequence
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

import numpy as np
from numpy.typing import NDArray

from src.config.constants import DRIFT
from src.exceptions import InvalidTraceError, TraceFormatError
from src.utils.io import csv_text

ESTIMATE_HEADER = ("t_avail_s", "t_eff_s", "est_hz", "sigma_hz", "flag")


class EstimateFlag(Enum):
    """Validity of one estimate."""

    VALID = "valid"
    HELD = "held"  # fit failed or centre left the sweep; last valid value repeated
    OUT_OF_CAPTURE = "out_of_capture"  # true offset beyond the lock range; held


@dataclass(frozen=True)
class Estimate:
    """One tracker output."""

    t_avail_s: float
    t_eff_s: float
    est_hz: float
    sigma_hz: float
    flag: EstimateFlag = EstimateFlag.VALID

    @property
    def latency_s(self) -> float:
        return self.t_avail_s - self.t_eff_s


@dataclass(frozen=True, eq=False)
class EstimateStream:
    """Immutable, causally ordered sequence of estimates.

    Attributes:
        entries: Estimates with strictly increasing t_avail_s
        method: Producing tracker ("odmr", "lia", or a free label)
        cadence_s: Nominal spacing of t_avail_s

    Usage:
        stream = lia_track(trace, LiaConfig(window_s=20), seed=1)
        stream.latency_s           # 10.0
        i = stream.available_at(125.0)
        stream.entries[i].est_hz
    """

    entries: tuple[Estimate, ...]
    method: str
    cadence_s: float

    def __post_init__(self) -> None:
        t_avail = [e.t_avail_s for e in self.entries]
        if any(b <= a for a, b in zip(t_avail, t_avail[1:], strict=False)):
            raise InvalidTraceError("estimate t_avail_s must be strictly increasing")
        for e in self.entries:
            if e.t_avail_s < e.t_eff_s:
                raise InvalidTraceError(
                    f"estimate at t_avail={e.t_avail_s:g} summarises the future (t_eff={e.t_eff_s:g})"
                )

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def t_avail(self) -> NDArray[np.float64]:
        return np.array([e.t_avail_s for e in self.entries], dtype=np.float64)

    @property
    def t_eff(self) -> NDArray[np.float64]:
        return np.array([e.t_eff_s for e in self.entries], dtype=np.float64)

    @property
    def values(self) -> NDArray[np.float64]:
        return np.array([e.est_hz for e in self.entries], dtype=np.float64)

    @property
    def latency_s(self) -> float:
        """Latency of the first entry (constant by construction for built-in trackers)."""
        return self.entries[0].latency_s if self.entries else 0.0

    def count(self, flag: EstimateFlag) -> int:
        return sum(1 for e in self.entries if e.flag is flag)

    def available_at(self, t_s: float) -> int:
        """Index of the latest entry with t_avail_s <= t_s, or -1 if none."""
        return int(self.available_indices(np.asarray([t_s], dtype=np.float64))[0])

    def available_indices(self, times_s: NDArray[np.float64]) -> NDArray[np.int64]:
        """available_at for many instants at once."""
        tolerance = DRIFT.GRID_SNAP_REL * np.maximum(1.0, np.abs(times_s))
        idx = np.searchsorted(self.t_avail, times_s + tolerance, side="right") - 1
        return np.asarray(idx, dtype=np.int64)

    def to_csv(self) -> str:
        """`t_avail_s,t_eff_s,est_hz,sigma_hz,flag` rows."""
        return csv_text(
            ESTIMATE_HEADER,
            ((e.t_avail_s, e.t_eff_s, e.est_hz, e.sigma_hz, e.flag.value) for e in self.entries),
        )

    @classmethod
    def from_csv(cls, path: str | Path, method: str = "file", cadence_s: float | None = None) -> EstimateStream:
        """Read an estimate CSV written by to_csv.

        The cadence defaults to the median spacing of t_avail_s.
        """
        source = str(path)
        entries: list[Estimate] = []
        with open(path, encoding="utf-8", newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header is None or tuple(h.strip() for h in header) != ESTIMATE_HEADER:
                raise TraceFormatError(source, 1, f"header must be {','.join(ESTIMATE_HEADER)}")
            for line_no, row in enumerate(reader, start=2):
                if len(row) != len(ESTIMATE_HEADER):
                    raise TraceFormatError(source, line_no, f"expected 5 columns, got {len(row)}")
                try:
                    entries.append(Estimate(
                        t_avail_s=float(row[0]),
                        t_eff_s=float(row[1]),
                        est_hz=float(row[2]),
                        sigma_hz=float(row[3]),
                        flag=EstimateFlag(row[4].strip()),
                    ))
                except ValueError as exc:
                    raise TraceFormatError(source, line_no, str(exc)) from exc
        if cadence_s is None:
            gaps = np.diff([e.t_avail_s for e in entries])
            cadence_s = float(np.median(gaps)) if gaps.size else math.nan
        try:
            return cls(entries=tuple(entries), method=method, cadence_s=cadence_s)
        except InvalidTraceError as exc:
            raise TraceFormatError(source, None, exc.message) from exc


def stream_from_arrays(
    t_avail: Sequence[float],
    t_eff: Sequence[float],
    est: Sequence[float],
    sigma: Sequence[float] | None = None,
    method: str = "manual",
    cadence_s: float | None = None,
) -> EstimateStream:
    """Build a stream of valid estimates from parallel sequences."""
    sigmas = [0.0] * len(est) if sigma is None else list(sigma)
    entries = tuple(
        Estimate(float(a), float(e), float(v), float(s))
        for a, e, v, s in zip(t_avail, t_eff, est, sigmas, strict=True)
    )
    if cadence_s is None:
        gaps = np.diff(np.asarray(t_avail, dtype=np.float64))
        cadence_s = float(np.median(gaps)) if gaps.size else math.nan
    return EstimateStream(entries=entries, method=method, cadence_s=cadence_s)
