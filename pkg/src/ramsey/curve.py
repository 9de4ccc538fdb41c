"""Ramsey curves - averaged fringe signal on a free-evolution grid."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np
from numpy.typing import NDArray

from src.exceptions import InvalidTraceError, TraceFormatError
from src.spectral.ramsey_fit import DecayCurve
from src.utils.io import csv_text

CURVE_HEADER = ("t_evol_s", "signal", "stderr")

Array = NDArray[np.float64]


@dataclass(frozen=True, eq=False)
class RamseyCurve(DecayCurve):
    """Mean population per free-evolution time.

    Attributes:
        t_evol_s: Ascending free-evolution grid (> 0)
        signal: Mean recorded value per grid point
        stderr: Standard error of each mean
        shots_per_point: Shots averaged into each point
        start_s: Wall-clock time of the first shot
        end_s: Wall-clock time of the last shot
        acquisition: "interleaved" or "sequential"
    """

    t_evol_s: Array
    signal: Array
    stderr: Array
    shots_per_point: int = 0
    start_s: float = 0.0
    end_s: float = 0.0
    acquisition: str = "interleaved"

    def __post_init__(self) -> None:
        for name in ("t_evol_s", "signal", "stderr"):
            arr = np.array(getattr(self, name), dtype=np.float64, copy=True).reshape(-1)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if not (self.t_evol_s.size == self.signal.size == self.stderr.size):
            raise InvalidTraceError("t_evol_s, signal and stderr differ in length")
        if self.t_evol_s.size == 0:
            raise InvalidTraceError("ramsey curve is empty")
        if self.t_evol_s[0] <= 0 or np.any(np.diff(self.t_evol_s) <= 0):
            raise InvalidTraceError("t_evol_s must be positive and ascending")

    def __len__(self) -> int:
        return int(self.t_evol_s.size)

    def decay_samples(self) -> tuple[Array, Array]:
        return self.t_evol_s, self.signal

    @property
    def uniform(self) -> bool:
        if self.t_evol_s.size < 2:
            return False
        steps = np.diff(self.t_evol_s)
        return bool(np.allclose(steps, steps[0], rtol=1e-6, atol=0.0))

    @property
    def step_s(self) -> float:
        """Grid step of a uniform grid."""
        if not self.uniform:
            raise InvalidTraceError("ramsey grid is not uniform")
        return float((self.t_evol_s[-1] - self.t_evol_s[0]) / (self.t_evol_s.size - 1))

    @property
    def wall_span_s(self) -> float:
        return self.end_s - self.start_s

    def to_csv(self) -> str:
        return csv_text(CURVE_HEADER, zip(self.t_evol_s, self.signal, self.stderr, strict=True))

    def to_dict(self) -> dict[str, Any]:
        return {
            "points": len(self),
            "shots_per_point": self.shots_per_point,
            "start_s": self.start_s,
            "end_s": self.end_s,
            "acquisition": self.acquisition,
        }

    @classmethod
    def from_csv(cls, path: str | Path) -> RamseyCurve:
        """Read `t_evol_s,signal,stderr` rows; the stderr column is optional."""
        source = str(path)
        t: list[float] = []
        y: list[float] = []
        e: list[float] = []
        try:
            fh = open(path, encoding="utf-8", newline="")
        except OSError as exc:
            raise TraceFormatError(source, None, f"cannot open: {exc.strerror}") from exc
        with fh:
            reader = csv.reader(fh)
            header = tuple(h.strip() for h in next(reader, ()))
            if header not in (CURVE_HEADER, CURVE_HEADER[:2]):
                raise TraceFormatError(source, 1, f"header must be {','.join(CURVE_HEADER)}")
            for line_no, row in enumerate(reader, start=2):
                if not row:
                    continue
                if len(row) != len(header):
                    raise TraceFormatError(source, line_no, f"expected {len(header)} columns, got {len(row)}")
                try:
                    t.append(float(row[0]))
                    y.append(float(row[1]))
                    e.append(float(row[2]) if len(row) > 2 else 0.0)
                except ValueError as exc:
                    raise TraceFormatError(source, line_no, str(exc)) from exc
        try:
            return cls(t_evol_s=np.asarray(t), signal=np.asarray(y), stderr=np.asarray(e))
        except InvalidTraceError as exc:
            raise TraceFormatError(source, None, exc.message) from exc
