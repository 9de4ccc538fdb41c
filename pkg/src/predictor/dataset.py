"""Sliding-window datasets for M-in / N-out forecasting."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from numpy.typing import ArrayLike, NDArray

from src.config.constants import DRIFT
from src.exceptions import DatasetSizeError, ParameterError

Array = NDArray[np.float64]


@dataclass(frozen=True)
class Normalization:
    """Affine map between Hz and the unit scale the network sees."""

    mean_hz: float
    scale_hz: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.mean_hz) and math.isfinite(self.scale_hz) and self.scale_hz > 0):
            raise ParameterError("norm", (self.mean_hz, self.scale_hz), "needs finite mean and scale > 0")

    @classmethod
    def fit(cls, values: ArrayLike) -> Normalization:
        """Mean and population std, with std floored at STD_FLOOR_HZ."""
        x = np.asarray(values, dtype=np.float64)
        return cls(mean_hz=float(np.mean(x)), scale_hz=max(float(np.std(x)), DRIFT.STD_FLOOR_HZ))

    def normalize(self, values: ArrayLike) -> Array:
        return (np.asarray(values, dtype=np.float64) - self.mean_hz) / self.scale_hz

    def denormalize(self, values: ArrayLike) -> Array:
        return np.asarray(values, dtype=np.float64) * self.scale_hz + self.mean_hz


@dataclass(frozen=True, eq=False)
class WindowDataset:
    """Stride-1 windows: row j holds series[j:j+M] -> series[j+M:j+M+N].

    Attributes:
        inputs: k x M normalised inputs
        targets: k x N normalised targets
        norm: Normalisation fitted on the training portion
        m: Input length
        n: Output length
        series_length: Length of the source series
        train_windows: Leading windows that belong to the training portion
    """

    inputs: Array
    targets: Array
    norm: Normalization
    m: int
    n: int
    series_length: int
    train_windows: int

    def __len__(self) -> int:
        return int(self.inputs.shape[0])

    def split(self) -> tuple[WindowDataset, WindowDataset]:
        """Chronological (train, validation) split at train_windows."""
        cut = self.train_windows
        head = WindowDataset(
            self.inputs[:cut], self.targets[:cut], self.norm, self.m, self.n, self.series_length, cut
        )
        tail = WindowDataset(
            self.inputs[cut:], self.targets[cut:], self.norm, self.m, self.n, self.series_length, 0
        )
        return head, tail

    def raw_inputs(self) -> Array:
        return self.norm.denormalize(self.inputs)

    def raw_targets(self) -> Array:
        return self.norm.denormalize(self.targets)


def build_dataset(
    series: ArrayLike,
    m: int,
    n: int,
    validation_fraction: float = 0.0,
    norm: Normalization | None = None,
) -> WindowDataset:
    """Cut a series into k = len - M - N + 1 overlapping windows.

    Args:
        series: Values in Hz
        m: Input length
        n: Output length
        validation_fraction: Trailing share of windows held out; the
            normalisation only sees values the training windows touch
        norm: Reuse an existing normalisation instead of fitting one

    Raises:
        DatasetSizeError: series shorter than M + N
        ParameterError: m or n < 1, or validation_fraction outside [0, 1)
    """
    x = np.asarray(series, dtype=np.float64).reshape(-1)
    if m < 1 or n < 1:
        raise ParameterError("m/n", (m, n), "window lengths must be >= 1")
    if not 0.0 <= validation_fraction < 1.0:
        raise ParameterError("validation_fraction", validation_fraction, "must be in [0, 1)")
    if x.size < m + n:
        raise DatasetSizeError(int(x.size), m, n)

    k = x.size - m - n + 1
    held_out = int(round(k * validation_fraction))
    if validation_fraction > 0:
        held_out = min(max(held_out, 1), k - 1) if k > 1 else 0
    train_windows = k - held_out

    if norm is None:
        norm = Normalization.fit(x[: train_windows + m + n - 1])
    windows = sliding_window_view(norm.normalize(x), m + n)
    return WindowDataset(
        inputs=np.ascontiguousarray(windows[:, :m]),
        targets=np.ascontiguousarray(windows[:, m:]),
        norm=norm,
        m=m,
        n=n,
        series_length=int(x.size),
        train_windows=train_windows,
    )
