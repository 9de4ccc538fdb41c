"""Spectra - one-sided FFT amplitude spectra and Welch PSDs.

Amplitude convention: amps[k] = |X[k]| * sqrt(c_k / n_fft) with c_k = 1
for DC (and Nyquist, when n_fft is even) and 2 otherwise. With this
convention sum(amps**2) equals the energy of the windowed, padded
signal, so Parseval holds bin for bin and spectra are linear in the
input.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Literal

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy import signal as sps
from scipy.stats import linregress

from src.config.constants import DRIFT
from src.exceptions import FitError, InvalidTraceError, ParameterError
from src.noise.trace import NoiseTrace
from src.utils.io import csv_text

WindowName = Literal["hann", "boxcar", "hamming", "blackman"]
Convention = Literal["amplitude", "psd"]


@dataclass(frozen=True, eq=False)
class Spectrum:
    """One-sided spectrum on an ascending frequency grid.

    Attributes:
        freqs_hz: Ascending frequency grid starting at 0
        amps: Amplitude (convention="amplitude") or PSD in Hz^2/Hz
            (convention="psd"); finite and non-negative
        window: Window function applied before the transform
        zero_pad_factor: FFT length over signal length (1 for PSDs)
        convention: Which of the two scales `amps` is on
        segments: Number of averaged segments (1 for plain FFT spectra)
    """

    freqs_hz: NDArray[np.float64]
    amps: NDArray[np.float64]
    window: str
    zero_pad_factor: int
    convention: Convention
    segments: int = 1

    def __post_init__(self) -> None:
        if self.freqs_hz.shape != self.amps.shape:
            raise InvalidTraceError("spectrum grid and values differ in length")
        if self.freqs_hz.size > 1 and np.any(np.diff(self.freqs_hz) <= 0):
            raise InvalidTraceError("spectrum grid must be ascending")
        if not np.all(np.isfinite(self.amps)) or np.any(self.amps < 0):
            raise InvalidTraceError("spectrum values must be finite and >= 0")

    def __len__(self) -> int:
        return int(self.freqs_hz.size)

    @property
    def bin_hz(self) -> float:
        """Grid spacing."""
        return float(self.freqs_hz[1] - self.freqs_hz[0]) if self.freqs_hz.size > 1 else 0.0

    @property
    def peak_hz(self) -> float:
        """Frequency of the largest value (lowest frequency on ties)."""
        return float(self.freqs_hz[int(np.argmax(self.amps))])

    def energy(self) -> float:
        """Sum of squared amplitudes."""
        return float(np.sum(self.amps**2))

    def window_slice(self, lo_hz: float | None = None, hi_hz: float | None = None) -> Spectrum:
        """Sub-spectrum with lo_hz <= f <= hi_hz."""
        mask = np.ones(self.freqs_hz.size, dtype=bool)
        if lo_hz is not None:
            mask &= self.freqs_hz >= lo_hz
        if hi_hz is not None:
            mask &= self.freqs_hz <= hi_hz
        return Spectrum(
            freqs_hz=self.freqs_hz[mask],
            amps=self.amps[mask],
            window=self.window,
            zero_pad_factor=self.zero_pad_factor,
            convention=self.convention,
            segments=self.segments,
        )

    def shifted(self, delta_hz: float) -> Spectrum:
        """Same values on a grid translated by delta_hz."""
        return Spectrum(
            freqs_hz=self.freqs_hz + delta_hz,
            amps=self.amps,
            window=self.window,
            zero_pad_factor=self.zero_pad_factor,
            convention=self.convention,
            segments=self.segments,
        )

    def to_csv(self) -> str:
        """`freq_hz,value` rows."""
        value_col = "amplitude" if self.convention == "amplitude" else "psd_hz2_per_hz"
        return csv_text(
            ("freq_hz", value_col),
            ((float(f), float(a)) for f, a in zip(self.freqs_hz, self.amps, strict=True)),
        )

    def to_dict(self) -> dict[str, Any]:
        """Metadata only; values go to CSV."""
        return {
            "points": len(self),
            "bin_hz": self.bin_hz,
            "window": self.window,
            "zero_pad_factor": self.zero_pad_factor,
            "convention": self.convention,
            "segments": self.segments,
        }


def fft_spectrum(
    values: ArrayLike,
    dt_s: float,
    window: WindowName = "hann",
    zero_pad_factor: int = DRIFT.ZERO_PAD_FACTOR,
    remove_mean: bool = True,
) -> Spectrum:
    """One-sided amplitude spectrum.

    Args:
        values: Uniformly sampled signal, length >= 2
        dt_s: Sample period
        window: Taper applied after mean removal
        zero_pad_factor: FFT length = factor * len(values)
        remove_mean: Subtract the mean before windowing

    Usage:
        spec = fft_spectrum(curve.signal, dt_s=curve.step_s, window="boxcar")
        spec.peak_hz
    """
    x = np.asarray(values, dtype=np.float64).reshape(-1)
    if x.size < 2:
        raise ParameterError("values", x.size, "need at least 2 samples")
    if not dt_s > 0:
        raise ParameterError("dt_s", dt_s, "must be > 0")
    if zero_pad_factor < 1:
        raise ParameterError("zero_pad_factor", zero_pad_factor, "must be >= 1")
    if remove_mean:
        x = x - np.mean(x)
    x = x * sps.get_window(window, x.size)

    n_fft = x.size * zero_pad_factor
    coeffs = np.abs(np.fft.rfft(x, n_fft))
    weights = np.full(coeffs.size, 2.0)
    weights[0] = 1.0
    if n_fft % 2 == 0:
        weights[-1] = 1.0
    return Spectrum(
        freqs_hz=np.fft.rfftfreq(n_fft, dt_s),
        amps=coeffs * np.sqrt(weights / n_fft),
        window=window,
        zero_pad_factor=zero_pad_factor,
        convention="amplitude",
    )


def psd(
    trace: NoiseTrace,
    segments: int = DRIFT.WELCH_SEGMENTS,
    window: WindowName = "hann",
) -> Spectrum:
    """Welch power spectral density (one-sided, Hz^2/Hz).

    Segments overlap by half, so `segments` halves of length n/(segments+1)
    tile the trace. White noise of variance s^2 gives a flat level 2*s^2*dt.
    """
    if len(trace) < 2:
        raise ParameterError("trace", len(trace), "need at least 2 samples")
    if segments < 1:
        raise ParameterError("segments", segments, "must be >= 1")
    nperseg = max(2, min(len(trace), int(2 * len(trace) / (segments + 1))))
    freqs, power = sps.welch(
        trace.values,
        fs=1.0 / trace.dt_s,
        window=window,
        nperseg=nperseg,
        noverlap=nperseg // 2,
        detrend="constant",
        scaling="density",
    )
    return Spectrum(
        freqs_hz=np.asarray(freqs, dtype=np.float64),
        amps=np.maximum(np.asarray(power, dtype=np.float64), 0.0),
        window=window,
        zero_pad_factor=1,
        convention="psd",
        segments=segments,
    )


def loglog_slope(spectrum: Spectrum, lo_hz: float, hi_hz: float) -> float:
    """Least-squares slope of log(amps) against log(f) over [lo_hz, hi_hz]."""
    mask = (spectrum.freqs_hz >= lo_hz) & (spectrum.freqs_hz <= hi_hz) & (spectrum.amps > 0)
    if np.count_nonzero(mask) < 3:
        raise FitError("loglog_slope", f"fewer than 3 positive bins in [{lo_hz:g}, {hi_hz:g}] Hz")
    result = linregress(np.log(spectrum.freqs_hz[mask]), np.log(spectrum.amps[mask]))
    return float(result.slope)
