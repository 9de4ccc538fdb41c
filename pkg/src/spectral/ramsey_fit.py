"""Ramsey fringe fitting.

Model: y(t) = baseline + amplitude * exp(-(t / T2*)^p) * cos(2 pi f t + phase)

The decay is fitted through its rate g = 1/T2* so that an undamped
fringe (g -> 0) stays inside the parameter space. Times are scaled by
the last grid time before the solve.
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Any

import numpy as np
from numpy.typing import NDArray
from scipy.signal import hilbert
from scipy.stats import linregress

from src.config.constants import DRIFT
from src.exceptions import FitError, ParameterError
from src.spectral.lsq import levenberg_marquardt
from src.spectral.spectrum import fft_spectrum

MODEL = "ramsey_decay"

Vector = NDArray[np.float64]


class DecayCurve(ABC):
    """Free-evolution grid plus mean signal, as consumed by fit_ramsey_decay."""

    @abstractmethod
    def decay_samples(self) -> tuple[Vector, Vector]:
        """(t_evol_s, signal), ascending in t."""


@dataclass(frozen=True)
class RamseyFit:
    """Fitted fringe parameters with 1-sigma uncertainties.

    `reliable` is False when the envelope drops by less than
    T2_DECAY_MIN_DROP over the grid or the grid spans fewer than two
    fringe periods; T2* is then only a bound.
    """

    t2_star_s: float
    t2_star_sigma_s: float
    freq_hz: float
    freq_sigma_hz: float
    phase: float
    amplitude: float
    baseline: float
    decay_exponent: float
    residual_rms: float
    reliable: bool

    def to_dict(self) -> dict[str, Any]:
        return {
            "model": MODEL,
            "t2_star_s": self.t2_star_s,
            "t2_star_sigma_s": self.t2_star_sigma_s,
            "freq_hz": self.freq_hz,
            "freq_sigma_hz": self.freq_sigma_hz,
            "phase": self.phase,
            "amplitude": self.amplitude,
            "baseline": self.baseline,
            "decay_exponent": self.decay_exponent,
            "residual_rms": self.residual_rms,
            "reliable": self.reliable,
        }


def _model(t: Vector, params: Vector, p: float) -> Vector:
    base, amp, rate, freq, phase = params
    envelope = np.exp(-((abs(rate) * t) ** p))
    return base + amp * envelope * np.cos(2.0 * math.pi * freq * t + phase)


def _jacobian(t: Vector, params: Vector, p: float) -> Vector:
    _, amp, rate, freq, phase = params
    arg = abs(rate) * t
    envelope = np.exp(-(arg**p))
    theta = 2.0 * math.pi * freq * t + phase
    cos, sin = np.cos(theta), np.sin(theta)
    jac = np.empty((t.size, 5))
    jac[:, 0] = 1.0
    jac[:, 1] = envelope * cos
    jac[:, 2] = -amp * cos * envelope * p * np.power(arg, p - 1.0) * t * math.copysign(1.0, rate)
    jac[:, 3] = -amp * envelope * sin * 2.0 * math.pi * t
    jac[:, 4] = -amp * envelope * sin
    return jac


def _initial_guess(t: Vector, y: Vector) -> Vector:
    """Frequency from the FFT peak, decay from a log-envelope regression."""
    step = float(t[1] - t[0])
    uniform = np.allclose(np.diff(t), step, rtol=1e-6, atol=0.0)
    grid = t if uniform else np.linspace(t[0], t[-1], t.size)
    values = y if uniform else np.interp(grid, t, y)
    dt = float(grid[1] - grid[0])

    spectrum = fft_spectrum(values, dt, window="boxcar")
    freq = spectrum.peak_hz
    base = float(np.mean(values))

    demod = np.sum((values - base) * np.exp(-2j * math.pi * freq * grid))
    phase = float(np.angle(demod))

    envelope = np.abs(hilbert(values - base))
    lo, hi = int(0.1 * grid.size), max(int(0.9 * grid.size), int(0.1 * grid.size) + 3)
    core = slice(lo, min(hi, grid.size))
    positive = envelope[core] > 0
    if np.count_nonzero(positive) >= 3:
        fit = linregress(grid[core][positive], np.log(envelope[core][positive]))
        rate = max(-float(fit.slope), 0.1 / float(t[-1]))
        amp = float(np.exp(fit.intercept))
    else:
        rate = 1.0 / float(t[-1])
        amp = float(np.max(np.abs(values - base)))
    return np.array([base, amp, rate, freq, phase])


def fit_ramsey_decay(curve: DecayCurve, decay_exponent: float = 1.0) -> RamseyFit:
    """Fit a damped cosine to a Ramsey curve.

    Args:
        curve: Curve whose samples are ascending in t > 0
        decay_exponent: Envelope exponent p (1 exponential, 2 Gaussian)

    Raises:
        ParameterError: fewer than 6 points or p <= 0
        FitError: solver did not converge
    """
    t_raw, y_raw = curve.decay_samples()
    t = np.asarray(t_raw, dtype=np.float64)
    y = np.asarray(y_raw, dtype=np.float64)
    if t.size < 6:
        raise ParameterError("t_evol_s", t.size, "need at least 6 points")
    if not decay_exponent > 0:
        raise ParameterError("decay_exponent", decay_exponent, "must be > 0")

    t_max = float(t[-1])
    tn = t / t_max
    guess = _initial_guess(t, y)
    # rate and freq in units of 1/t_max
    p0 = guess * np.array([1.0, 1.0, t_max, t_max, 1.0])

    result = levenberg_marquardt(
        MODEL,
        lambda q: _model(tn, q, decay_exponent) - y,
        lambda q: _jacobian(tn, q, decay_exponent),
        p0,
    )
    base, amp, rate_n, freq_n, phase = result.params
    sig = result.sigmas

    # Fold sign ambiguities into the phase
    if amp < 0:
        amp, phase = -amp, phase + math.pi
    if freq_n < 0:
        freq_n, phase = -freq_n, -phase
    phase = float((phase + math.pi) % (2.0 * math.pi) - math.pi)

    rate = abs(rate_n) / t_max
    freq = freq_n / t_max
    if not math.isfinite(rate):
        raise FitError(MODEL, "non-finite decay rate", list(map(float, result.params)))
    t2 = math.inf if rate == 0.0 else 1.0 / rate
    t2_sigma = math.inf if rate == 0.0 else (sig[2] / t_max) / rate**2

    span = float(t[-1] - t[0])
    remaining = math.exp(-((rate * t_max) ** decay_exponent))
    reliable = (1.0 - remaining) >= DRIFT.T2_DECAY_MIN_DROP and freq * span >= 2.0

    return RamseyFit(
        t2_star_s=t2,
        t2_star_sigma_s=float(t2_sigma),
        freq_hz=float(freq),
        freq_sigma_hz=float(sig[3] / t_max),
        phase=phase,
        amplitude=float(amp),
        baseline=float(base),
        decay_exponent=decay_exponent,
        residual_rms=math.sqrt(result.ssr / t.size),
        reliable=bool(reliable),
    )
