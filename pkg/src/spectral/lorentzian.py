"""Lorentzian peak fitting.

Model: y(f) = baseline + sum_j A_j / (1 + ((f - c_j) / l_j)^2)

where l_j is the half width at half maximum. Fits run on a normalised
axis (grid centred on its midpoint and divided by its span, values
shifted to their minimum and divided by their range) and are mapped back
afterwards, so kHz-wide lines on a MHz grid and unit-scale ODMR sweeps
condition the same way.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass
from typing import Any

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.signal import find_peaks

from src.config.constants import DRIFT
from src.exceptions import DegenerateFitError, FitError, ParameterError
from src.observability.logging import FitLogger
from src.observability.metrics import record_fit_failure
from src.spectral.lsq import levenberg_marquardt
from src.spectral.spectrum import Spectrum

MODEL = "lorentzian"

Vector = NDArray[np.float64]


@dataclass(frozen=True)
class LorentzPeak:
    """One fitted line."""

    center_hz: float
    hwhm_hz: float
    amplitude: float
    center_sigma_hz: float = 0.0
    hwhm_sigma_hz: float = 0.0
    amplitude_sigma: float = 0.0

    def to_dict(self) -> dict[str, float]:
        return {
            "center_hz": self.center_hz,
            "center_sigma_hz": self.center_sigma_hz,
            "hwhm_hz": self.hwhm_hz,
            "hwhm_sigma_hz": self.hwhm_sigma_hz,
            "amplitude": self.amplitude,
            "amplitude_sigma": self.amplitude_sigma,
        }


@dataclass(frozen=True)
class PeakFit:
    """Sum-of-Lorentzians fit result.

    Attributes:
        peaks: Fitted lines sorted by center
        baseline: Constant offset
        baseline_sigma: Its 1-sigma uncertainty
        residual_rms: rms of (data - model)
        aicc: Small-sample corrected Akaike criterion; lower is better
        n_points: Points in the fit window
        nfev: Solver function evaluations
    """

    peaks: tuple[LorentzPeak, ...]
    baseline: float
    baseline_sigma: float
    residual_rms: float
    aicc: float
    n_points: int
    nfev: int

    @property
    def n_peaks(self) -> int:
        return len(self.peaks)

    def evaluate(self, freqs_hz: ArrayLike) -> Vector:
        """Model value on an arbitrary grid."""
        f = np.asarray(freqs_hz, dtype=np.float64)
        out = np.full(f.shape, self.baseline)
        for p in self.peaks:
            out = out + p.amplitude / (1.0 + ((f - p.center_hz) / p.hwhm_hz) ** 2)
        return out

    def to_dict(self) -> dict[str, Any]:
        return {
            "model": MODEL,
            "n_peaks": self.n_peaks,
            "peaks": [p.to_dict() for p in self.peaks],
            "baseline": self.baseline,
            "baseline_sigma": self.baseline_sigma,
            "residual_rms": self.residual_rms,
            "aicc": self.aicc,
            "n_points": self.n_points,
        }


@dataclass(frozen=True)
class PeakSelection:
    """One-peak vs two-peak comparison.

    `rejected` names the test a two-line fit lost on ("aicc" or a
    doublet_rejection reason); `two_error` holds the message when it failed.
    """

    preferred: int
    one: PeakFit
    two: PeakFit | None
    two_error: str | None = None
    rejected: str | None = None

    def to_dict(self) -> dict[str, Any]:
        return {
            "preferred_peaks": self.preferred,
            "one": self.one.to_dict(),
            "two": self.two.to_dict() if self.two is not None else None,
            "two_error": self.two_error,
            "rejected": self.rejected,
        }


def lorentzian_sum(x: Vector, params: Vector) -> Vector:
    """Evaluate [baseline, A1, c1, l1, A2, c2, l2, ...] on x."""
    out = np.full(x.shape, params[0])
    for j in range(1, params.size, 3):
        amp, center, hwhm = params[j], params[j + 1], params[j + 2]
        out = out + amp / (1.0 + ((x - center) / hwhm) ** 2)
    return out


def lorentzian_jacobian(x: Vector, params: Vector) -> Vector:
    """Analytic d(model)/d(params)."""
    jac = np.empty((x.size, params.size))
    jac[:, 0] = 1.0
    for j in range(1, params.size, 3):
        amp, center, hwhm = params[j], params[j + 1], params[j + 2]
        u = (x - center) / hwhm
        denom = 1.0 + u * u
        jac[:, j] = 1.0 / denom
        jac[:, j + 1] = 2.0 * amp * u / (hwhm * denom * denom)
        jac[:, j + 2] = 2.0 * amp * u * u / (hwhm * denom * denom)
    return jac


def aicc(ssr: float, n_points: int, n_params: int, value_scale: float) -> float:
    """AICc for Gaussian residuals; ssr is floored at the float resolution of the data."""
    floor = n_points * (1e-15 * max(value_scale, 1e-300)) ** 2
    ssr = max(ssr, floor, 1e-300)
    value = n_points * math.log(ssr / n_points) + 2.0 * n_params
    denom = n_points - n_params - 1
    if denom > 0:
        value += 2.0 * n_params * (n_params + 1) / denom
    else:
        value = math.inf
    return value


def _half_width(x: Vector, y: Vector, idx: int, base: float) -> float:
    """Distance from x[idx] to the nearest half-maximum crossing."""
    half = base + 0.5 * (y[idx] - base)
    step = float(x[1] - x[0]) if x.size > 1 else 1.0
    left = idx
    while left > 0 and y[left] > half:
        left -= 1
    right = idx
    while right < y.size - 1 and y[right] > half:
        right += 1
    widths = [x[idx] - x[left], x[right] - x[idx]]
    positive = [w for w in widths if w > 0]
    return max(min(positive) if positive else step, step)


def _initial_guess(x: Vector, y: Vector, n_peaks: int) -> Vector:
    base = float(np.min(y))
    top = int(np.argmax(y))  # first index, i.e. lower frequency on ties
    width = _half_width(x, y, top, base)
    if n_peaks == 1:
        return np.array([base, y[top] - base, x[top], width])

    found, _ = find_peaks(y)
    # Highest first; stable sort keeps the lower frequency on ties
    order = found[np.argsort(-y[found], kind="stable")] if found.size else np.array([], dtype=int)
    candidates = [int(i) for i in order if i != top]
    if candidates:
        second = candidates[0]
        width = min(width, abs(float(x[second] - x[top])) / 2.0)
    else:
        side = top + 1 if top + 1 < y.size and (top == 0 or y[top + 1] >= y[top - 1]) else top - 1
        second = max(0, min(y.size - 1, side))
        width = width / 2.0
    width = max(width, float(x[1] - x[0]))
    i1, i2 = sorted((top, second))
    return np.array([
        base,
        max(y[i1] - base, 1e-3), x[i1], width,
        max(y[i2] - base, 1e-3), x[i2], width,
    ])


def fit_lineshape(
    x: ArrayLike,
    y: ArrayLike,
    n_peaks: int = 1,
    init: Sequence[LorentzPeak] | None = None,
    min_hwhm: float | None = None,
) -> PeakFit:
    """Fit a sum of Lorentzians plus baseline to (x, y).

    Args:
        x: Ascending grid
        y: Values
        n_peaks: 1 or 2
        init: Starting lines; defaults to the largest local maxima
        min_hwhm: Widths below this raise DegenerateFitError; defaults
            to the grid spacing

    Raises:
        ParameterError: n_peaks not 1 or 2, or fewer points than parameters
        FitError: solver did not converge
        DegenerateFitError: a width collapsed below min_hwhm
    """
    if n_peaks not in (1, 2):
        raise ParameterError("n_peaks", n_peaks, "must be 1 or 2")
    xs = np.asarray(x, dtype=np.float64)
    ys = np.asarray(y, dtype=np.float64)
    n_params = 3 * n_peaks + 1
    if xs.size <= n_params:
        raise ParameterError("points", xs.size, f"need more than {n_params} points")

    x_mid = 0.5 * (xs[0] + xs[-1])
    x_span = float(xs[-1] - xs[0]) or 1.0
    y_min = float(np.min(ys))
    y_span = float(np.max(ys) - y_min) or 1.0
    xn = (xs - x_mid) / x_span
    yn = (ys - y_min) / y_span

    if init is None:
        p0 = _initial_guess(xn, yn, n_peaks)
    else:
        if len(init) != n_peaks:
            raise ParameterError("init", len(init), f"expected {n_peaks} lines")
        p0 = np.empty(n_params)
        p0[0] = 0.0
        for j, line in enumerate(init):
            p0[1 + 3 * j : 4 + 3 * j] = (
                line.amplitude / y_span,
                (line.center_hz - x_mid) / x_span,
                line.hwhm_hz / x_span,
            )

    result = levenberg_marquardt(
        MODEL,
        lambda p: lorentzian_sum(xn, p) - yn,
        lambda p: lorentzian_jacobian(xn, p),
        p0,
    )

    params = result.params
    sigmas = result.sigmas
    peaks = []
    for j in range(n_peaks):
        k = 1 + 3 * j
        peaks.append(LorentzPeak(
            center_hz=float(x_mid + params[k + 1] * x_span),
            hwhm_hz=float(abs(params[k + 2]) * x_span),
            amplitude=float(params[k] * y_span),
            center_sigma_hz=float(sigmas[k + 1] * x_span),
            hwhm_sigma_hz=float(sigmas[k + 2] * x_span),
            amplitude_sigma=float(sigmas[k] * y_span),
        ))
    peaks.sort(key=lambda p: p.center_hz)

    floor = float(xs[1] - xs[0]) if min_hwhm is None else min_hwhm
    narrowest = min(p.hwhm_hz for p in peaks)
    if narrowest < floor:
        FitLogger(MODEL).fit_degenerate(narrowest, floor)
        record_fit_failure(MODEL)
        raise DegenerateFitError(MODEL, narrowest, floor)

    ssr = result.ssr * y_span**2
    return PeakFit(
        peaks=tuple(peaks),
        baseline=float(y_min + params[0] * y_span),
        baseline_sigma=float(sigmas[0] * y_span),
        residual_rms=math.sqrt(ssr / xs.size),
        aicc=aicc(ssr, xs.size, n_params, float(np.max(np.abs(ys)))),
        n_points=int(xs.size),
        nfev=result.nfev,
    )


def _fit_window(spectrum: Spectrum, window: tuple[float, float] | None, n_peaks: int) -> Spectrum:
    sub = spectrum if window is None else spectrum.window_slice(*window)
    needed = DRIFT.MIN_POINTS_PER_PARAM * (3 * n_peaks + 1)
    if len(sub) < needed:
        raise FitError(MODEL, f"{len(sub)} points in fit window, need {needed}")
    return sub


def fit_lorentzian(
    spectrum: Spectrum,
    n_peaks: int = 1,
    init: Sequence[LorentzPeak] | None = None,
    window: tuple[float, float] | None = None,
) -> PeakFit:
    """Fit 1 or 2 Lorentzian lines to a spectrum.

    Args:
        spectrum: Amplitude or power spectrum
        n_peaks: 1 or 2
        init: Optional starting lines
        window: Optional (lo_hz, hi_hz) restriction of the fit

    Raises:
        FitError: too few points in the window, or no convergence
        DegenerateFitError: a width collapsed below one bin
    """
    sub = _fit_window(spectrum, window, n_peaks)
    return fit_lineshape(sub.freqs_hz, sub.amps, n_peaks=n_peaks, init=init)


def doublet_rejection(fit: PeakFit, lo_hz: float, hi_hz: float) -> str | None:
    """Why a two-line fit is not a resolved doublet; None when it is.

    Both centres must lie in [lo_hz, hi_hz], both amplitudes must be
    positive with the weaker at least DOUBLET_MIN_AMPLITUDE_RATIO of the
    stronger, and the centres must be DOUBLET_MIN_SEPARATION * (l1 + l2)
    apart or more.
    """
    low, high = fit.peaks
    if not all(lo_hz <= p.center_hz <= hi_hz for p in fit.peaks):
        return "center outside fit window"
    amps = sorted((low.amplitude, high.amplitude))
    if amps[0] <= 0:
        return "non-positive amplitude"
    if amps[0] < DRIFT.DOUBLET_MIN_AMPLITUDE_RATIO * amps[1]:
        return "minor line too weak"
    if high.center_hz - low.center_hz < DRIFT.DOUBLET_MIN_SEPARATION * (low.hwhm_hz + high.hwhm_hz):
        return "lines overlap"
    return None


def select_peak_count(
    spectrum: Spectrum,
    window: tuple[float, float] | None = None,
) -> PeakSelection:
    """Compare one- and two-line fits.

    Two lines win only when their AICc is lower and they form a resolved
    doublet (see doublet_rejection). A two-line fit that fails or
    degenerates counts as a vote for one line.
    """
    one = fit_lorentzian(spectrum, 1, window=window)
    try:
        two = fit_lorentzian(spectrum, 2, window=window)
    except FitError as exc:
        return PeakSelection(preferred=1, one=one, two=None, two_error=exc.message)
    if two.aicc >= one.aicc:
        return PeakSelection(preferred=1, one=one, two=two, rejected="aicc")
    sub = _fit_window(spectrum, window, 2)
    rejected = doublet_rejection(two, float(sub.freqs_hz[0]), float(sub.freqs_hz[-1]))
    return PeakSelection(preferred=1 if rejected else 2, one=one, two=two, rejected=rejected)
