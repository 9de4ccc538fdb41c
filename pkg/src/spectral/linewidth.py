"""Linewidth law l(nu) = a * nu^-n (+ d).

The offset-free form is a straight line in log-log space and is solved
by linear regression. The offset form is solved by Levenberg-Marquardt
on relative residuals (the widths span decades). A negative offset, or
an LM solve that hits its iteration limit, triggers a bounded
trust-region refit with d >= 0.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass
from typing import Any

import numpy as np
from numpy.typing import NDArray
from scipy.stats import linregress

from src.exceptions import FitError, ParameterError
from src.spectral.lsq import levenberg_marquardt

MODEL = "linewidth_law"

Vector = NDArray[np.float64]


@dataclass(frozen=True)
class LinewidthFit:
    """Fitted law with 1-sigma uncertainties.

    Attributes:
        n: Exponent
        a: Prefactor, Hz at nu = 1 Hz
        d: Residual broadening in Hz (0 when with_offset is False)
        fit_rms_hz: rms of (data - model)
        rel_rms: fit_rms_hz / mean(l)
    """

    n: float
    n_sigma: float
    a: float
    a_sigma: float
    d: float
    d_sigma: float
    with_offset: bool
    fit_rms_hz: float
    rel_rms: float
    points: int

    def evaluate(self, nu_hz: Vector | float) -> Vector:
        nu = np.asarray(nu_hz, dtype=np.float64)
        return self.a * nu ** (-self.n) + self.d

    def to_dict(self) -> dict[str, Any]:
        return {
            "model": MODEL,
            "n": self.n,
            "n_sigma": self.n_sigma,
            "a": self.a,
            "a_sigma": self.a_sigma,
            "d_hz": self.d,
            "d_sigma_hz": self.d_sigma,
            "with_offset": self.with_offset,
            "fit_rms_hz": self.fit_rms_hz,
            "rel_rms": self.rel_rms,
            "points": self.points,
        }


def _check_points(points: Sequence[tuple[float, float]]) -> tuple[Vector, Vector]:
    if len(points) < 3:
        raise FitError(MODEL, f"need at least 3 points, got {len(points)}")
    nu = np.array([float(p[0]) for p in points])
    width = np.array([float(p[1]) for p in points])
    if not (np.all(np.isfinite(nu)) and np.all(nu > 0)):
        raise ParameterError("nu_hz", nu.tolist(), "all speeds must be finite and > 0")
    if not (np.all(np.isfinite(width)) and np.all(width > 0)):
        raise ParameterError("l_hz", width.tolist(), "all linewidths must be finite and > 0")
    if np.ptp(nu) == 0:
        raise FitError(MODEL, "all update speeds are equal")
    return nu, width


def _log_fit(nu: Vector, width: Vector) -> tuple[float, float, float, float]:
    """(n, n_sigma, a, a_sigma) from a log-log regression."""
    reg = linregress(np.log(nu), np.log(width))
    n = -float(reg.slope)
    a = math.exp(float(reg.intercept))
    return n, float(reg.stderr), a, a * float(reg.intercept_stderr)


def fit_linewidth_law(
    points: Sequence[tuple[float, float]],
    with_offset: bool = True,
) -> LinewidthFit:
    """Fit linewidth against update speed.

    Args:
        points: (nu_hz, l_hz) pairs, at least 3, all positive
        with_offset: Include the residual broadening d

    Raises:
        FitError: fewer than 3 points, all nu equal, or no convergence
        ParameterError: non-positive or non-finite values

    Usage:
        law = fit_linewidth_law([(0.0033, 2.1e5), (0.1, 6.0e4), (0.2, 4.9e4)])
        law.n, law.d
    """
    nu, width = _check_points(points)
    n, n_sigma, a, a_sigma = _log_fit(nu, width)
    d = d_sigma = 0.0

    if with_offset:
        def residuals(q: Vector) -> Vector:
            return (q[0] * nu ** (-q[1]) + q[2]) / width - 1.0

        def jacobian(q: Vector) -> Vector:
            power = nu ** (-q[1])
            jac = np.empty((nu.size, 3))
            jac[:, 0] = power / width
            jac[:, 1] = -q[0] * power * np.log(nu) / width
            jac[:, 2] = 1.0 / width
            return jac

        bounded = (np.array([0.0, -np.inf, 0.0]), np.full(3, np.inf))
        x0 = np.array([a, n, 0.5 * float(np.min(width))])
        try:
            result = levenberg_marquardt(MODEL, residuals, jacobian, x0)
        except FitError:
            # iteration limit; retry bounded
            result = levenberg_marquardt(MODEL, residuals, jacobian, x0, bounds=bounded)
        if result.params[2] < 0:
            x0 = np.array([max(result.params[0], 0.0), result.params[1], 0.0])
            result = levenberg_marquardt(MODEL, residuals, jacobian, x0, bounds=bounded)
        a, n, d = (float(v) for v in result.params)
        a_sigma, n_sigma, d_sigma = (float(v) for v in result.sigmas)

    model = a * nu ** (-n) + d
    rms = float(np.sqrt(np.mean((model - width) ** 2)))
    return LinewidthFit(
        n=n,
        n_sigma=n_sigma,
        a=a,
        a_sigma=a_sigma,
        d=max(d, 0.0),
        d_sigma=d_sigma,
        with_offset=with_offset,
        fit_rms_hz=rms,
        rel_rms=rms / float(np.mean(width)),
        points=int(nu.size),
    )
