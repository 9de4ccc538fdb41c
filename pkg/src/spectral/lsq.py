"""Levenberg-Marquardt driver shared by the fitters.

Wraps scipy.optimize.least_squares with the tolerances from DRIFT and
turns solver outcomes into FitError / parameter covariances.
"""

from __future__ import annotations

from collections.abc import Callable
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray
from scipy.optimize import least_squares

from src.config.constants import DRIFT
from src.exceptions import FitError
from src.observability.logging import FitLogger
from src.observability.metrics import record_fit_failure

Vector = NDArray[np.float64]


@dataclass(frozen=True, eq=False)
class LsqResult:
    """Solver output in the caller's parameterisation."""

    params: Vector
    covariance: Vector
    residuals: Vector
    nfev: int

    @property
    def sigmas(self) -> Vector:
        """1-sigma parameter uncertainties."""
        return np.sqrt(np.clip(np.diag(self.covariance), 0.0, None))

    @property
    def ssr(self) -> float:
        """Sum of squared residuals."""
        return float(np.sum(self.residuals**2))


def covariance_from_jacobian(jac: Vector, residuals: Vector) -> Vector:
    """pinv(J^T J) scaled by the residual variance."""
    m, p = jac.shape
    dof = max(m - p, 1)
    scale = float(np.sum(residuals**2)) / dof
    return np.linalg.pinv(jac.T @ jac) * scale


def levenberg_marquardt(
    model: str,
    residual_fn: Callable[[Vector], Vector],
    jacobian_fn: Callable[[Vector], Vector],
    x0: Vector,
    bounds: tuple[Vector, Vector] | None = None,
) -> LsqResult:
    """Minimise sum(residual_fn(x)**2).

    Unbounded problems use MINPACK's LM; bounded ones fall back to a
    trust-region reflective solve with the same tolerances.

    Raises:
        FitError: iteration limit reached or non-finite result
    """
    fit_log = FitLogger(model)
    common = {
        "jac": jacobian_fn,
        "xtol": DRIFT.LM_XTOL,
        "ftol": DRIFT.LM_FTOL,
        "gtol": DRIFT.LM_FTOL,
        "x_scale": "jac",
    }
    try:
        if bounds is None:
            result = least_squares(
                residual_fn, x0, method="lm", max_nfev=DRIFT.LM_MAX_ITERATIONS * (x0.size + 1), **common
            )
        else:
            result = least_squares(
                residual_fn, x0, method="trf", bounds=bounds, max_nfev=DRIFT.LM_MAX_ITERATIONS, **common
            )
    except (ValueError, np.linalg.LinAlgError) as exc:
        fit_log.fit_failed(str(exc), 0)
        record_fit_failure(model)
        raise FitError(model, str(exc), list(map(float, x0))) from exc

    params = np.asarray(result.x, dtype=np.float64)
    if result.status <= 0 or not np.all(np.isfinite(params)):
        reason = "iteration limit reached" if result.status == 0 else str(result.message)
        fit_log.fit_failed(reason, int(result.nfev))
        record_fit_failure(model)
        raise FitError(model, reason, list(map(float, params)))

    jac = np.asarray(result.jac, dtype=np.float64)
    residuals = np.asarray(result.fun, dtype=np.float64)
    return LsqResult(
        params=params,
        covariance=covariance_from_jacobian(jac, residuals),
        residuals=residuals,
        nfev=int(result.nfev),
    )
