"""Noise generators - synthetic resonance-drift traces.

Component kinds:
- ou: Ornstein-Uhlenbeck, exact conditional-Gaussian update
- power_law: 1/f^alpha noise synthesised in the frequency domain
- sine: deterministic periodic disturbance
- constant: fixed offset

Component i draws from its own generator derived from (seed, "noise", i),
so generating A+B equals generating A and B separately and summing.
"""

from __future__ import annotations

import math
from typing import Annotated, Any, Literal

import numpy as np
from numpy.typing import NDArray
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy.signal import lfilter

from src.config.constants import DRIFT
from src.config.validation import parse_model
from src.exceptions import NyquistError, ParameterError
from src.noise.trace import NoiseTrace
from src.observability.logging import get_logger
from src.utils.seeding import derive_rng

logger = get_logger(__name__)

MAX_SEED = 2**64 - 1


class _Component(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True, allow_inf_nan=False)


class OUComponent(_Component):
    """Mean-reverting drift with correlation time 1/relaxation_rate."""

    kind: Literal["ou"] = "ou"
    relaxation_rate: float = Field(..., gt=0, description="Mean-reversion rate (1/s)")
    stationary_std: float = Field(..., ge=0, description="Stationary standard deviation (Hz)")


class PowerLawComponent(_Component):
    """Band-limited noise with PSD proportional to f^-exponent."""

    kind: Literal["power_law"] = "power_law"
    exponent: float = Field(..., ge=0, le=3, description="Spectral exponent alpha")
    rms_amplitude: float = Field(..., ge=0, description="Target rms (Hz)")
    low_cutoff: float = Field(..., gt=0, description="Lower band edge (Hz)")
    high_cutoff: float = Field(..., gt=0, description="Upper band edge (Hz)")

    @model_validator(mode="after")
    def _check_band(self) -> PowerLawComponent:
        if self.low_cutoff >= self.high_cutoff:
            raise ValueError("low_cutoff must be below high_cutoff")
        return self


class SineComponent(_Component):
    """A sin(2 pi f t + phase)."""

    kind: Literal["sine"] = "sine"
    amplitude: float = Field(..., description="Amplitude (Hz)")
    frequency: float = Field(..., ge=0, description="Frequency (Hz)")
    phase: float = Field(default=0.0, description="Phase (rad)")


class ConstantComponent(_Component):
    """Fixed frequency offset."""

    kind: Literal["constant"] = "constant"
    offset: float = Field(..., description="Offset (Hz)")


NoiseComponent = Annotated[
    OUComponent | PowerLawComponent | SineComponent | ConstantComponent,
    Field(discriminator="kind"),
]


class NoiseSpec(BaseModel):
    """Noise components plus the root seed.

    Usage:
        spec = NoiseSpec.from_dict({
            "components": [{"kind": "ou", "relaxation_rate": 0.01, "stationary_std": 500}],
            "seed": 7,
        })
        trace = generate(spec, duration_s=10000, dt_s=1.0)
    """

    model_config = ConfigDict(extra="forbid", frozen=True)

    components: list[NoiseComponent] = Field(default_factory=list)
    seed: int = Field(default=0, ge=0, le=MAX_SEED)

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> NoiseSpec:
        """Validate a plain dict, raising ParameterError with the field path."""
        return parse_model(cls, data, error_cls=ParameterError)


def sample_count(duration_s: float, dt_s: float) -> int:
    """floor(duration/dt) + 1, tolerant of representation error in the ratio."""
    return int(math.floor(duration_s / dt_s * (1 + DRIFT.GRID_SNAP_REL))) + 1


def _ou(component: OUComponent, n: int, dt_s: float, rng: np.random.Generator) -> NDArray[np.float64]:
    normals = rng.standard_normal(n)
    a = math.exp(-component.relaxation_rate * dt_s)
    drive = component.stationary_std * math.sqrt(1.0 - a * a) * normals
    # Start in the stationary distribution
    drive[0] = component.stationary_std * normals[0]
    return np.asarray(lfilter([1.0], [1.0, -a], drive), dtype=np.float64)


def _power_law(
    component: PowerLawComponent, n: int, dt_s: float, rng: np.random.Generator
) -> NDArray[np.float64]:
    nyquist = 0.5 / dt_s
    if component.high_cutoff > nyquist * (1 + DRIFT.GRID_SNAP_REL):
        raise NyquistError(component.high_cutoff, dt_s)
    freqs = np.fft.rfftfreq(n, dt_s)
    band = (freqs > 0) & (freqs >= component.low_cutoff) & (freqs <= component.high_cutoff)
    if not np.any(band):
        raise ParameterError(
            "low_cutoff",
            component.low_cutoff,
            f"no frequency bins in [{component.low_cutoff:g}, {component.high_cutoff:g}] Hz "
            f"for {n} samples at dt={dt_s:g} s",
        )
    phases = rng.uniform(0.0, 2.0 * math.pi, freqs.size)
    amplitudes = np.zeros(freqs.size)
    amplitudes[band] = freqs[band] ** (-component.exponent / 2.0)
    values = np.fft.irfft(amplitudes * np.exp(1j * phases), n)
    rms = float(np.sqrt(np.mean(values**2)))
    if rms == 0.0:
        return np.zeros(n)
    return values * (component.rms_amplitude / rms)


def component_signal(
    component: NoiseComponent,
    n: int,
    dt_s: float,
    seed: int,
    index: int,
) -> NDArray[np.float64]:
    """Samples of one component on the grid t_i = i * dt_s.

    Args:
        component: Validated component descriptor
        n: Number of samples
        dt_s: Sample period
        seed: Root seed of the NoiseSpec
        index: Position of the component in the spec

    Raises:
        NyquistError: sine frequency or power-law band reaches past 1/(2 dt)
        ParameterError: power-law band contains no frequency bins
    """
    if isinstance(component, ConstantComponent):
        return np.full(n, component.offset, dtype=np.float64)
    if isinstance(component, SineComponent):
        if component.frequency > 0.5 / dt_s * (1 + DRIFT.GRID_SNAP_REL):
            raise NyquistError(component.frequency, dt_s, parameter="frequency")
        t = np.arange(n) * dt_s
        return component.amplitude * np.sin(2.0 * math.pi * component.frequency * t + component.phase)

    rng = derive_rng(seed, "noise", index)
    if isinstance(component, OUComponent):
        return _ou(component, n, dt_s, rng)
    return _power_law(component, n, dt_s, rng)


def generate(spec: NoiseSpec, duration_s: float, dt_s: float, label: str = "") -> NoiseTrace:
    """Sum the spec's components on a uniform grid starting at t=0.

    Returns:
        Trace of floor(duration_s/dt_s) + 1 samples

    Raises:
        ParameterError: non-finite or inconsistent duration/dt
        NyquistError: a sine or power-law band exceeds the Nyquist frequency
    """
    if not (math.isfinite(dt_s) and dt_s > 0):
        raise ParameterError("dt_s", dt_s, "must be finite and > 0")
    if not (math.isfinite(duration_s) and duration_s >= dt_s):
        raise ParameterError("duration_s", duration_s, "must be finite and >= dt_s")

    n = sample_count(duration_s, dt_s)
    values = np.zeros(n, dtype=np.float64)
    for index, component in enumerate(spec.components):
        values = values + component_signal(component, n, dt_s, spec.seed, index)

    logger.debug(
        "trace_generated",
        samples=n,
        dt_s=dt_s,
        components=[c.kind for c in spec.components],
        seed=spec.seed,
    )
    return NoiseTrace(dt_s=dt_s, values=values, label=label or f"generated:seed={spec.seed}")
