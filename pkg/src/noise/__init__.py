"""Noise generation and trace I/O."""

from src.noise.generators import (
    ConstantComponent,
    NoiseComponent,
    NoiseSpec,
    OUComponent,
    PowerLawComponent,
    SineComponent,
    component_signal,
    generate,
    sample_count,
)
from src.noise.trace import NoiseTrace, load_trace, resample, save_trace, trace_to_csv

__all__ = [
    "ConstantComponent",
    "NoiseComponent",
    "NoiseSpec",
    "NoiseTrace",
    "OUComponent",
    "PowerLawComponent",
    "SineComponent",
    "component_signal",
    "generate",
    "load_trace",
    "resample",
    "sample_count",
    "save_trace",
    "trace_to_csv",
]
