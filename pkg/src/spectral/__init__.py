"""Spectra and least-squares fits."""

from src.spectral.linewidth import LinewidthFit, fit_linewidth_law
from src.spectral.lorentzian import (
    LorentzPeak,
    PeakFit,
    PeakSelection,
    doublet_rejection,
    fit_lineshape,
    fit_lorentzian,
    select_peak_count,
)
from src.spectral.ramsey_fit import RamseyFit, fit_ramsey_decay
from src.spectral.spectrum import Spectrum, fft_spectrum, loglog_slope, psd

__all__ = [
    "LinewidthFit",
    "LorentzPeak",
    "PeakFit",
    "PeakSelection",
    "RamseyFit",
    "Spectrum",
    "doublet_rejection",
    "fft_spectrum",
    "fit_lineshape",
    "fit_linewidth_law",
    "fit_lorentzian",
    "fit_ramsey_decay",
    "loglog_slope",
    "psd",
    "select_peak_count",
]
