"""Functional entry points mirroring the estimators."""

from __future__ import annotations

from ..spectrum import Spectrum
from .estimators import (
    ExponentialDecay,
    LinearFit,
    LorentzianCombDips,
    T1FieldLaw,
    VoigtPeaks,
)
from .lm import FitResult


def fit_voigt(s: Spectrum, n_peaks=1, fit_baseline=False):
    """Returns (peaks, fwhms, FitResult)."""
    est = VoigtPeaks(n_peaks=n_peaks, fit_baseline=fit_baseline).fit(s.axis, s.intensity)
    return est.peaks_, est.fwhm_, est.result_


def fit_cpt_comb(s: Spectrum, n_dips=10, spacing_init=100.0, width_init=None) -> FitResult:
    est = LorentzianCombDips(n_dips=n_dips, spacing_init=spacing_init,
                             width_init=width_init)
    return est.fit(s.axis, s.intensity).result_


def fit_exponential(t, y) -> FitResult:
    return ExponentialDecay().fit(t, y).result_


def fit_t1_field(B_values, T1_values, T, g_e=1.95) -> FitResult:
    return T1FieldLaw(T=T, g_e=g_e).fit(B_values, T1_values).result_


def fit_linear(x, y, through_origin=False) -> FitResult:
    return LinearFit(fit_intercept=not through_origin).fit(x, y).result_
