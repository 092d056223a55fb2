from .api import fit_cpt_comb, fit_exponential, fit_linear, fit_t1_field, fit_voigt
from .estimators import (
    ExponentialDecay,
    LinearFit,
    LorentzianCombDips,
    T1FieldLaw,
    VoigtPeaks,
    estimate_noise,
)
from .lm import CONVERGED, MAX_ITER, NON_DECAYING, SINGULAR, FitResult, lm_minimize

__all__ = [
    "CONVERGED", "MAX_ITER", "NON_DECAYING", "SINGULAR",
    "ExponentialDecay", "FitResult", "LinearFit", "LorentzianCombDips",
    "T1FieldLaw", "VoigtPeaks", "estimate_noise", "fit_cpt_comb",
    "fit_exponential", "fit_linear", "fit_t1_field", "fit_voigt",
    "lm_minimize",
]
