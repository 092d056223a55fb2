"""Phonon-limited spin-lattice relaxation of the donor electron."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .._validation import as_1d
from ..exceptions import DegenerateFieldError, InvalidParameterError
from ..levels import FieldConfig, thermal_gamma, thermal_polarization
from ..species import DonorSpecies


@dataclass(frozen=True)
class RelaxationModel:
    species: DonorSpecies

    @property
    def a(self) -> float:
        return self.species.a_prefactor

    @property
    def g_e(self) -> float:
        return self.species.g_e


def spin_flip_rate(model: RelaxationModel, B):
    """Downward spin-flip rate a * B^5 in 1/s."""
    B = np.asarray(B, dtype=np.float64)
    if np.any(B < 0):
        raise InvalidParameterError("B must be >= 0")
    return model.a * B**5


def t1_law(a, g_e, B, T):
    """tanh(gamma/2) / (a B^5) with gamma = g_e mu_B B / (k_B T).

    Equivalent to 1/(Gamma_down + Gamma_up) with detailed balance; no input
    checks, shared by :func:`t1` and the field-dependence fit.
    """
    gamma = thermal_gamma(g_e, B, T)
    return np.tanh(0.5 * gamma) / (a * np.power(B, 5))


def t1(model: RelaxationModel, B, T):
    """Longitudinal relaxation time (s) at field ``B`` (T) and temperature
    ``T`` (K). Scalar in, float out; arrays are broadcast."""
    B_arr = np.asarray(B, dtype=np.float64)
    if np.any(B_arr <= 0):
        raise DegenerateFieldError("T1 diverges at B = 0")
    if np.any(np.asarray(T) <= 0):
        raise InvalidParameterError("T must be > 0")
    if model.a <= 0:
        raise InvalidParameterError("a_prefactor must be > 0 for a finite T1")
    out = t1_law(model.a, model.g_e, B_arr, np.asarray(T, dtype=np.float64))
    return float(out) if out.ndim == 0 else out


def recovery_curve(model: RelaxationModel, field: FieldConfig, p0, times):
    """Lower-state population p(t) = p_eq + (p0 - p_eq) exp(-t / T1)."""
    if not 0 <= p0 <= 1:
        raise InvalidParameterError("p0 must lie in [0, 1]")
    times = as_1d(times, "times")
    if np.any(times < 0):
        raise InvalidParameterError("times must be >= 0")
    tau = t1(model, field.B, field.T_sample)
    p_eq, _ = thermal_polarization(model.species, field)
    # weighted form keeps p(0) == p0 exactly
    x = -times / tau
    return p0 * np.exp(x) - p_eq * np.expm1(x)
