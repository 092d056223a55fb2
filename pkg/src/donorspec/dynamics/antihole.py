"""Static ensemble model of the two-laser antihole (reverse hole burning)."""

from __future__ import annotations

import numpy as np
from scipy.integrate import quad_vec

from .._validation import as_1d
from ..exceptions import InvalidParameterError
from ..levels import hyperfine_ladder
from ..lineshape import gaussian, lorentzian
from ..species import DonorSpecies
from ..spectrum import Spectrum


def antihole_integrand(delta, scan, pump, sigma_MHz, fwhm_MHz, offsets):
    """G(delta) * L(delta - pump) * mean_k L(delta - scan - c_k)."""
    comb = np.zeros_like(scan)
    for c in offsets:
        comb = comb + lorentzian(delta - scan - c, 0.0, fwhm_MHz)
    comb /= len(offsets)
    return gaussian(delta, 0.0, sigma_MHz) * lorentzian(delta, pump, fwhm_MHz) * comb


def antihole_spectrum(species: DonorSpecies, sigma_GHz, homogeneous_fwhm_MHz,
                      pump_detuning_MHz, scan_detunings_MHz,
                      epsrel=1e-9) -> Spectrum:
    """Antihole signal vs scan detuning (MHz).

    The subensemble at optical detuning delta is weighted by the
    inhomogeneous Gaussian, selected by the homogeneous Lorentzian of the
    pump, and read out through the homogeneous line replicated on every
    hyperfine sublevel of one electron branch. Detunings are measured from
    the center of the inhomogeneous line.
    """
    if not sigma_GHz > 0:
        raise InvalidParameterError("inhomogeneous sigma must be > 0")
    if not homogeneous_fwhm_MHz > 0:
        raise InvalidParameterError("homogeneous FWHM must be > 0")
    sigma = 1e3 * float(sigma_GHz)
    w = float(homogeneous_fwhm_MHz)
    pump = float(pump_detuning_MHz)
    scan = as_1d(scan_detunings_MHz, "scan_detunings_MHz")
    _, offsets = hyperfine_ladder(species)

    # tails of the Lorentzian product fall as 1/x^4: 1e3 widths leave ~1e-9
    reach = 1e3 * w
    lo = max(min(pump, scan[0] + offsets[0]) - reach, -12 * sigma)
    hi = min(max(pump, scan[-1] + offsets[-1]) + reach, 12 * sigma)
    if not lo < hi:
        return Spectrum(scan, np.zeros_like(scan), "MHz", {"kind": "antihole"})
    breaks = sorted({p for p in (pump, 0.0) if lo < p < hi})
    value, _ = quad_vec(
        antihole_integrand, lo, hi,
        args=(scan, pump, sigma, w, offsets),
        epsrel=epsrel, epsabs=0.0, norm="max", points=breaks or None,
        limit=20000,
    )
    return Spectrum(scan, value, "MHz", {
        "kind": "antihole", "species": species.name,
        "sigma_GHz": repr(float(sigma_GHz)),
        "homogeneous_fwhm_MHz": repr(w),
    })
