"""Voigt peaks, Lorentzian dip combs and band integrals."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq
from scipy.special import wofz

from ._validation import as_1d, check_nonnegative, check_positive, check_window
from .exceptions import EmptyOverlapError, InvalidParameterError
from .spectrum import Spectrum

_SQRT2 = math.sqrt(2.0)
_SQRT2PI = math.sqrt(2.0 * math.pi)
GAUSS_FWHM = 2.0 * math.sqrt(2.0 * math.log(2.0))


@dataclass(frozen=True)
class VoigtParams:
    """Area-normalized Voigt line: ``sigma`` is the Gaussian standard
    deviation, ``gamma_L`` the Lorentzian HWHM, ``amplitude`` the area."""

    center: float
    sigma: float
    gamma_L: float
    amplitude: float = 1.0

    def __post_init__(self):
        _check_widths(self.sigma, self.gamma_L)

    @property
    def fwhm(self) -> float:
        return voigt_fwhm(self.sigma, self.gamma_L)


def _check_widths(sigma, gamma_L):
    check_nonnegative(sigma, "sigma")
    check_nonnegative(gamma_L, "gamma_L")
    if sigma == 0 and gamma_L == 0:
        raise InvalidParameterError("sigma and gamma_L cannot both be zero")


def voigt_profile(x, center, sigma, gamma_L):
    """Unit-area Voigt profile, vectorized over ``x``.

    Evaluated as Re[w(z)] / (sigma sqrt(2 pi)) with the Faddeeva function w;
    the pure-Lorentzian limit is handled in closed form.
    """
    _check_widths(sigma, gamma_L)
    x = np.asarray(x, dtype=np.float64)
    dx = x - center
    if sigma == 0:
        return gamma_L / (math.pi * (dx * dx + gamma_L * gamma_L))
    z = (dx + 1j * gamma_L) / (sigma * _SQRT2)
    return wofz(z).real / (sigma * _SQRT2PI)


def voigt_value(p: VoigtParams, x):
    return p.amplitude * voigt_profile(x, p.center, p.sigma, p.gamma_L)


def lorentzian(x, center, fwhm):
    """Unit-area Lorentzian with full width ``fwhm``."""
    hw = 0.5 * fwhm
    dx = np.asarray(x, dtype=np.float64) - center
    return hw / (math.pi * (dx * dx + hw * hw))


def gaussian(x, center, sigma):
    dx = np.asarray(x, dtype=np.float64) - center
    return np.exp(-0.5 * (dx / sigma) ** 2) / (sigma * _SQRT2PI)


def olivero_fwhm(sigma, gamma_L):
    fl = 2.0 * gamma_L
    fg = GAUSS_FWHM * sigma
    return 0.5346 * fl + math.sqrt(0.2166 * fl * fl + fg * fg)


def voigt_fwhm(sigma, gamma_L, rtol=1e-12):
    """FWHM of the Voigt profile.

    The Olivero-Longbothum approximation (good to ~0.02 %) only brackets the
    root; the returned width solves profile(hw) = profile(0) / 2 exactly.
    """
    _check_widths(sigma, gamma_L)
    if sigma == 0:
        return 2.0 * gamma_L
    if gamma_L == 0:
        return GAUSS_FWHM * sigma
    seed = 0.5 * olivero_fwhm(sigma, gamma_L)
    half = 0.5 * voigt_profile(0.0, 0.0, sigma, gamma_L)

    def f(hw):
        return voigt_profile(hw, 0.0, sigma, gamma_L) - half

    lo, hi = 0.99 * seed, 1.01 * seed
    while f(lo) < 0:
        lo *= 0.5
    while f(hi) > 0:
        hi *= 2.0
    return 2.0 * brentq(f, lo, hi, xtol=1e-300, rtol=max(rtol, 4e-16))


class LorentzianComb:
    """Baseline minus a sum of Lorentzian dips of common FWHM.

    Each dip has unit peak height scaled by its depth, so a single dip of
    depth equal to the baseline touches zero at its center.
    """

    def __init__(self, centers, width, depths, baseline=1.0):
        centers = np.atleast_1d(np.asarray(centers, dtype=np.float64))
        depths = np.atleast_1d(np.asarray(depths, dtype=np.float64))
        if centers.shape != depths.shape:
            raise InvalidParameterError(
                f"{centers.size} centers but {depths.size} depths"
            )
        if np.any(depths < 0):
            raise InvalidParameterError("dip depths must be >= 0")
        self.centers = centers
        self.depths = depths
        self.width = check_positive(width, "width")
        self.baseline = float(baseline)

    @classmethod
    def equally_spaced(cls, n_dips, spacing, width, depth=1.0, center=0.0,
                       baseline=1.0):
        offsets = (np.arange(n_dips) - 0.5 * (n_dips - 1)) * spacing
        depths = np.broadcast_to(np.asarray(depth, dtype=float), (n_dips,))
        return cls(center + offsets, width, depths, baseline)

    def __call__(self, x):
        x = np.asarray(x, dtype=np.float64)
        hw2 = (0.5 * self.width) ** 2
        dx = x[..., None] - self.centers
        return self.baseline - (self.depths * hw2 / (dx * dx + hw2)).sum(axis=-1)

    def spectrum(self, axis, unit="MHz", **meta) -> Spectrum:
        return Spectrum(axis, self(axis), unit, meta)


def lorentzian_comb(centers, width, depths, baseline=1.0) -> LorentzianComb:
    return LorentzianComb(centers, width, depths, baseline)


def synthesize_spectrum(lines, axis, noise_sigma=0.0, seed=None, unit="GHz",
                        **meta) -> Spectrum:
    """Sum of Voigt lines on ``axis`` plus additive Gaussian noise."""
    lines = list(lines)
    if not lines:
        raise InvalidParameterError("at least one line is required")
    check_nonnegative(noise_sigma, "noise_sigma")
    axis = as_1d(axis, "axis")
    y = np.zeros_like(axis)
    for line in lines:
        y = y + voigt_value(line, axis)
    if noise_sigma > 0:
        rng = np.random.default_rng(seed)
        y = y + rng.normal(0.0, noise_sigma, size=axis.shape)
    return Spectrum(axis, y, unit, meta)


def integrate_band(s: Spectrum, window) -> float:
    """Trapezoidal integral of ``s`` over ``window``, clipped to the axis.

    Window edges falling between samples are linearly interpolated so that a
    constant spectrum integrates to value times window length.
    """
    lo, hi = check_window(window)
    lo = max(lo, s.axis[0])
    hi = min(hi, s.axis[-1])
    if not lo < hi:
        raise EmptyOverlapError(
            f"window {tuple(window)} does not overlap axis "
            f"[{s.axis[0]}, {s.axis[-1]}]"
        )
    inside = (s.axis > lo) & (s.axis < hi)
    x = np.concatenate(([lo], s.axis[inside], [hi]))
    y = np.interp(x, s.axis, s.intensity)
    return float(np.trapezoid(y, x))


def measure_fwhm(s: Spectrum, dip=False, baseline=None) -> float:
    """Full width at half height of the dominant peak (or dip) of ``s``,
    with linear interpolation between samples.

    For dips, half height is taken between ``baseline`` (default: the larger
    of the two edge values) and the minimum.
    """
    y = np.asarray(s.intensity)
    x = s.axis
    if dip:
        ref = max(y[0], y[-1]) if baseline is None else baseline
        y = ref - y
    else:
        ref = 0.0 if baseline is None else baseline
        y = y - ref
    i = int(np.argmax(y))
    half = 0.5 * y[i]
    left = i
    while left > 0 and y[left] > half:
        left -= 1
    right = i
    while right < y.size - 1 and y[right] > half:
        right += 1
    if y[left] > half or y[right] > half:
        raise EmptyOverlapError("profile does not fall to half height inside the axis")
    xl = np.interp(half, [y[left], y[left + 1]], [x[left], x[left + 1]])
    xr = np.interp(half, [y[right], y[right - 1]], [x[right], x[right - 1]])
    return float(xr - xl)


def count_local_minima(y) -> int:
    y = np.asarray(y)
    return int(np.sum((y[1:-1] < y[:-2]) & (y[1:-1] < y[2:])))
