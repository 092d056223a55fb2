"""scikit-learn style estimators wrapping the least-squares engine.

Each estimator takes the abscissa as ``X`` (1-D, or a single-column 2-D
array) and the measured values as ``y``. After ``fit`` the best-fit vector is
in ``params_``, its standard errors in ``stderr_`` and the full
:class:`~donorspec.fitting.lm.FitResult` in ``result_``.
"""

from __future__ import annotations

import numpy as np
from scipy.ndimage import uniform_filter1d
from scipy.signal import find_peaks, peak_widths
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_is_fitted

from .._validation import as_1d, check_xy
from ..exceptions import DegenerateDataError, FewerMaximaError, InvalidParameterError
from ..lineshape import GAUSS_FWHM, LorentzianComb, VoigtParams, voigt_fwhm, voigt_profile
from ..dynamics.relaxation import t1_law
from .lm import CONVERGED, NON_DECAYING, SINGULAR, FitResult, lm_minimize


class _LeastSquaresRegressor(RegressorMixin, BaseEstimator):
    """Shared fit/predict plumbing; subclasses provide the model, the
    initial guess and the bounds."""

    def _model(self, theta, x):
        raise NotImplementedError

    def _init(self, x, y):
        """Return (x0, lower, upper, names)."""
        raise NotImplementedError

    def _residual(self, theta, x, y):
        return self._model(theta, x) - y

    def _min_samples(self):
        return 2

    def _free(self, n):
        return np.ones(n, bool)

    def fit(self, X, y):
        x, y = check_xy(X, y, self._min_samples())
        x0, lo, hi, names = self._init(x, y)
        if x.size <= len(x0):
            raise DegenerateDataError(
                f"{x.size} samples cannot constrain {len(x0)} parameters"
            )
        result = lm_minimize(
            lambda t: self._residual(t, x, y), x0, bounds=(lo, hi),
            free=self._free(len(x0)), tol=self.tol, max_iter=self.max_iter, names=names,
        )
        self.result_ = self._postprocess(result, x, y)
        self.params_ = self.result_.params
        self.stderr_ = self.result_.stderr
        self.n_features_in_ = 1
        return self

    def _postprocess(self, result, x, y):
        return result

    def predict(self, X):
        check_is_fitted(self, "params_")
        return self._model(self.params_, as_1d(X, "X"))

    @property
    def converged_(self):
        check_is_fitted(self, "result_")
        return self.result_.status == CONVERGED


def estimate_noise(y) -> float:
    """Robust white-noise level from the MAD of first differences."""
    d = np.diff(np.asarray(y, dtype=float))
    return float(1.4826 * np.median(np.abs(d - np.median(d))) / np.sqrt(2.0))


class VoigtPeaks(_LeastSquaresRegressor):
    """Sum of ``n_peaks`` area-normalized Voigt lines, optionally on a
    constant baseline.

    Initial centers are the ``n_peaks`` most prominent local maxima; peaks
    are reported sorted by center.
    """

    def __init__(self, n_peaks=1, fit_baseline=False, tol=1e-12, max_iter=500):
        self.n_peaks = n_peaks
        self.fit_baseline = fit_baseline
        self.tol = tol
        self.max_iter = max_iter

    def _model(self, theta, x):
        y = np.full_like(x, theta[-1] if self.fit_baseline else 0.0)
        for k in range(self.n_peaks):
            c, s, g, a = theta[4 * k:4 * k + 4]
            y = y + a * voigt_profile(x, c, s, g)
        return y

    def _init(self, x, y):
        if self.n_peaks < 1:
            raise InvalidParameterError("n_peaks must be >= 1")
        base = float(np.percentile(y, 5)) if self.fit_baseline else 0.0
        yy = y - base
        noise = estimate_noise(yy)
        prominence = max(0.1 * float(np.ptp(yy)), 6.0 * noise)
        peaks, props = find_peaks(yy, prominence=prominence)
        if peaks.size < self.n_peaks:
            raise FewerMaximaError(
                f"found {peaks.size} local maxima, {self.n_peaks} peaks requested"
            )
        order = np.argsort(props["prominences"])[::-1][:self.n_peaks]
        peaks = np.sort(peaks[order])
        widths = peak_widths(yy, peaks, rel_height=0.5)[0]
        step = float(np.mean(np.diff(x)))
        span = float(x[-1] - x[0])
        x0, lo, hi, names = [], [], [], []
        for k, (i, w) in enumerate(zip(peaks, widths)):
            fwhm = max(w * step, 2 * step)
            x0 += [x[i], 0.5 * fwhm / GAUSS_FWHM, 0.25 * fwhm, yy[i] * fwhm * 1.2]
            lo += [x[0], 1e-9 * span, 1e-9 * span, 0.0]
            hi += [x[-1], span, span, np.inf]
            names += [f"center_{k}", f"sigma_{k}", f"gamma_L_{k}", f"amplitude_{k}"]
        if self.fit_baseline:
            x0.append(base)
            lo.append(-np.inf)
            hi.append(np.inf)
            names.append("baseline")
        return np.array(x0), np.array(lo), np.array(hi), names

    @property
    def peaks_(self) -> list[VoigtParams]:
        check_is_fitted(self, "params_")
        t = self.params_
        return [VoigtParams(*t[4 * k:4 * k + 4]) for k in range(self.n_peaks)]

    @property
    def fwhm_(self) -> list[float]:
        return [voigt_fwhm(p.sigma, p.gamma_L) for p in self.peaks_]


class LorentzianCombDips(_LeastSquaresRegressor):
    """Constant baseline minus ``n_dips`` equally spaced Lorentzian dips with
    one shared FWHM and individual depths.

    Parameters are ``(center, spacing, width, baseline, depth_0..)`` where
    ``center`` is the comb midpoint. The center starts at the leftmost
    minimum of the spectrum smoothed by a moving average ``spacing_init / 4``
    wide.
    """

    def __init__(self, n_dips=10, spacing_init=100.0, width_init=None,
                 tol=1e-12, max_iter=500):
        self.n_dips = n_dips
        self.spacing_init = spacing_init
        self.width_init = width_init
        self.tol = tol
        self.max_iter = max_iter

    def _comb(self, theta):
        center, spacing, width, baseline = theta[:4]
        return LorentzianComb.equally_spaced(
            self.n_dips, spacing, width, depth=np.maximum(theta[4:], 0.0),
            center=center, baseline=baseline)

    def _model(self, theta, x):
        return self._comb(theta)(x)

    def _free(self, n):
        free = np.ones(n, bool)
        # a single dip carries no spacing information
        free[1] = self.n_dips > 1
        return free

    def _init(self, x, y):
        if self.n_dips < 1:
            raise InvalidParameterError("n_dips must be >= 1")
        if not self.spacing_init > 0:
            raise InvalidParameterError("spacing_init must be > 0")
        sp = float(self.spacing_init)
        step = float(np.mean(np.diff(x)))
        window = max(1, int(round(0.25 * sp / step)))
        smooth = uniform_filter1d(y, window, mode="nearest")
        baseline = float(np.percentile(smooth, 95))
        center = _half_depth_midpoint(x, smooth, baseline)
        width = 0.5 * sp if self.width_init is None else float(self.width_init)
        centers = center + (np.arange(self.n_dips) - 0.5 * (self.n_dips - 1)) * sp
        depths = np.clip(baseline - np.interp(centers, x, smooth), 0.0, None)
        if self.n_dips > 1:
            # overlapping dips all contribute to each minimum
            depths = depths / max(1.0, 1.0 + 2.0 * (width / sp) ** 2)
        span = float(x[-1] - x[0])
        x0 = np.concatenate(([center, sp, width, baseline], depths))
        lo = np.concatenate(([x[0], 0.5 * sp, 1e-3 * sp, -np.inf],
                             np.zeros(self.n_dips)))
        hi = np.concatenate(([x[-1], 1.5 * sp, span, np.inf],
                             np.full(self.n_dips, np.inf)))
        names = ["center", "spacing", "width", "baseline"] + [
            f"depth_{k}" for k in range(self.n_dips)]
        return x0, lo, hi, names

    @property
    def comb_(self) -> LorentzianComb:
        check_is_fitted(self, "params_")
        return self._comb(self.params_)


def _half_depth_midpoint(x, smooth, baseline):
    """Midpoint between the outermost samples below half depth, measured
    from the leftmost minimum of ``smooth``. On a flat-bottomed comb the
    minimum alone lands anywhere on the plateau."""
    i = int(np.argmin(smooth))
    below = np.flatnonzero(smooth < 0.5 * (baseline + smooth[i]))
    if below.size == 0:
        return float(x[i])
    return float(0.5 * (x[below[0]] + x[below[-1]]))


class ExponentialDecay(_LeastSquaresRegressor):
    """offset + amplitude * exp(-t / T1), parameters ``(T1, amplitude,
    offset)``. Data without a resolvable decay end with status
    ``"non-decaying"``."""

    def __init__(self, tol=1e-12, max_iter=500):
        self.tol = tol
        self.max_iter = max_iter

    def _min_samples(self):
        return 4

    def _model(self, theta, t):
        T1, amp, off = theta
        return off + amp * np.exp(-t / T1)

    def _init(self, t, y):
        if np.any(t < 0) or np.any(np.diff(t) <= 0):
            raise InvalidParameterError("t must be non-negative and increasing")
        span = float(t[-1] - t[0])
        tail = max(1, t.size // 10)
        off = float(np.mean(y[-tail:]))
        amp = float(y[0] - off)
        T1 = span / 3.0
        if amp != 0:
            below = np.flatnonzero(np.abs(y - off) <= abs(amp) / np.e)
            if below.size and t[below[0]] > t[0]:
                T1 = float(t[below[0]] - t[0])
        lo = np.array([1e-9 * span, -np.inf, -np.inf])
        hi = np.array([1e3 * span, np.inf, np.inf])
        return np.array([T1, amp, off]), lo, hi, ["T1", "amplitude", "offset"]

    def _postprocess(self, result, t, y):
        T1, amp, _ = result.params
        upper = 1e3 * float(t[-1] - t[0])
        scale = max(float(np.max(np.abs(y))), 1e-300)
        if (result.status == SINGULAR or T1 >= upper * (1 - 1e-9)
                or abs(amp) <= 1e-12 * scale):
            result.status = NON_DECAYING
        return result


class T1FieldLaw(_LeastSquaresRegressor):
    """One-parameter fit of T1(B) = tanh(gamma/2) / (a B^5) at fixed g_e
    and temperature ``T``. Residuals are taken in log space, which matches
    multiplicative scatter over the decades T1 spans."""

    def __init__(self, T=1.5, g_e=1.95, tol=1e-14, max_iter=200):
        self.T = T
        self.g_e = g_e
        self.tol = tol
        self.max_iter = max_iter

    def _min_samples(self):
        return 3

    def _model(self, theta, B):
        return t1_law(theta[0], self.g_e, B, self.T)

    def _residual(self, theta, B, T1):
        return np.log(self._model(theta, B)) - np.log(T1)

    def _init(self, B, T1):
        if np.any(B <= 0):
            raise InvalidParameterError("all B must be > 0")
        if np.any(T1 <= 0):
            raise InvalidParameterError("all T1 must be > 0")
        if not self.T > 0:
            raise InvalidParameterError("T must be > 0")
        a0 = float(t1_law(1.0, self.g_e, B[0], self.T) / T1[0])
        return np.array([a0]), np.array([1e-12 * a0]), np.array([np.inf]), ["a"]


class LinearFit(RegressorMixin, BaseEstimator):
    """Ordinary least squares y = slope * x (+ intercept), solved in closed
    form. ``fit_intercept=False`` pins the line to the origin."""

    def __init__(self, fit_intercept=True):
        self.fit_intercept = fit_intercept

    def fit(self, X, y):
        x, y = check_xy(X, y, 2)
        if np.ptp(x) == 0 and (self.fit_intercept or x[0] == 0):
            raise DegenerateDataError("all x values are equal")
        if self.fit_intercept:
            A = np.column_stack([x, np.ones_like(x)])
            names = ("slope", "intercept")
        else:
            A = x[:, None]
            names = ("slope",)
        coef, *_ = np.linalg.lstsq(A, y, rcond=None)
        resid = y - A @ coef
        ssr = float(resid @ resid)
        dof = x.size - A.shape[1]
        cov = np.linalg.inv(A.T @ A) * (ssr / dof if dof > 0 else np.inf)
        stderr = np.sqrt(np.clip(np.diag(cov), 0.0, None))
        if not self.fit_intercept:
            coef = np.append(coef, 0.0)
            stderr = np.append(stderr, 0.0)
            names = ("slope", "intercept")
        self.coef_ = float(coef[0])
        self.intercept_ = float(coef[1])
        self.params_ = coef
        self.stderr_ = stderr
        self.result_ = FitResult(params=coef, stderr=stderr, residual_norm=ssr,
                                 status=CONVERGED, n_iter=1, names=names,
                                 covariance=cov, history=[ssr], n_data=x.size)
        self.n_features_in_ = 1
        return self

    def predict(self, X):
        check_is_fitted(self, "coef_")
        return self.coef_ * as_1d(X, "X") + self.intercept_
