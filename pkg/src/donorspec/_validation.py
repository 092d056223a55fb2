"""Input validation shared by models, estimators and the pipeline."""

import numpy as np
from sklearn.utils.validation import column_or_1d

from .exceptions import InvalidParameterError


def as_1d(x, name="x", dtype=np.float64):
    arr = column_or_1d(np.asarray(x, dtype=dtype), warn=False)
    if not np.all(np.isfinite(arr)):
        raise InvalidParameterError(f"{name} contains non-finite values")
    return arr


def check_xy(x, y, min_samples=2):
    x = as_1d(x, "x")
    y = as_1d(y, "y")
    if x.shape != y.shape:
        raise InvalidParameterError(
            f"x and y lengths differ: {x.size} != {y.size}"
        )
    if x.size < min_samples:
        raise InvalidParameterError(
            f"need at least {min_samples} samples, got {x.size}"
        )
    return x, y


def check_window(window, name="window"):
    lo, hi = (float(v) for v in window)
    if not lo < hi:
        raise InvalidParameterError(f"{name} needs lo < hi, got [{lo}, {hi}]")
    return lo, hi


def check_nonnegative(value, name):
    if not value >= 0:
        raise InvalidParameterError(f"{name} must be >= 0, got {value}")
    return float(value)


def check_positive(value, name):
    if not value > 0:
        raise InvalidParameterError(f"{name} must be > 0, got {value}")
    return float(value)
