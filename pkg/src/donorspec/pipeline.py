"""Data reduction: spectrum files, background subtraction, normalization,
band ratios and run manifests.

Spectrum files are two-column delimited text (comma, tab or whitespace).
Lines starting with ``#`` are headers; ``# key=value`` headers become
metadata, ``units`` selects the axis unit::

    # units=eV
    # temperature_K=7.5
    3.3550, 120.0
    3.3551, 131.5
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import platform
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from ._validation import check_window
from .exceptions import (
    DegenerateDataError,
    EmptyOverlapError,
    InvalidParameterError,
    NonMonotonicAxisError,
    SpectrumParseError,
)
from .fitting import fit_linear
from .lineshape import integrate_band
from .spectrum import Spectrum

_SPLIT = re.compile(r"[,\t ;]+")


@dataclass(frozen=True)
class BandDefinition:
    label: str
    window: tuple

    def __post_init__(self):
        object.__setattr__(self, "window", check_window(self.window, self.label))


# Windows (eV) around the In0X, Ga0X, Al0X, Y0 and I+ lines of a zero-field PL
# overview. Positions are read off spectra and only approximate.
DEFAULT_BANDS = {
    "In0X": BandDefinition("In0X", (3.3562, 3.3572)),
    "Ga0X": BandDefinition("Ga0X", (3.3593, 3.3603)),
    "Al0X": BandDefinition("Al0X", (3.3604, 3.3613)),
    "Y0": BandDefinition("Y0", (3.3320, 3.3340)),
    "I+": BandDefinition("I+", (3.3669, 3.3677)),
}


def get_band(label_or_window) -> BandDefinition:
    if isinstance(label_or_window, BandDefinition):
        return label_or_window
    if isinstance(label_or_window, str):
        if label_or_window in DEFAULT_BANDS:
            return DEFAULT_BANDS[label_or_window]
        m = re.fullmatch(r"\s*([^=]+)=([-+0-9.eE]+):([-+0-9.eE]+)\s*", label_or_window)
        if m:
            return BandDefinition(m.group(1), (float(m.group(2)), float(m.group(3))))
        raise InvalidParameterError(
            f"unknown band {label_or_window!r}; use one of {sorted(DEFAULT_BANDS)} "
            "or LABEL=LO:HI"
        )
    lo, hi = label_or_window
    return BandDefinition(f"{lo}:{hi}", (lo, hi))


# -- file IO --------------------------------------------------------------

def parse_spectrum(text: str, path=None) -> Spectrum:
    meta = {}
    axis, intensity = [], []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if "=" in body:
                key, value = body.split("=", 1)
                meta[key.strip()] = value.strip()
            continue
        fields = [f for f in _SPLIT.split(line) if f]
        if len(fields) != 2:
            raise SpectrumParseError(
                f"expected 2 columns, found {len(fields)}", path, lineno)
        try:
            a, b = float(fields[0]), float(fields[1])
        except ValueError:
            raise SpectrumParseError(f"not a number: {line!r}", path, lineno) from None
        if not (np.isfinite(a) and np.isfinite(b)):
            raise SpectrumParseError("non-finite value", path, lineno)
        if axis and a <= axis[-1]:
            raise NonMonotonicAxisError(
                "axis must be strictly increasing", path, lineno)
        axis.append(a)
        intensity.append(b)
    if len(axis) < 2:
        raise SpectrumParseError(f"need at least 2 data rows, found {len(axis)}", path)
    unit = meta.get("units", "arb")
    return Spectrum(np.array(axis), np.array(intensity), unit, meta)


def load_spectrum(path) -> Spectrum:
    path = Path(path)
    try:
        text = path.read_text()
    except (OSError, UnicodeDecodeError) as exc:
        raise SpectrumParseError(f"cannot read file: {exc}", path) from None
    return parse_spectrum(text, path)


def format_spectrum(s: Spectrum) -> str:
    """Text form read back by :func:`parse_spectrum`; ``%.17g`` makes the
    round trip exact."""
    meta = dict(s.meta)
    meta["units"] = s.unit
    out = io.StringIO()
    for key in sorted(meta):
        value = str(meta[key])
        if "\n" in value or "=" in key:
            raise InvalidParameterError(f"metadata {key!r} cannot be serialized")
        out.write(f"# {key}={value}\n")
    for a, b in zip(s.axis, s.intensity):
        out.write(f"{a:.17g}\t{b:.17g}\n")
    return out.getvalue()


def save_spectrum(s: Spectrum, path) -> Path:
    path = Path(path)
    path.write_text(format_spectrum(s))
    return path


def load_xy(path):
    """Two-column file as plain arrays (time series, field sweeps)."""
    s = load_spectrum(path)
    return s.axis, s.intensity, dict(s.meta)


def load_fluence_table(path=None) -> list[dict]:
    """Implantation fluence table; ``/`` entries (not measured) become None."""
    if path is None:
        path = Path(__file__).with_name("data") / "fluences.csv"
    rows = []
    with open(path, newline="") as fh:
        lines = [ln for ln in fh if not ln.lstrip().startswith("#")]
    for row in csv.DictReader(lines):
        rows.append({
            "region": int(row["region"]),
            "nominal_cm2": float(row["nominal_cm2"]),
            "measured_cm2": None if row["measured_cm2"].strip() == "/"
            else float(row["measured_cm2"]),
        })
    return rows


# -- reduction ------------------------------------------------------------

def _baseline_mask(s: Spectrum, edge_windows):
    mask = np.zeros(len(s), bool)
    for w in edge_windows:
        lo, hi = check_window(w, "edge window")
        mask |= (s.axis >= lo) & (s.axis <= hi)
    return mask


def _edge_line(s: Spectrum, edge_windows):
    mask = _baseline_mask(s, edge_windows)
    if mask.sum() < 2:
        raise DegenerateDataError(
            f"edge windows hold {int(mask.sum())} points, need at least 2")
    x = s.axis[mask]
    # centering keeps the normal equations well conditioned on eV axes
    x0 = float(np.mean(x))
    slope, icpt = np.polyfit(x - x0, s.intensity[mask], 1)
    return float(slope), float(icpt), x0


def fit_linear_background(s: Spectrum, edge_windows):
    """(slope, intercept) of the straight line through the edge windows."""
    slope, icpt, x0 = _edge_line(s, edge_windows)
    return slope, icpt - slope * x0


def subtract_background(s: Spectrum, edge_windows) -> Spectrum:
    """Remove a least-squares straight line fitted over ``edge_windows``."""
    slope, icpt, x0 = _edge_line(s, edge_windows)
    return s.with_intensity(s.intensity - (slope * (s.axis - x0) + icpt))


def normalize_peak(s: Spectrum) -> Spectrum:
    peak = float(np.max(s.intensity))
    if not peak > 0:
        raise InvalidParameterError("spectrum maximum must be > 0 to normalize")
    return s.with_intensity(s.intensity / peak)


def band_ratio(s: Spectrum, num, den) -> float:
    """Ratio of integrated intensities, e.g. In0X over Ga0X (R_InGa)."""
    num, den = get_band(num), get_band(den)
    top = integrate_band(s, num.window)
    bottom = integrate_band(s, den.window)
    if bottom == 0:
        raise DegenerateDataError(f"{den.label} band integrates to zero")
    if bottom < 0:
        raise DegenerateDataError(f"{den.label} band integral is negative")
    return top / bottom


def ple_vs_ratio(pairs, cutoff=30.0):
    """Origin-pinned slope of PLE intensity against R_InGa.

    ``pairs`` holds (ple_intensity, ratio). Pairs with ratio >= ``cutoff``
    are outside the linear regime and dropped. Returns
    ``(FitResult, n_used, n_excluded)``.
    """
    arr = np.asarray(pairs, dtype=float).reshape(-1, 2)
    keep = arr[:, 1] < cutoff
    used = arr[keep]
    if used.shape[0] < 2:
        raise DegenerateDataError(
            f"{used.shape[0]} pairs below R_InGa = {cutoff}; need at least 2")
    result = fit_linear(used[:, 1], used[:, 0], through_origin=True)
    return result, int(keep.sum()), int((~keep).sum())


class BackgroundSubtractor(TransformerMixin, BaseEstimator):
    """Transformer form of :func:`subtract_background`.

    ``fit`` records the line for one reference spectrum; ``transform``
    subtracts it. ``fit_transform`` on each spectrum gives the per-spectrum
    correction used by the pipeline.
    """

    def __init__(self, edge_windows=()):
        self.edge_windows = edge_windows

    def fit(self, X, y=None):
        self.slope_, self.intercept_ = fit_linear_background(X, self.edge_windows)
        return self

    def transform(self, X):
        if not hasattr(self, "slope_"):
            from sklearn.exceptions import NotFittedError
            raise NotFittedError("BackgroundSubtractor is not fitted")
        return X.with_intensity(X.intensity - (self.slope_ * X.axis + self.intercept_))


class PeakNormalizer(TransformerMixin, BaseEstimator):
    def fit(self, X, y=None):
        return self

    def transform(self, X):
        return normalize_peak(X)


def reduce_spectrum(s: Spectrum, edge_windows=None, normalize=True) -> Spectrum:
    if edge_windows:
        s = subtract_background(s, edge_windows)
    if normalize:
        s = normalize_peak(s)
    return s


# -- outputs --------------------------------------------------------------

def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def format_table(rows, header=("label", "value", "stderr")) -> str:
    out = io.StringIO()
    out.write("\t".join(header) + "\n")
    for row in rows:
        out.write("\t".join(
            f"{v:.17g}" if isinstance(v, float) else str(v) for v in row) + "\n")
    return out.getvalue()


def versions() -> dict:
    import scipy
    import sklearn

    from . import __version__
    return {
        "donorspec": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "scikit-learn": sklearn.__version__,
    }


def build_manifest(command, config, inputs=(), outputs=()) -> dict:
    return {
        "command": command,
        "config": config,
        "inputs": {str(p): sha256_file(p) for p in sorted(map(str, inputs))},
        "outputs": {Path(p).name: sha256_file(p) for p in sorted(map(str, outputs))},
        "versions": versions(),
    }


def write_manifest(path, manifest) -> Path:
    path = Path(path)
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return path
