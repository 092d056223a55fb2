"""The Spectrum container: axis/intensity pair with unit and metadata."""

from __future__ import annotations

from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Mapping

import numpy as np

from .exceptions import InvalidParameterError, NonMonotonicAxisError


@dataclass(frozen=True, eq=False)
class Spectrum:
    axis: np.ndarray
    intensity: np.ndarray
    unit: str = "GHz"
    meta: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        axis = np.array(self.axis, dtype=np.float64)
        intensity = np.array(self.intensity, dtype=np.float64)
        if axis.ndim != 1 or intensity.ndim != 1:
            raise InvalidParameterError("axis and intensity must be 1-D")
        if axis.size != intensity.size:
            raise InvalidParameterError(
                f"axis and intensity lengths differ ({axis.size} vs {intensity.size})"
            )
        if axis.size < 2:
            raise InvalidParameterError("a spectrum needs at least 2 points")
        if not np.all(np.diff(axis) > 0):
            raise NonMonotonicAxisError("axis must be strictly increasing")
        axis.flags.writeable = False
        intensity.flags.writeable = False
        object.__setattr__(self, "axis", axis)
        object.__setattr__(self, "intensity", intensity)
        object.__setattr__(self, "meta", MappingProxyType(
            {str(k): str(v) for k, v in self.meta.items()}))

    def __len__(self):
        return self.axis.size

    def with_intensity(self, intensity, **meta) -> "Spectrum":
        merged = dict(self.meta)
        merged.update(meta)
        return Spectrum(self.axis, intensity, self.unit, merged)
