"""Magneto-optical level scheme of a donor-bound exciton.

Energies are in microelectronvolts unless the name says otherwise, transition
energies are absolute photon energies in eV, and two-photon detunings are in
MHz.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .constants import CONSTANTS
from .exceptions import (
    DegenerateFieldError,
    InvalidParameterError,
    UnsupportedGeometryError,
)
from .species import DonorSpecies


class Geometry(str, enum.Enum):
    FARADAY = "faraday"
    VOIGT = "voigt"

    @classmethod
    def parse(cls, value) -> "Geometry":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise InvalidParameterError(
                f"geometry must be 'faraday' or 'voigt', got {value!r}"
            ) from None


@dataclass(frozen=True)
class FieldConfig:
    B: float
    geometry: Geometry = Geometry.VOIGT
    T_sample: float = 2.0

    def __post_init__(self):
        object.__setattr__(self, "geometry", Geometry.parse(self.geometry))
        if not self.B >= 0:
            raise InvalidParameterError(f"B must be >= 0 T, got {self.B}")
        if not self.T_sample > 0:
            raise InvalidParameterError(
                f"T_sample must be > 0 K, got {self.T_sample}"
            )


@dataclass(frozen=True)
class Transition:
    """One optical line; ``offset_ueV`` is its exact shift from E0, kept
    separately because differences of absolute eV energies lose digits."""

    ground: str
    excited: str
    polarization: str
    energy_eV: float
    offset_ueV: float = 0.0

    @property
    def label(self) -> str:
        return f"{self.polarization}{self.ground}"


@dataclass(frozen=True)
class LevelScheme:
    """Ground electron branches with their hyperfine ladders, excited hole
    branches, and the four optical transitions between them."""

    ground: dict
    excited: dict
    transitions: tuple
    m_I: tuple

    def transition(self, label: str) -> Transition:
        for t in self.transitions:
            if t.label == label:
                return t
        raise KeyError(label)

    @property
    def span_ueV(self) -> float:
        offsets = [t.offset_ueV for t in self.transitions]
        return max(offsets) - min(offsets)


def zeeman_splitting(g, B):
    """Zeeman splitting g * mu_B * B in ueV."""
    if np.any(np.asarray(B) < 0):
        raise InvalidParameterError("B must be >= 0")
    return g * CONSTANTS.mu_B * B * 1e6


def hyperfine_ladder(species: DonorSpecies) -> tuple[np.ndarray, np.ndarray]:
    """Nuclear projections m_I = -I..I and the hyperfine offsets (MHz) of one
    electron branch: adjacent sublevels are ``A_hf / 2`` apart."""
    m_I = np.arange(species.n_nuclear) - species.I_nuc
    return m_I, 0.5 * species.A_hf * m_I


def d0x_transitions(species: DonorSpecies, field: FieldConfig) -> LevelScheme:
    """Four D0X transitions in the Voigt geometry.

    Convention: the electron branch down lies below up, heavy-hole branch
    Uparrow lies above Downarrow. V couples down -> Uparrow and up ->
    Downarrow; H couples the two remaining pairs.
    """
    if field.geometry is not Geometry.VOIGT:
        raise UnsupportedGeometryError(
            "only the Voigt geometry (B perpendicular to c) transition table "
            "is implemented"
        )
    ez = zeeman_splitting(species.g_e, field.B)
    eh = zeeman_splitting(species.g_h_perp, field.B)
    m_I, hf_MHz = hyperfine_ladder(species)
    hf_ueV = CONSTANTS.MHz_to_ueV(hf_MHz)
    # the hyperfine shift changes sign with the electron spin projection
    ground = {
        "down": -0.5 * ez - hf_ueV,
        "up": 0.5 * ez + hf_ueV,
    }
    excited = {"Down": -0.5 * eh, "Up": 0.5 * eh}
    e0 = species.E0
    pairs = (
        ("down", "Up", "V"),
        ("down", "Down", "H"),
        ("up", "Down", "V"),
        ("up", "Up", "H"),
    )
    g_center = {"down": -0.5 * ez, "up": 0.5 * ez}
    transitions = []
    for g, x, pol in pairs:
        offset = excited[x] - g_center[g]
        transitions.append(Transition(g, x, pol, e0 + offset * 1e-6, offset))
    return LevelScheme(ground=ground, excited=excited,
                       transitions=tuple(transitions), m_I=tuple(m_I))


def two_photon_resonances(species: DonorSpecies, field: FieldConfig) -> np.ndarray:
    """Raman (two-photon) resonance frequencies in MHz, one per m_I.

    Nuclear-spin-conserving transitions between the two electron branches sit
    at g_e mu_B B / h + A_hf * m_I.
    """
    if field.B <= 0:
        raise DegenerateFieldError("two-photon resonances need B > 0")
    center = CONSTANTS.ueV_to_MHz(zeeman_splitting(species.g_e, field.B))
    m_I, _ = hyperfine_ladder(species)
    return center + species.A_hf * m_I


def thermal_gamma(g_e, B, T):
    return g_e * CONSTANTS.mu_B * B / (CONSTANTS.k_B * T)


def thermal_polarization(species: DonorSpecies, field: FieldConfig) -> tuple[float, float]:
    """Boltzmann populations (p_lower, p_upper) of the electron doublet."""
    gamma = thermal_gamma(species.g_e, field.B, field.T_sample)
    x = math.exp(-gamma)
    return 1.0 / (1.0 + x), x / (1.0 + x)


def lifetime_limited_linewidth(tau_rad) -> float:
    """Transform-limited FWHM 1/(2 pi tau) in MHz for a lifetime in s."""
    if not tau_rad > 0:
        raise InvalidParameterError("tau_rad must be positive")
    return 1.0 / (2.0 * math.pi * tau_rad) * 1e-6
