"""Level schemes, spectra, spin dynamics and fits for shallow donors in ZnO."""

__version__ = "0.1.0"

from .constants import CONSTANTS, PhysicalConstants
from .levels import (
    FieldConfig,
    Geometry,
    LevelScheme,
    d0x_transitions,
    hyperfine_ladder,
    lifetime_limited_linewidth,
    thermal_polarization,
    two_photon_resonances,
    zeeman_splitting,
)
from .lineshape import (
    LorentzianComb,
    VoigtParams,
    integrate_band,
    lorentzian_comb,
    synthesize_spectrum,
    voigt_fwhm,
    voigt_value,
)
from .species import DonorSpecies, SpeciesRegistry, default_registry, get_species
from .spectrum import Spectrum

__all__ = [
    "CONSTANTS", "DonorSpecies", "FieldConfig", "Geometry", "LevelScheme",
    "LorentzianComb", "PhysicalConstants", "SpeciesRegistry", "Spectrum",
    "VoigtParams", "d0x_transitions", "default_registry", "get_species",
    "hyperfine_ladder", "integrate_band", "lifetime_limited_linewidth",
    "lorentzian_comb", "synthesize_spectrum", "thermal_polarization",
    "two_photon_resonances", "voigt_fwhm", "voigt_value", "zeeman_splitting",
]
