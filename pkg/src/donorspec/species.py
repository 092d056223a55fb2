"""Donor species parameters and the species registry.

The registry ships values for In, Ga and Al substitutional donors in ZnO. It
can be extended or overridden from an INI-style file with one section per
species::

    [In]
    g_e = 1.95
    g_h_perp = 0.12
    A_hf_MHz = 100
    I_nuc = 4.5
    E0_eV = 3.3567
    tau_rad_ps = 1350
    a_prefactor = 0.02
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field, replace
from fractions import Fraction
from pathlib import Path
from types import MappingProxyType
from typing import Mapping

from .exceptions import InvalidParameterError, UnknownSpeciesError

_ALLOWED_SPINS = (0.5, 1.5, 2.5, 3.5, 4.5)


@dataclass(frozen=True)
class DonorSpecies:
    """Per-donor physical parameters.

    ``A_hf`` is the hyperfine constant in MHz, defined as the spacing between
    adjacent two-photon (CPT) resonances; the sublevel spacing inside one
    electron branch is ``A_hf / 2``. ``a_prefactor`` is the spontaneous
    spin-flip prefactor in 1/(s T^5).
    """

    name: str
    g_e: float
    g_h_perp: float
    A_hf: float
    I_nuc: float
    E0: float
    tau_rad: float
    a_prefactor: float
    meta: Mapping[str, str] = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if float(self.I_nuc) not in _ALLOWED_SPINS:
            raise InvalidParameterError(
                f"I_nuc must be one of {_ALLOWED_SPINS}, got {self.I_nuc}"
            )
        if not self.g_e > 0:
            raise InvalidParameterError("g_e must be positive")
        if not self.tau_rad > 0:
            raise InvalidParameterError("tau_rad must be positive")
        if self.a_prefactor < 0:
            raise InvalidParameterError("a_prefactor must be >= 0")
        if self.A_hf < 0:
            raise InvalidParameterError("A_hf must be >= 0")
        object.__setattr__(self, "meta", MappingProxyType(dict(self.meta)))

    @property
    def n_nuclear(self) -> int:
        """Number of nuclear sublevels, 2I + 1."""
        return int(Fraction(self.I_nuc).limit_denominator(2) * 2) + 1

    def with_(self, **changes) -> "DonorSpecies":
        return replace(self, **changes)


# E0 values are the literature I9/I8/I6 line positions read off spectra, not
# tabulated; treat them as approximate.
_BUILTIN = {
    "In": DonorSpecies(
        name="In", g_e=1.95, g_h_perp=0.12, A_hf=100.0, I_nuc=4.5,
        E0=3.3567, tau_rad=1350e-12, a_prefactor=0.02,
        meta={"g_h_perp": "lower bound", "E0": "approximate"},
    ),
    "Ga": DonorSpecies(
        name="Ga", g_e=1.95, g_h_perp=0.12, A_hf=0.0, I_nuc=1.5,
        E0=3.3598, tau_rad=1350e-12, a_prefactor=0.08,
        meta={"g_h_perp": "lower bound", "E0": "approximate",
              "A_hf": "not characterized", "tau_rad": "placeholder"},
    ),
    "Al": DonorSpecies(
        name="Al", g_e=1.95, g_h_perp=0.12, A_hf=1.5, I_nuc=2.5,
        E0=3.3608, tau_rad=1350e-12, a_prefactor=0.08,
        meta={"g_h_perp": "lower bound", "E0": "approximate",
              "tau_rad": "placeholder", "a_prefactor": "placeholder"},
    ),
}

_FILE_KEYS = {
    "g_e": ("g_e", 1.0),
    "g_h_perp": ("g_h_perp", 1.0),
    "A_hf_MHz": ("A_hf", 1.0),
    "I_nuc": ("I_nuc", 1.0),
    "E0_eV": ("E0", 1.0),
    "tau_rad_ps": ("tau_rad", 1e-12),
    "a_prefactor": ("a_prefactor", 1.0),
}


class SpeciesRegistry:
    """Name -> :class:`DonorSpecies` lookup, seeded with the built-ins."""

    def __init__(self, species=None):
        self._species = dict(_BUILTIN if species is None else species)

    def __getitem__(self, name: str) -> DonorSpecies:
        try:
            return self._species[name]
        except KeyError:
            raise UnknownSpeciesError(
                f"unknown species {name!r}; known: {sorted(self._species)}"
            ) from None

    def __contains__(self, name) -> bool:
        return name in self._species

    def __iter__(self):
        return iter(sorted(self._species))

    def names(self) -> list[str]:
        return sorted(self._species)

    def register(self, species: DonorSpecies) -> None:
        self._species[species.name] = species

    def load(self, path) -> "SpeciesRegistry":
        """Read species sections from ``path``; existing entries are
        overridden key by key, unknown species must define every key."""
        parser = configparser.ConfigParser()
        parser.optionxform = str
        with open(path) as fh:
            parser.read_file(fh)
        for section in parser.sections():
            values = parser[section]
            name = values.get("name", section)
            unknown = set(values) - set(_FILE_KEYS) - {"name"}
            if unknown:
                raise InvalidParameterError(
                    f"{path}: [{section}] unknown keys {sorted(unknown)}"
                )
            kwargs = {}
            for key, (attr, scale) in _FILE_KEYS.items():
                if key in values:
                    try:
                        kwargs[attr] = float(values[key]) * scale
                    except ValueError:
                        raise InvalidParameterError(
                            f"{path}: [{section}] {key} is not a number"
                        ) from None
            if name in self._species:
                self._species[name] = replace(self._species[name], **kwargs)
            else:
                missing = [k for k, (a, _) in _FILE_KEYS.items() if a not in kwargs]
                if missing:
                    raise InvalidParameterError(
                        f"{path}: [{section}] missing keys {missing}"
                    )
                self._species[name] = DonorSpecies(name=name, **kwargs)
        return self


def default_registry(config_path: str | Path | None = None) -> SpeciesRegistry:
    registry = SpeciesRegistry()
    if config_path is not None:
        registry.load(config_path)
    return registry


def get_species(name: str) -> DonorSpecies:
    return SpeciesRegistry()[name]
