"""Physical constants (CODATA 2018) and the unit conversions built on them."""

from dataclasses import dataclass


@dataclass(frozen=True)
class PhysicalConstants:
    """CODATA 2018 values in eV-based units.

    ``mu_B`` in eV/T, ``k_B`` in eV/K, ``h`` in eV*s. Frequencies are
    converted with ``h`` (never hbar); the canonical spectroscopic units of
    the package are microelectronvolts and megahertz.
    """

    mu_B: float = 5.7883818060e-5
    k_B: float = 8.617333262e-5
    h: float = 4.135667696e-15

    @property
    def ueV_per_MHz(self) -> float:
        return self.h * 1e6 * 1e6

    def ueV_to_MHz(self, energy_ueV):
        return energy_ueV / self.ueV_per_MHz

    def MHz_to_ueV(self, freq_MHz):
        return freq_MHz * self.ueV_per_MHz

    def eV_to_GHz(self, energy_eV):
        return energy_eV / self.h * 1e-9


CONSTANTS = PhysicalConstants()
