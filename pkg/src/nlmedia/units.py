"""Unit handling.

All internal computations use natural units c = eps0 = mu0 = 1 (so kappa0 =
1/mu0 = 1 as well); lengths are measured in a reference length L0 and
frequencies in c/L0.  The converters below translate SI inputs/outputs at the
API boundary.  In natural-unit mode they are identity maps.
"""

from __future__ import annotations

from dataclasses import dataclass

C_SI = 299_792_458.0            # m / s
EPS0_SI = 8.8541878128e-12      # F / m
MU0_SI = 1.25663706212e-6       # H / m

# Natural-unit constants used throughout the package.
C = 1.0
EPS0 = 1.0
MU0 = 1.0
KAPPA0 = 1.0  # inverse vacuum permeability


@dataclass(frozen=True)
class UnitSystem:
    """Conversion between SI and internal natural units.

    Parameters
    ----------
    reference_length : float
        L0 in meters; internal lengths are multiples of L0 and internal
        angular frequencies are multiples of c / L0.
    """

    reference_length: float = 1.0

    @property
    def frequency_scale(self) -> float:
        """Angular-frequency unit in rad/s."""
        return C_SI / self.reference_length

    def frequency_to_natural(self, omega_si: complex) -> complex:
        return omega_si / self.frequency_scale

    def frequency_from_natural(self, omega: complex) -> complex:
        return omega * self.frequency_scale

    def length_to_natural(self, length_si: float) -> float:
        return length_si / self.reference_length

    def length_from_natural(self, length: float) -> float:
        return length * self.reference_length

    def wavevector_to_natural(self, k_si: float) -> float:
        return k_si * self.reference_length

    def wavevector_from_natural(self, k: float) -> float:
        return k / self.reference_length


NATURAL = UnitSystem(1.0)


def make_unit_system(mode: str, reference_length: float = 1.0) -> UnitSystem | None:
    """Return a converter for 'si' mode or None for 'natural' mode."""
    if mode == "natural":
        return None
    if mode == "si":
        return UnitSystem(reference_length)
    raise ValueError(f"unknown unit mode {mode!r}")
