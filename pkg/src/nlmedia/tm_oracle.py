"""Independent closed-form references for local (non-dispersive-in-k) media.

Everything here is textbook layered-media electromagnetics, written directly
from Fresnel coefficients and plane-wave superposition -- deliberately NOT
routed through the surface-admittance machinery of ``slab``, so the two can
be compared as independent computations.

Conventions (matching the layered frame of ``bulk``): orthonormal basis
(s^, q^, z^) with s^ = q^ x z^; tensors are indexed (source component,
field component); zeta = z_field - z_source; natural units c = mu0 = 1.
"""

from __future__ import annotations

import numpy as np

from .errors import DomainError


def _kz(eps: complex, q: float, omega: complex) -> complex:
    """Out-of-plane wavenumber k_z = sqrt(eps w^2 - q^2), branch Im >= 0
    (decay away from the source for lossy media)."""
    k = np.sqrt(complex(eps) * omega**2 - q**2)
    if k.imag < 0 or (k.imag == 0 and k.real < 0):
        k = -k
    return k


def impedance_s_local(eps: complex, q: float, omega: complex) -> complex:
    """Closed-form s-polarized surface impedance of a local half-space:
    Z_s = i mu0 w / (8 pi^2 kappa1), kappa1 = -i k_z (Re kappa1 >= 0)."""
    kappa = -1j * _kz(eps, q, omega)
    return 1j * omega / (8.0 * np.pi**2 * kappa)


def impedance_p_local(eps: complex, q: float, omega: complex) -> complex:
    """Closed-form p-polarized surface impedance of a local half-space:
    Z_p = -i mu0 kappa1 / (8 pi^2 eps w)."""
    kappa = -1j * _kz(eps, q, omega)
    return -1j * kappa / (8.0 * np.pi**2 * complex(eps) * omega)


def local_layered_green(eps: complex, dz: float, q: float, omega: complex,
                        side: int = +1) -> np.ndarray:
    """Continuous part of the layered bulk Green tensor of a homogeneous
    local dielectric, closed form (frame (s, q, z); contact part excluded)."""
    k1 = _kz(eps, q, omega)
    kap = -1j * k1
    s = side if dz == 0 else (1 if dz > 0 else -1)
    e = np.exp(-kap * abs(dz))
    ew2 = complex(eps) * omega**2
    g = np.zeros((3, 3), dtype=complex)
    g[0, 0] = e / (8.0 * np.pi**2 * kap)
    g[1, 1] = -kap * e / (8.0 * np.pi**2 * ew2)
    g[1, 2] = g[2, 1] = -1j * q * s * e / (8.0 * np.pi**2 * ew2)
    g[2, 2] = q**2 * e / (8.0 * np.pi**2 * kap * ew2)
    return g


def local_layered_gamma(eps: complex, dz: float, q: float, omega: complex,
                        side: int = +1) -> np.ndarray:
    """Closed form of the curl companion Gamma = (mu0 w)^{-1} [k]_x / D_perp
    in the layered representation, local dielectric."""
    k1 = _kz(eps, q, omega)
    kap = -1j * k1
    s = side if dz == 0 else (1 if dz > 0 else -1)
    e = np.exp(-kap * abs(dz))
    a = 1j * s * e / (8.0 * np.pi**2)
    b = e / (8.0 * np.pi**2 * kap)
    g = np.zeros((3, 3), dtype=complex)
    g[0, 1] = -a / omega
    g[0, 2] = q * b / omega
    g[1, 0] = a / omega
    g[2, 0] = -q * b / omega
    return g


def fresnel_s(eps1: complex, epsj: complex, q: float, omega: complex) -> complex:
    """s-polarization reflection coefficient for a wave in medium 1 hitting
    medium j: (k1 - kj)/(k1 + kj)."""
    k1, kj = _kz(eps1, q, omega), _kz(epsj, q, omega)
    return (k1 - kj) / (k1 + kj)


def fresnel_p(eps1: complex, epsj: complex, q: float, omega: complex) -> complex:
    """p-polarization reflection coefficient for a wave in medium 1 hitting
    medium j: (epsj k1 - eps1 kj)/(epsj k1 + eps1 kj)."""
    k1, kj = _kz(eps1, q, omega), _kz(epsj, q, omega)
    return (epsj * k1 - eps1 * kj) / (epsj * k1 + eps1 * kj)


def local_slab_green(
    eps0: complex, eps1: complex, eps2: complex, d: float,
    q: float, omega: complex, z_source: float, z_field: float,
) -> np.ndarray:
    """Three-layer Green tensor for source and field inside the slab
    0 < z < d (medium 1), with local half-spaces eps0 (z < 0) and eps2
    (z > d), by Fresnel-coefficient plane-wave superposition.

    Returns the 3x3 tensor (source index first) in the (s, q, z) frame; the
    contact (delta) part is excluded, as in ``bulk.partial_fourier``.
    """
    if not (0.0 < z_source < d and 0.0 < z_field < d):
        raise DomainError("source and field points must lie strictly inside the slab")
    k1 = _kz(eps1, q, omega)
    km = np.sqrt(complex(eps1)) * omega
    pref = 1j / (8.0 * np.pi**2 * k1)
    zp, z = z_source, z_field
    zeta = z - zp
    sgn = 1 if zeta >= 0 else -1

    r0s = fresnel_s(eps1, eps0, q, omega)
    r2s = fresnel_s(eps1, eps2, q, omega)
    r0p = fresnel_p(eps1, eps0, q, omega)
    r2p = fresnel_p(eps1, eps2, q, omega)
    ds = 1.0 - r0s * r2s * np.exp(2j * k1 * d)
    dp = 1.0 - r0p * r2p * np.exp(2j * k1 * d)

    # The four multiply-reflected wave families; each term is
    # (coefficient, phase argument, source polarity, field polarity),
    # where polarity +/- is the sign of the k_z component of the wave at
    # the respective point (source polarity from the e^{-+ i k1 zp} factor,
    # field polarity from the e^{+- i k1 z} factor).
    families = [
        (r0s * 1.0, z + zp, -1, +1, r0p),
        (r0s * r2s, 2 * d + z - zp, +1, +1, r0p * r2p),
        (r2s * 1.0, 2 * d - z - zp, +1, -1, r2p),
        (r2s * r0s, 2 * d - z + zp, -1, -1, r2p * r0p),
    ]

    def p_hat(sign: int) -> np.ndarray:
        return np.array([0.0, sign * k1, -q], dtype=complex) / km

    g = np.zeros((3, 3), dtype=complex)
    # direct (bulk) part
    e_dir = np.exp(1j * k1 * abs(zeta))
    g[0, 0] += pref * e_dir
    g += pref * e_dir * np.outer(p_hat(sgn), p_hat(sgn))
    # scattered part
    for cs, phase, pol_src, pol_fld, cp in families:
        e = np.exp(1j * k1 * phase)
        g[0, 0] += pref * e * cs / ds
        g += pref * e * (cp / dp) * np.outer(p_hat(pol_src), p_hat(pol_fld))
    return g
