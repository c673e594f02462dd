"""Bulk (translation-invariant) Green tensors and layered-medium integrals.

For an isotropic spatially dispersive medium the k-space Green tensor splits
into transverse/longitudinal scalar resolvents

    G0(k) = (I - k^ k^)/D_perp(k, w)  -  k^ k^ / D_par(k, w),
    D_perp = k^2 - w^2 - i mu0 w Q_perp,     D_par = w^2 + i mu0 w Q_par,

(natural units c = 1).  This module evaluates G0, its partial Fourier
transform to the layered representation

    G(zeta, q, w) = int dbeta/(2 pi)^3 e^{i beta zeta} G0(q, beta; w),

the companion curl tensor Gamma = (mu0 w)^{-1} [k]_x G0 = (mu0 w)^{-1} [k]_x / D_perp,
and the two surface-impedance scalars of the half-space problem.

All layered quantities are expressed in the orthonormal frame
(s^, q^, z^) with s^ = q^ x z^; component order in the returned 3x3 arrays
is (s, q, z).

Large-beta tails are handled analytically: odd components with a c/beta tail
are integrated as f - c beta/(beta^2+1) plus the closed form
int dbeta e^{i beta zeta} beta/(beta^2+1) = i pi sgn(zeta) e^{-|zeta|}
(one-sided value +/- i pi at zeta = 0); the even zz component approaches the
constant -1/D_par(inf), whose transform is a delta function reported
separately as the contact tensor (never folded into the continuous part).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.integrate import IntegrationWarning, quad

from .errors import AccuracyError, DomainError, SingularityError
from .response import HomogeneousKSpace
from .units import MU0

PREF = 1.0 / (2.0 * np.pi) ** 3


@dataclass(frozen=True)
class QuadratureSpec:
    """Adaptive-quadrature budget for the beta integrals."""

    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    limit: int = 300
    limlst: int = 120
    max_error: float = 1e-8

    def __post_init__(self):
        if self.rel_tol <= 0 or self.abs_tol <= 0 or self.max_error <= 0:
            raise DomainError("quadrature tolerances must be positive")


DEFAULT_SPEC = QuadratureSpec()


@dataclass(frozen=True)
class DispersionPair:
    """Transverse/longitudinal dispersion scalars at fixed (k, w)."""

    d_perp: complex
    d_par: complex


def dispersion(model: HomogeneousKSpace, k, omega: complex):
    """D_perp = k^2 - w^2 - i mu0 w Q_perp(k, w) and
    D_par = w^2 + i mu0 w Q_par(k, w); scalar or vectorized in k."""
    k = np.asarray(k, dtype=float)
    qp = np.asarray(model.q_par(k, omega), dtype=complex)
    qt = np.asarray(model.q_perp(k, omega), dtype=complex)
    d_perp = k**2 - omega**2 - 1j * MU0 * omega * qt
    d_par = omega**2 + 1j * MU0 * omega * qp
    if k.ndim == 0:
        return DispersionPair(complex(d_perp), complex(d_par))
    return d_perp, d_par


def _dispersion_inf(model: HomogeneousKSpace, omega: complex) -> complex:
    """D_par at k -> infinity, the constant tail of the longitudinal
    resolvent."""
    return omega**2 + 1j * MU0 * omega * complex(model.q_par_inf(omega))


def bulk_green_k(
    model: HomogeneousKSpace, kvec, omega: complex, pole_tol: float = 1e-12
) -> np.ndarray:
    """The 3x3 bulk Green tensor G0(k, w) of an isotropic medium, in
    Cartesian components.  Raises on an on-shell root of either dispersion
    scalar."""
    kvec = np.asarray(kvec, dtype=float)
    kmag = float(np.linalg.norm(kvec))
    pair = dispersion(model, kmag, omega)
    scale = 1.0 + kmag**2 + abs(omega) ** 2
    for name, val in (("D_perp", pair.d_perp), ("D_par", pair.d_par)):
        if abs(val) < pole_tol * scale:
            raise SingularityError(
                f"{name}(k={kmag:g}, w={omega:g}) = {val:.3e}: on-shell pole"
            )
    if kmag == 0:
        return np.eye(3) / pair.d_perp - 0.0 * np.eye(3)
    khat = kvec / kmag
    p_par = np.outer(khat, khat)
    return (np.eye(3) - p_par) / pair.d_perp - p_par / pair.d_par


def bulk_green_k_tensor(q_tensor: np.ndarray, kvec, omega: complex) -> np.ndarray:
    """Bulk Green tensor for a general (possibly anisotropic) conductivity
    tensor Q(k, w): direct 3x3 solve of the defining equation
    [k x k x + w^2 + i mu0 w Q] G0 = -I."""
    kvec = np.asarray(kvec, dtype=float)
    kk = np.outer(kvec, kvec)
    k2 = float(kvec @ kvec)
    m = (kk - k2 * np.eye(3)) + omega**2 * np.eye(3) + 1j * MU0 * omega * np.asarray(
        q_tensor, dtype=complex
    )
    return -np.linalg.inv(m)


def bulk_defining_residual(
    model: HomogeneousKSpace, kvec, omega: complex, g: np.ndarray | None = None
) -> float:
    """Relative residual of [k x k x + w^2 + i mu0 w Q] G0 + I = 0."""
    kvec = np.asarray(kvec, dtype=float)
    if g is None:
        g = bulk_green_k(model, kvec, omega)
    kmag = np.linalg.norm(kvec)
    q = model.symbol(kvec[None, :], omega)[0]
    kk = np.outer(kvec, kvec)
    m = (kk - kmag**2 * np.eye(3)) + omega**2 * np.eye(3) + 1j * MU0 * omega * q
    return float(np.linalg.norm(m @ g + np.eye(3)) / np.linalg.norm(g) / max(1.0, np.linalg.norm(m)))


# -- partial Fourier transform ------------------------------------------------

def _pole_scan(model: HomogeneousKSpace, q: float, omega: complex, tol: float = 1e-9):
    betas = np.concatenate([np.linspace(0.0, 12.0 * (1.0 + abs(omega) + abs(q)), 600)])
    k = np.hypot(q, betas)
    d_perp, d_par = dispersion(model, k, omega)
    scale = 1.0 + k**2 + abs(omega) ** 2
    worst = min(
        float(np.min(np.abs(d_perp) / scale)), float(np.min(np.abs(d_par) / scale))
    )
    if worst < tol:
        raise SingularityError(
            f"dispersion root within {worst:.2e} of the real beta axis at "
            f"(q={q:g}, w={omega:g}); medium not lossy enough for the "
            "real-axis quadrature"
        )


def _complex_quad(fn, spec: QuadratureSpec, weight=None, wvar=0.0):
    """Integrate a complex function over [0, inf); returns (value, error).

    Oscillatory-weight integrals use QAWF; when its cycle-series
    extrapolation fails to certify the requested accuracy (isolated
    parameter points), the integral is re-done as finite-interval QAWO over
    the structured region plus shifted QAWF for the smooth tail.
    """
    total = 0.0 + 0.0j
    err = 0.0
    for part in (np.real, np.imag):
        kwargs = dict(
            epsabs=spec.abs_tol, epsrel=spec.rel_tol, limit=spec.limit,
            full_output=1,
        )
        if weight is not None:
            kwargs.update(weight=weight, wvar=wvar, limlst=spec.limlst)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", IntegrationWarning)
            out = quad(lambda b: float(part(fn(b))), 0.0, np.inf, **kwargs)
        val, e = out[0], abs(out[1])
        if weight is not None and e > 1e-10:
            val, e = _split_oscillatory(
                lambda b: float(part(fn(b))), weight, wvar, spec
            )
        total += (1.0 if part is np.real else 1.0j) * val
        err += e
    return total, err


def _split_oscillatory(fn, weight, wvar, spec: QuadratureSpec, cut: float = 600.0):
    """Fallback for a real oscillatory-weight integral over [0, inf):
    QAWO on [0, cut] (covers poles/structure near the origin) plus QAWF on
    the smooth shifted tail, with the weight expanded about the cut."""
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IntegrationWarning)
        head = quad(fn, 0.0, cut, weight=weight, wvar=wvar,
                    epsabs=spec.abs_tol, epsrel=spec.rel_tol,
                    limit=4 * spec.limit, full_output=1)
        # sin(w(b+c)) = sin(wb)cos(wc) + cos(wb)sin(wc); analogous for cos
        sc, cc = np.sin(wvar * cut), np.cos(wvar * cut)
        shifted = lambda b: fn(b + cut)
        t_sin = quad(shifted, 0.0, np.inf, weight="sin", wvar=wvar,
                     epsabs=spec.abs_tol, epsrel=spec.rel_tol,
                     limit=spec.limit, limlst=spec.limlst, full_output=1)
        t_cos = quad(shifted, 0.0, np.inf, weight="cos", wvar=wvar,
                     epsabs=spec.abs_tol, epsrel=spec.rel_tol,
                     limit=spec.limit, limlst=spec.limlst, full_output=1)
    if weight == "sin":
        tail = cc * t_sin[0] + sc * t_cos[0]
    else:
        tail = cc * t_cos[0] - sc * t_sin[0]
    err = abs(head[1]) + abs(t_sin[1]) + abs(t_cos[1])
    return head[0] + tail, err


@dataclass
class PartialFourierGreen:
    """One sample of the layered-representation Green tensor.

    ``tensor``: continuous part, 3x3 in the (s, q, z) frame.
    ``contact``: coefficient tensor of the delta(z - z') contact part
    (purely z z for the isotropic branch), reported separately.
    ``side``: which one-sided limit was taken when dz == 0 (+1 for 0+).
    ``error``: accumulated quadrature error estimate.
    """

    q: float
    omega: complex
    dz: float
    side: int
    tensor: np.ndarray
    contact: np.ndarray
    error: float


def _transform(parity: str, fn, tail_c: complex, dz: float, side: int,
               spec: QuadratureSpec):
    """Transform of one scalar component: int dbeta/(2 pi)^3 e^{i beta dz} f.

    parity 'even': f(-beta) = f(beta), optional constant tail is handled by
    the caller (subtract before calling).  parity 'odd': f(-beta) = -f(beta)
    with a tail_c / beta large-beta tail removed analytically.
    """
    sgn = side if dz == 0.0 else (1 if dz > 0 else -1)
    adz = abs(dz)
    if parity == "even":
        if dz == 0.0:
            val, err = _complex_quad(fn, spec)
            return 2.0 * PREF * val, err
        val, err = _complex_quad(fn, spec, weight="cos", wvar=adz)
        return 2.0 * PREF * val, err
    # odd component: subtract tail_c * beta / (beta^2 + 1)
    def reduced(b):
        return fn(b) - tail_c * b / (b * b + 1.0)

    analytic = tail_c * 1j * np.pi * sgn * np.exp(-adz)
    if dz == 0.0:
        return PREF * analytic, 0.0
    val, err = _complex_quad(reduced, spec, weight="sin", wvar=adz)
    return PREF * (2.0j * sgn * val + analytic), err


def partial_fourier(
    model: HomogeneousKSpace,
    dz: float,
    q: float,
    omega: complex,
    spec: QuadratureSpec = DEFAULT_SPEC,
    side: int = +1,
) -> PartialFourierGreen:
    """Layered-representation Green tensor G(z - z', q, w) of a bulk medium,
    by real-axis quadrature over beta with analytic tail handling.

    ``side`` selects the one-sided limit 0+ (+1) or 0- (-1) when dz == 0;
    it only affects the odd (q, z) components.  The contact (delta) part of
    the longitudinal term is returned separately in ``contact``.
    """
    if q <= 0:
        raise DomainError("q must be > 0 (frame s^ = q^ x z^ undefined at q = 0)")
    if side not in (+1, -1):
        raise DomainError("side must be +1 or -1")
    _pole_scan(model, q, omega)
    d_par_inf = _dispersion_inf(model, omega)

    def resolvents(b):
        k = np.hypot(q, b)
        pair = dispersion(model, float(k), omega)
        return float(k), pair.d_perp, pair.d_par

    def g_ss(b):
        _, dperp, _ = resolvents(b)
        return 1.0 / dperp

    def g_qq(b):
        k, dperp, dpar = resolvents(b)
        return (b * b) / (k * k * dperp) - (q * q) / (k * k * dpar)

    def g_qz(b):
        k, dperp, dpar = resolvents(b)
        return -(q * b / (k * k)) * (1.0 / dperp + 1.0 / dpar)

    def g_zz_reduced(b):
        k, dperp, dpar = resolvents(b)
        return (q * q) / (k * k * dperp) - (b * b) / (k * k * dpar) + 1.0 / d_par_inf

    out = np.zeros((3, 3), dtype=complex)
    err = 0.0
    v, e = _transform("even", g_ss, 0.0, dz, side, spec); out[0, 0] = v; err += e
    v, e = _transform("even", g_qq, 0.0, dz, side, spec); out[1, 1] = v; err += e
    v, e = _transform("odd", g_qz, -q / d_par_inf, dz, side, spec)
    out[1, 2] = v; out[2, 1] = v; err += e
    v, e = _transform("even", g_zz_reduced, 0.0, dz, side, spec)
    out[2, 2] = v; err += e

    contact = np.zeros((3, 3), dtype=complex)
    contact[2, 2] = -(2.0 * np.pi) ** (-2) / d_par_inf

    scale = max(1.0, float(np.max(np.abs(out))))
    if err > spec.max_error * scale:
        raise AccuracyError(
            f"quadrature error estimate {err:.3e} exceeds budget "
            f"{spec.max_error * scale:.3e}"
        )
    return PartialFourierGreen(q, omega, dz, side, out, contact, err)


def partial_fourier_gamma(
    model: HomogeneousKSpace,
    dz: float,
    q: float,
    omega: complex,
    spec: QuadratureSpec = DEFAULT_SPEC,
    side: int = +1,
) -> PartialFourierGreen:
    """Layered transform of the curl tensor Gamma(k) = (mu0 w)^{-1} [k]_x G0(k)
    = (mu0 w)^{-1} [k]_x / D_perp.  Same frame and conventions as
    ``partial_fourier``; Gamma has no contact part (the would-be constant
    tails cancel identically)."""
    if q <= 0:
        raise DomainError("q must be > 0")
    if side not in (+1, -1):
        raise DomainError("side must be +1 or -1")
    _pole_scan(model, q, omega)

    def inv_dperp(b):
        k = np.hypot(q, b)
        pair = dispersion(model, float(k), omega)
        return 1.0 / pair.d_perp

    def beta_inv_dperp(b):
        return b * inv_dperp(b)

    a, e1 = _transform("odd", beta_inv_dperp, 1.0, dz, side, spec)
    b, e2 = _transform("even", inv_dperp, 0.0, dz, side, spec)
    pref = 1.0 / (MU0 * omega)
    out = np.zeros((3, 3), dtype=complex)
    out[0, 1] = -pref * a       # s row, q column
    out[0, 2] = pref * q * b    # s row, z column
    out[1, 0] = pref * a        # q row, s column
    out[2, 0] = -pref * q * b   # z row, s column
    err = e1 + e2
    scale = max(1.0, float(np.max(np.abs(out))))
    if err > spec.max_error * scale:
        raise AccuracyError(
            f"quadrature error estimate {err:.3e} exceeds budget "
            f"{spec.max_error * scale:.3e}"
        )
    return PartialFourierGreen(q, omega, dz, side, out, np.zeros((3, 3), complex), err)


# -- surface impedances -------------------------------------------------------

@dataclass(frozen=True)
class ImpedancePair:
    """Surface impedance scalars of a spatially dispersive half-space."""

    z_s: complex
    z_p: complex
    error: float = 0.0


def kliever_fuchs(
    model: HomogeneousKSpace, q: float, omega: complex,
    spec: QuadratureSpec = DEFAULT_SPEC,
) -> ImpedancePair:
    """Surface impedances of a half-space filled with the given medium:

        Z_s = i mu0 w int dbeta/(2 pi)^3  1 / D_perp,
        Z_p = i mu0 w int dbeta/(2 pi)^3  [beta^2/D_perp - q^2/D_par] / k^2,

    k^2 = q^2 + beta^2; integrals evaluated by adaptive quadrature on the
    real axis (both integrands decay like 1/beta^2)."""
    if q <= 0:
        raise DomainError("q must be > 0")
    _pole_scan(model, q, omega)

    def f_s(b):
        k = np.hypot(q, b)
        pair = dispersion(model, float(k), omega)
        return 1.0 / pair.d_perp

    def f_p(b):
        k = np.hypot(q, b)
        pair = dispersion(model, float(k), omega)
        return (b * b / pair.d_perp - q * q / pair.d_par) / (k * k)

    vs, es = _complex_quad(f_s, spec)
    vp, ep = _complex_quad(f_p, spec)
    pref = 1j * MU0 * omega * 2.0 * PREF
    err = (es + ep) * abs(MU0 * omega) * 2.0 * PREF
    pair = ImpedancePair(pref * vs, pref * vp, err)
    if err > spec.max_error * max(1.0, abs(pair.z_s), abs(pair.z_p)):
        raise AccuracyError(f"impedance quadrature error {err:.3e} over budget")
    return pair


def schwarz_bulk_defect(model: HomogeneousKSpace, kvec, omega: complex) -> float:
    """Relative defect of the reflection property G0*(k, w) = G0(k, -w*)."""
    g1 = bulk_green_k(model, kvec, omega)
    g2 = bulk_green_k(model, kvec, -np.conj(omega))
    return float(np.linalg.norm(np.conj(g1) - g2) / np.linalg.norm(g1))
