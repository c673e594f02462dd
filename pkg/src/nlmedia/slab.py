"""Surface-impedance method for a slab 0 < z < d between two half-spaces.

All quantities live at fixed (q, w) in the layered frame (s^, q^, z^) with
s^ = q^ x z^ (component order (s, q, z), tensors indexed source-first).
``TangentialBlock``s are plain 2x2 complex matrices on the (s, q) subspace.
Fields are row vectors multiplying operators from the left, matching the
source-first tensor convention: E(z) = p . G(z_p, z).

Pipeline: the two exterior half-spaces and the slab interior are eliminated
in favour of four tangential admittance blocks Y(a, b), a, b in {0, d}; the
interior integral equation then closes into a 2x2 block linear system for
the tangential boundary fields, solved by the sharp (tangential) block
inverse; the interior field and hence the slab Green tensor follow by one
more quadrature-free assembly step.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bulk import (
    DEFAULT_SPEC,
    PartialFourierGreen,
    QuadratureSpec,
    partial_fourier,
    partial_fourier_gamma,
)
from .errors import DomainError, GuidedWaveError, ModelValidityError
from .response import HomogeneousKSpace
from .units import MU0

TWO_PI_SQ = (2.0 * np.pi) ** 2

#: Reflection r -> -r of the lateral wave vector, q -> -q, in the frame of
#: +q: both s^ = q^ x z^ and q^ flip, z^ stays.
FLIP = np.diag([-1.0, -1.0, 1.0])


def flip_q(tensor: np.ndarray) -> np.ndarray:
    """A layered tensor at -q, expressed in the +q frame: FLIP . T . FLIP.
    Tangential 2x2 blocks are invariant; (q, z) mixing entries change sign."""
    return FLIP @ np.asarray(tensor) @ FLIP


def tangential(tensor: np.ndarray) -> np.ndarray:
    """2x2 (s, q) block of a 3x3 layered tensor."""
    return np.asarray(tensor)[:2, :2].copy()


def pad(block: np.ndarray) -> np.ndarray:
    """Embed a 2x2 tangential block into 3x3 with zero z row and column."""
    out = np.zeros((3, 3), dtype=complex)
    out[:2, :2] = block
    return out


def sharp_inverse(block: np.ndarray, det_tol: float = 1e-14) -> np.ndarray:
    """Inverse on the tangential subspace.  A singular block at real (q, w)
    is a guided-wave resonance and is reported, never regularized."""
    a = np.asarray(block, dtype=complex)
    if a.shape != (2, 2):
        raise DomainError(f"tangential block must be 2x2, got {a.shape}")
    det = a[0, 0] * a[1, 1] - a[0, 1] * a[1, 0]
    scale = np.linalg.norm(a) ** 2
    if abs(det) <= det_tol * max(scale, 1e-300):
        raise GuidedWaveError(
            f"singular tangential block (|det| = {abs(det):.3e}, scale "
            f"{scale:.3e}): guided-wave resonance"
        )
    return np.array([[a[1, 1], -a[0, 1]], [-a[1, 0], a[0, 0]]], dtype=complex) / det


def e3_block_inverse(a, b, c, d):
    """Blockwise right inverse of [[A, B], [C, D]] on the tangential block
    space, built entirely from sharp inverses: returns (W, X, Y, Z) with

        W = C# (A C# - B D#)#,      X = A# (C A# - D B#)#,
        Y = D# (B D# - A C#)#,      Z = B# (D B# - C A#)#,

    so that [[A, B], [C, D]] . [[W, X], [Y, Z]] = [[I, 0], [0, I]].
    Requires all four blocks individually invertible."""
    a_sh, b_sh = sharp_inverse(a), sharp_inverse(b)
    c_sh, d_sh = sharp_inverse(c), sharp_inverse(d)
    w = c_sh @ sharp_inverse(a @ c_sh - b @ d_sh)
    x = a_sh @ sharp_inverse(c @ a_sh - d @ b_sh)
    y = d_sh @ sharp_inverse(b @ d_sh - a @ c_sh)
    z = b_sh @ sharp_inverse(d @ b_sh - c @ a_sh)
    return w, x, y, z


def e3_identity_residual(a, b, c, d) -> float:
    """Relative residual of the blockwise-inverse identity: [[A, B], [C, D]]
    times the 4x4 matrix assembled from ``e3_block_inverse``, minus I."""
    w, x, y, z = e3_block_inverse(a, b, c, d)
    m = np.block([[a, b], [c, d]])
    inv = np.block([[w, x], [y, z]])
    return float(np.linalg.norm(m @ inv - np.eye(4)) / max(1.0, np.linalg.norm(inv) * np.linalg.norm(m) / 4))


def block_solve_2x2(a, b, c, d, rhs1, rhs2, check_tol: float = 1e-12):
    """Solve the row-vector block system  x.A + y.C = rhs1,  x.B + y.D = rhs2
    for tangential row vectors x, y using sharp inverses:

        x = (rhs1.C# - rhs2.D#) . (A.C# - B.D#)#,
        y = (rhs1.A# - rhs2.B#) . (C.A# - D.B#)#.

    The blockwise-inverse identity is asserted internally to ``check_tol``.
    """
    a = np.asarray(a, complex); b = np.asarray(b, complex)
    c = np.asarray(c, complex); d = np.asarray(d, complex)
    r1 = np.asarray(rhs1, complex); r2 = np.asarray(rhs2, complex)
    if all(_invertible(m) for m in (a, b, c, d)):
        iw, ix, iy, iz = e3_block_inverse(a, b, c, d)
        if e3_identity_residual(a, b, c, d) > check_tol:
            raise GuidedWaveError(
                "blockwise-inverse identity violated beyond tolerance"
            )
        x = r1 @ iw + r2 @ iy
        y = r1 @ ix + r2 @ iz
    else:
        # the sharp-inverse route needs all four blocks invertible; for
        # (block-)triangular systems fall back to the flattened 4x4 solve
        x, y = _dense_block_solve(a, b, c, d, r1, r2)
    res = max(
        np.linalg.norm(x @ a + y @ c - r1),
        np.linalg.norm(x @ b + y @ d - r2),
    ) / max(1.0, np.linalg.norm(r1) + np.linalg.norm(r2))
    if res > check_tol:
        raise GuidedWaveError(f"block solve residual {res:.3e} > {check_tol:g}")
    return x, y


def _invertible(m) -> bool:
    m = np.asarray(m, complex)
    det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
    return abs(det) > 1e-14 * max(np.linalg.norm(m) ** 2, 1e-300)


def _dense_block_solve(a, b, c, d, r1, r2):
    """Fallback for block-triangular systems: flatten to 4x4."""
    m = np.block([[a, b], [c, d]])
    if abs(np.linalg.det(m)) <= 1e-14 * max(np.linalg.norm(m) ** 4, 1e-300):
        raise GuidedWaveError("singular boundary block system")
    sol = np.concatenate([r1, r2]) @ np.linalg.inv(m)
    return sol[:2], sol[2:]


def _check_slab_model(model: HomogeneousKSpace, omega: complex):
    """Reject media whose transverse conductivity grows with k (magnetic-like
    singular terms): the layered quadrature tails and the admittance algebra
    require bounded Q_perp."""
    k_probe = np.array([1e3, 2e3])
    qp = np.asarray(model.q_perp(k_probe, omega), dtype=complex)
    if not np.all(np.isfinite(qp)) or abs(qp[1] - qp[0]) > 1e-6 * (1.0 + abs(qp[0])):
        raise ModelValidityError(
            f"model '{model.label}' has unbounded transverse conductivity at "
            "large k (magnetic-like singular term); not admissible for slab "
            "geometry"
        )


@dataclass
class SlabAdmittance:
    """The four tangential admittance blocks Y(a, b), a, b in {0, d}, fully
    characterizing the two exterior half-spaces and the slab response at
    fixed (q, w)."""

    y00: np.ndarray
    y0d: np.ndarray
    yd0: np.ndarray
    ydd: np.ndarray
    q: float
    omega: complex
    d: float
    blocks: "_SlabBlocks | None" = None

    def block(self, zeta: float, b: float) -> np.ndarray:
        key = (0.0 if zeta == 0 else 1.0, 0.0 if b == 0 else 1.0)
        return {
            (0.0, 0.0): self.y00, (0.0, 1.0): self.y0d,
            (1.0, 0.0): self.yd0, (1.0, 1.0): self.ydd,
        }[key]


@dataclass
class _SlabBlocks:
    """The eight tangential building blocks of the admittance assembly."""

    m: np.ndarray
    n: np.ndarray
    p: np.ndarray
    s: np.ndarray
    t: np.ndarray
    u: np.ndarray
    v: np.ndarray
    w: np.ndarray


def _assemble_blocks(
    models, d: float, q: float, omega: complex, spec: QuadratureSpec
) -> _SlabBlocks:
    m0, m1, m2 = models

    def g(model, dz, side=+1):
        return tangential(partial_fourier(model, dz, q, omega, spec, side).tensor)

    def gam(model, dz, side=+1):
        return tangential(partial_fourier_gamma(model, dz, q, omega, spec, side).tensor)

    return _SlabBlocks(
        m=-g(m1, -d),
        n=-(g(m1, 0.0, side=-1) + g(m0, 0.0, side=+1)),
        p=g(m1, 0.0, side=+1) + g(m2, 0.0, side=-1),
        s=g(m1, d),
        t=gam(m1, -d),
        u=gam(m1, 0.0, side=-1) + gam(m0, 0.0, side=+1),
        v=-(gam(m1, 0.0, side=+1) + gam(m2, 0.0, side=-1)),
        w=-gam(m1, d),
    )


def slab_admittance(
    models, d: float, q: float, omega: complex,
    spec: QuadratureSpec = DEFAULT_SPEC, check_tol: float = 1e-10,
) -> SlabAdmittance:
    """Assemble the four admittance blocks of a slab of thickness d of medium
    ``models[1]`` between half-spaces ``models[0]`` (z < 0) and ``models[2]``
    (z > d).  All three media must be lossy at real w and free of
    magnetic-like singular conductivity terms.

    The result is verified internally: substituting the Y blocks back into
    the interface continuity system must reproduce it to ``check_tol``.
    """
    if d <= 0:
        raise DomainError("slab thickness d must be > 0")
    for mdl in models:
        _check_slab_model(mdl, omega)
    bl = _assemble_blocks(models, d, q, omega, spec)
    m_sh, n_sh = sharp_inverse(bl.m), sharp_inverse(bl.n)
    p_sh, s_sh = sharp_inverse(bl.p), sharp_inverse(bl.s)
    left = sharp_inverse(bl.m @ p_sh - bl.n @ s_sh)
    right = sharp_inverse(bl.p @ m_sh - bl.s @ n_sh)
    y00 = (bl.u @ s_sh - bl.t @ p_sh) @ left / TWO_PI_SQ
    y0d = (bl.u @ n_sh - bl.t @ m_sh) @ right / TWO_PI_SQ
    yd0 = (bl.v @ p_sh - bl.w @ s_sh) @ left / TWO_PI_SQ
    ydd = (bl.v @ m_sh - bl.w @ n_sh) @ right / TWO_PI_SQ
    y = SlabAdmittance(y00, y0d, yd0, ydd, q, omega, d, blocks=bl)

    res = admittance_system_residual(y, bl)
    if res > check_tol:
        raise GuidedWaveError(
            f"admittance continuity residual {res:.3e} > {check_tol:g} at "
            f"(q={q:g}, w={omega:g})"
        )
    return y


def admittance_system_residual(y: SlabAdmittance, bl: _SlabBlocks) -> float:
    """Relative residual of the interface continuity system satisfied by the
    admittance blocks:

        -(2 pi)^2 [Y00 M + Y0d P] = T,   -(2 pi)^2 [Y00 N + Y0d S] = U,
         (2 pi)^2 [Yd0 M + Ydd P] = V,    (2 pi)^2 [Yd0 N + Ydd S] = W.
    """
    scale = max(
        np.linalg.norm(bl.t), np.linalg.norm(bl.u),
        np.linalg.norm(bl.v), np.linalg.norm(bl.w), 1e-300,
    )
    res = max(
        np.linalg.norm(TWO_PI_SQ * (y.y00 @ bl.m + y.y0d @ bl.p) + bl.t),
        np.linalg.norm(TWO_PI_SQ * (y.y00 @ bl.n + y.y0d @ bl.s) + bl.u),
        np.linalg.norm(TWO_PI_SQ * (y.yd0 @ bl.m + y.ydd @ bl.p) - bl.v),
        np.linalg.norm(TWO_PI_SQ * (y.yd0 @ bl.n + y.ydd @ bl.s) - bl.w),
    )
    return float(res / scale)


def single_interface_admittance(
    m0: HomogeneousKSpace, q: float, omega: complex,
    spec: QuadratureSpec = DEFAULT_SPEC,
) -> np.ndarray:
    """Admittance of the single interface bounding half-space m0 (z < 0):
    the tangential relation b = -(2 pi)^2 e . Y satisfied by any field that
    is source-free and outgoing in the half-space, obtained from the
    extinction form of the half-space field representation,

        Y = -(2 pi)^{-2} Gamma0(0-) . G0(0-)#.

    Depends only on the half-space medium.  For a local dielectric this is
    the corner-form inverse of the s/p surface impedances of the medium on
    the {s^, q^} basis; for spatially dispersive media it generalizes them.
    """
    _check_slab_model(m0, omega)
    g0 = tangential(partial_fourier(m0, 0.0, q, omega, spec, side=-1).tensor)
    gam0 = tangential(partial_fourier_gamma(m0, 0.0, q, omega, spec, side=-1).tensor)
    return -(gam0 @ sharp_inverse(g0)) / TWO_PI_SQ


def _zcross(tensor: np.ndarray) -> np.ndarray:
    """Left action of z^ x on the field index of a row-convention layered
    tensor: new s row = -(old q row), new q row = old s row, z row = 0."""
    out = np.zeros((3, 3), dtype=complex)
    out[0] = -tensor[1]
    out[1] = tensor[0]
    return out


def assemble_R(
    y: SlabAdmittance, model_slab: HomogeneousKSpace, zeta: float, z_src: float,
    side_src: int, spec: QuadratureSpec = DEFAULT_SPEC,
) -> np.ndarray:
    """The interior-coupling kernel R(zeta, z') for zeta in {0, d}:

        R = i mu0 w (2 pi)^2 z^ x { Gamma1(zeta - z')
              + (2 pi)^2 Y(zeta, d) G1(d - z')
              - (2 pi)^2 Y(zeta, 0) G1(-z') }.

    Only the tangential rows of the braced kernels are ever contracted (the
    z^ row is dropped by the cross product and the left factors are
    tangential), so the kernels enter in the +q frame as is.  The z^ row of
    the result vanishes identically.
    """
    q, omega, d = y.q, y.omega, y.d
    if zeta not in (0.0, y.d):
        raise DomainError("zeta must be one of the interface heights {0, d}")

    def side_for(dz, default):
        return default if dz == 0.0 else +1

    dz1 = zeta - z_src
    gam1 = partial_fourier_gamma(
        model_slab, dz1, q, omega, spec, side=side_for(dz1, -side_src)
    ).tensor
    g_d = partial_fourier(
        model_slab, d - z_src, q, omega, spec, side=side_for(d - z_src, +1)
    ).tensor
    g_0 = partial_fourier(
        model_slab, -z_src, q, omega, spec, side=side_for(-z_src, -1)
    ).tensor
    inner = (
        gam1
        + TWO_PI_SQ * pad(y.block(zeta, d)) @ g_d
        - TWO_PI_SQ * pad(y.block(zeta, 0.0)) @ g_0
    )
    return 1j * MU0 * omega * TWO_PI_SQ * _zcross(inner)


@dataclass
class SlabFieldSolution:
    """Tangential boundary fields and the data needed to evaluate the
    interior field of a point source inside the slab."""

    e0: np.ndarray          # tangential E at z = 0+ (row 2-vector)
    ed: np.ndarray          # tangential E at z = d- (row 2-vector)
    residual: float


def tangential_fields(r00, r0d, rd0, rdd, e_in0, e_ind,
                      check_tol: float = 1e-11) -> SlabFieldSolution:
    """Solve for the tangential boundary fields given the four interior
    kernels R(zeta, z') at (zeta, z') in {0, d} x {0+, d-} and the incident
    tangential fields e_in(0+), e_in(d-):

        x (I + tan R(0,0+)) + y (-tan R(d,0+)) = e_in(0+)
        x (tan R(0,d-))     + y (I - tan R(d,d-)) = e_in(d-)
    """
    a = np.eye(2) + tangential(r00)
    b = tangential(r0d)
    c = -tangential(rd0)
    dd = np.eye(2) - tangential(rdd)
    x, yv = block_solve_2x2(a, b, c, dd, np.asarray(e_in0), np.asarray(e_ind),
                            check_tol=check_tol)
    res = max(
        np.linalg.norm(x @ a + yv @ c - e_in0),
        np.linalg.norm(x @ b + yv @ dd - e_ind),
    ) / max(1.0, np.linalg.norm(e_in0) + np.linalg.norm(e_ind))
    return SlabFieldSolution(e0=x, ed=yv, residual=float(res))


def boundary_source_covectors(
    y: SlabAdmittance, bl: _SlabBlocks, ein_at_d: np.ndarray,
    ein_at_0: np.ndarray,
) -> tuple[np.ndarray, np.ndarray]:
    """Source-driven part of the boundary magnetic covectors.

    The admittance relation between the tangential boundary fields holds for
    source-free interior fields; with a dipole inside the slab, the magnetic
    covector b = mu0^{-1} [B x z^] acquires an additional piece beyond Y . E,
    fixed by the same interface continuity blocks:

        (b0_x, bd_x) . [[M, N], [P, S]]
            = -(i mu0 w (2 pi)^2)^{-1} (E_in(d) . I_z,  E_in(0) . I_z).

    ``ein_at_d``/``ein_at_0`` are stacked incident-field rows (one per
    source orientation); returns (b0_x, bd_x) as stacked tangential rows.
    """
    lam = 1j * MU0 * y.omega * TWO_PI_SQ
    big = np.block([[bl.m, bl.n], [bl.p, bl.s]])
    if abs(np.linalg.det(big)) <= 1e-14 * max(np.linalg.norm(big) ** 4, 1e-300):
        raise GuidedWaveError("singular interface continuity system")
    rhs = -np.hstack([np.asarray(ein_at_d)[:, :2],
                      np.asarray(ein_at_0)[:, :2]]) / lam
    bx = np.linalg.solve(big.T, rhs.T).T
    return bx[:, :2], bx[:, 2:]


def slab_green(
    models, d: float, q: float, omega: complex, z_source: float,
    z_field: float, spec: QuadratureSpec = DEFAULT_SPEC,
    admittance: SlabAdmittance | None = None,
) -> np.ndarray:
    """Green tensor of the slab configuration for source and field heights
    strictly inside the slab: rows are the field E(z_field) produced by unit
    dipole rows p = s^, q^, z^ at z_source (source index first, frame
    (s, q, z); contact part excluded, as in ``bulk.partial_fourier``)."""
    if not (0.0 < z_source < d):
        raise DomainError("source height must lie strictly inside the slab")
    if not (0.0 < z_field < d):
        raise DomainError("field height must lie strictly inside the slab")
    m1 = models[1]
    y = admittance if admittance is not None else slab_admittance(
        models, d, q, omega, spec
    )
    bl = y.blocks
    if bl is None:
        bl = _assemble_blocks(models, d, q, omega, spec)

    # interior kernels at the boundary source heights 0+ and d-
    r_00 = assemble_R(y, m1, 0.0, 0.0, +1, spec)   # z' = 0+
    r_0d = assemble_R(y, m1, 0.0, d, -1, spec)     # z' = d-
    r_d0 = assemble_R(y, m1, d, 0.0, +1, spec)
    r_dd = assemble_R(y, m1, d, d, -1, spec)

    def g1(dz, side=+1):
        return partial_fourier(m1, dz, q, omega, spec,
                               side=side if dz == 0.0 else +1).tensor

    def e_in(z_prime):
        # p . G1(z_p, z', -q); by the z-parity of the layered tensor this
        # equals the +q tensor at reversed offset z_p - z'.  At coincident
        # heights take the field-just-above-source limit, which is the 0-
        # side of the reversed offset.
        dz = z_source - z_prime
        return partial_fourier(m1, dz, q, omega, spec, side=-1).tensor

    ein0 = e_in(0.0)
    eind = e_in(d)
    bx0, bxd = boundary_source_covectors(y, bl, eind, ein0)
    bx0_3 = np.hstack([bx0, np.zeros((3, 1))])
    bxd_3 = np.hstack([bxd, np.zeros((3, 1))])
    lam = 1j * MU0 * omega * TWO_PI_SQ

    def extra(z_prime, side0=-1, sided=+1):
        # source-driven incident-field correction from the boundary
        # magnetic covectors, same contraction as the interior
        # representation of the field
        return lam * (bxd_3 @ g1(d - z_prime, sided)
                      - bx0_3 @ g1(-z_prime, side0))

    u_in0 = ein0 + extra(0.0)
    u_ind = eind + extra(d)
    r_d_zf = assemble_R(y, m1, d, z_field, +1, spec)
    r_0_zf = assemble_R(y, m1, 0.0, z_field, +1, spec)
    u_in_f = e_in(z_field) + extra(z_field)

    out = np.zeros((3, 3), dtype=complex)
    for i in range(3):
        sol = tangential_fields(
            r_00, r_0d, r_d0, r_dd, u_in0[i, :2], u_ind[i, :2]
        )
        x3 = np.zeros(3, complex); x3[:2] = sol.e0
        y3 = np.zeros(3, complex); y3[:2] = sol.ed
        out[i] = u_in_f[i] + y3 @ r_d_zf - x3 @ r_0_zf
    # rows assembled above are E(z', q) = p . G_slab(z_p, z', -q); flip
    # back to the +q tensor for output
    return flip_q(out)
