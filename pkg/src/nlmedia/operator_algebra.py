"""Discrete operator calculus on dyadic kernels.

Everything operates on the weighted-matrix representation of
:class:`~nlmedia.grids.DiscreteKernel`, in which the continuum eigenvalue
problem, the positive Hermitian square root K (K K^dag = sigma), the inverse
kernel rho, gauge unitaries V (K' = K V), projector families, and the
first-order inhomogeneous square-root construction are plain dense linear
algebra.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import (
    IllConditionedError,
    ModelValidityError,
    NlmediaError,
    PositivityError,
)
from .grids import (
    DiscreteKernel,
    PeriodicGrid,
    cross_matrices,
    curl_kernel,
    from_local_scalar,
    from_local_tensor,
    from_symbol,
    identity_kernel,
    tensor_projectors,
)
from .response import LocalAnisotropic, assemble_sigma_gamma

HERMITICITY_TOL = 1e-10
UNITARITY_TOL = 1e-11
DEGENERACY_MERGE_TOL = 1e-8


class ContractError(NlmediaError):
    """An operation's input violates its stated contract."""


@dataclass
class SpectralDecomposition:
    """Eigensystem of a Hermitian kernel: eigenvalues sorted descending,
    orthonormal eigenvector columns in the weighted representation."""

    grid: PeriodicGrid
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> DiscreteKernel:
        f = self.eigenvectors
        return DiscreteKernel(self.grid, (f * self.eigenvalues) @ f.conj().T)


@dataclass
class ProjectorFamily:
    """Complete family of mutually orthogonal projector kernels."""

    projectors: list[DiscreteKernel]

    def __len__(self):
        return len(self.projectors)

    def __iter__(self):
        return iter(self.projectors)

    def __getitem__(self, i):
        return self.projectors[i]

    def max_defect(self) -> float:
        """Largest violation of idempotence, mutual orthogonality and
        completeness, in weighted-matrix norm relative to the family scale."""
        ps = [p.matrix for p in self.projectors]
        dim = ps[0].shape[0]
        worst = 0.0
        total = np.zeros_like(ps[0])
        for i, p in enumerate(ps):
            worst = max(worst, np.linalg.norm(p @ p - p))
            total += p
            for q in ps[i + 1:]:
                worst = max(worst, np.linalg.norm(p @ q))
        worst = max(worst, np.linalg.norm(total - np.eye(dim)))
        return float(worst / max(1.0, np.sqrt(dim)))


def require_hermitian(kernel: DiscreteKernel, tol: float = HERMITICITY_TOL):
    defect = kernel.hermiticity_defect()
    if defect > tol:
        raise ContractError(f"kernel not Hermitian: defect {defect:.3e} > {tol:g}")


def eigendecompose(sigma: DiscreteKernel) -> SpectralDecomposition:
    """Eigendecomposition of a Hermitian kernel, the discrete analogue of the
    continuum eigenvalue problem for the dissipation kernel."""
    require_hermitian(sigma)
    evals, evecs = np.linalg.eigh(0.5 * (sigma.matrix + sigma.matrix.conj().T))
    order = np.argsort(evals)[::-1]
    return SpectralDecomposition(sigma.grid, evals[order], evecs[:, order])


def sqrt_kernel(sigma: DiscreteKernel) -> DiscreteKernel:
    """Positive Hermitian square root K of a positive kernel:
    K K^dag = sigma.  Eigenvalues above the discretization floor
    -1e-10 ||sigma|| are clipped to zero; lower ones are a positivity error."""
    dec = eigendecompose(sigma)
    evals = dec.eigenvalues
    scale = max(np.abs(evals).max(initial=0.0), 1e-300)
    if evals.min(initial=0.0) < -1e-10 * scale:
        raise PositivityError(
            f"eigenvalue {evals.min():.3e} below positivity floor "
            f"{-1e-10 * scale:.3e}"
        )
    root = np.sqrt(np.clip(evals, 0.0, None))
    f = dec.eigenvectors
    return DiscreteKernel(sigma.grid, (f * root) @ f.conj().T)


def inverse_kernel(sigma: DiscreteKernel) -> DiscreteKernel:
    """Hermitian positive inverse kernel rho with rho sigma = identity."""
    dec = eigendecompose(sigma)
    evals = dec.eigenvalues
    if evals.size == 0 or evals.min() <= 0:
        raise PositivityError("inverse kernel requires strictly positive input")
    cond = evals.max() / evals.min()
    if cond > 1e12:
        raise IllConditionedError(f"condition number {cond:.3e} > 1e12")
    f = dec.eigenvectors
    return DiscreteKernel(sigma.grid, (f / evals) @ f.conj().T)


def require_unitary(v: DiscreteKernel, tol: float = UNITARITY_TOL):
    m = v.matrix
    eye = np.eye(m.shape[0])
    scale = np.sqrt(m.shape[0])
    d1 = np.linalg.norm(m.conj().T @ m - eye) / scale
    d2 = np.linalg.norm(m @ m.conj().T - eye) / scale
    if max(d1, d2) > tol:
        raise ContractError(
            f"gauge kernel not unitary: defect {max(d1, d2):.3e} > {tol:g}"
        )


def gauge_transform(k: DiscreteKernel, v: DiscreteKernel) -> DiscreteKernel:
    """K' = K V for unitary V; preserves K' K'^dag = sigma exactly."""
    require_unitary(v)
    return k @ v


def sign_flip_gauge(dec: SpectralDecomposition, flips) -> DiscreteKernel:
    """Hermitian unitary gauge V = sum_a (+/-1) F_a F_a^dag built from sign
    flips in the eigenbasis; the only gauges that keep K' = K V Hermitian."""
    signs = np.where(np.asarray(flips, dtype=bool), -1.0, 1.0)
    if signs.shape != dec.eigenvalues.shape:
        raise ContractError("one sign per eigenvector required")
    f = dec.eigenvectors
    return DiscreteKernel(dec.grid, (f * signs) @ f.conj().T)


def helmholtz_projectors(grid: PeriodicGrid) -> ProjectorFamily:
    """Longitudinal/transverse tensorial delta functions {Delta_par,
    Delta_perp}, realized spectrally via k k^T / k^2; the k = 0 mode is
    assigned wholly to the transverse projector (torus convention)."""
    p_par, p_perp = tensor_projectors(grid.kvecs)
    return ProjectorFamily(
        [from_symbol(grid, p_par.astype(complex)),
         from_symbol(grid, p_perp.astype(complex))]
    )


def principal_axis_projectors(
    model: LocalAnisotropic, omega: complex, grid: PeriodicGrid
) -> ProjectorFamily:
    """Projectors onto the principal-axis eigenspaces of a local anisotropic
    medium.  Axis pairs whose dissipative eigenvalue functions coincide at
    every grid point (relative gap < 1e-8) are merged into one projector
    (uniaxial -> 2 projectors, isotropic -> 1)."""
    pts = grid.points
    sig = np.real(model.eval_eigenvalues(pts, omega))
    ax = model.eval_axes(pts, omega)
    scale = max(np.abs(sig).max(), 1e-300)

    groups: list[list[int]] = []
    for i in range(3):
        placed = False
        for g in groups:
            gap = np.abs(sig[:, i] - sig[:, g[0]]).max() / scale
            if gap < DEGENERACY_MERGE_TOL:
                if gap > 0:
                    warnings.warn(
                        f"near-degenerate principal conductivities (gap "
                        f"{gap:.2e}) merged; exact degeneracy not established",
                        stacklevel=2,
                    )
                g.append(i)
                placed = True
                break
        if not placed:
            groups.append([i])

    projectors = []
    for g in groups:
        t = np.einsum("nia,nib->nab", ax[:, g, :], ax[:, g, :]).astype(complex)
        projectors.append(from_local_tensor(grid, t))
    return ProjectorFamily(projectors)


# -- inhomogeneous square-root constructions ---------------------------------

def yukawa_m0(distance: float, alpha: float) -> float:
    """Screened-Coulomb scalar kernel m0(r) = -exp(-r/alpha)/(4 pi r) of the
    first-order inhomogeneous construction; alpha = sqrt(gamma0/sigma0)."""
    if alpha <= 0:
        raise ModelValidityError("alpha must be > 0")
    if distance <= 0:
        raise ModelValidityError("distance must be > 0")
    return -np.exp(-distance / alpha) / (4.0 * np.pi * distance)


def _field(values, grid: PeriodicGrid) -> np.ndarray:
    v = np.asarray(values, dtype=float)
    if v.ndim == 0:
        v = np.full(grid.n_points, float(v))
    if v.shape != (grid.n_points,):
        raise ModelValidityError(f"field shape {v.shape} != ({grid.n_points},)")
    return v


def homogeneous_curl_K(
    sigma_par0: float, gamma0: float, grid: PeriodicGrid, sign: int = +1
) -> DiscreteKernel:
    """The curl-form square-root kernel of a homogeneous medium with
    dissipation sigma = sigma_par0 I delta + gamma0 curl delta curl:

        K0' = sigma_par0^{1/2} I delta  -/+  i gamma0^{1/2} curl delta,

    i.e. symbol sigma_par0^{1/2} I +/- gamma0^{1/2} [k]_x.  Non-Hermitian,
    but solves K K^dag = sigma exactly.  ``sign=+1`` is the package-wide
    default branch; ``sign=-1`` exposes the other solution."""
    if sigma_par0 <= 0 or gamma0 < 0:
        raise ModelValidityError("need sigma_par0 > 0 and gamma0 >= 0")
    if sign not in (+1, -1):
        raise ModelValidityError("sign must be +1 or -1")
    kx = cross_matrices(grid.kvecs)
    sym = np.sqrt(sigma_par0) * np.eye(3)[None, :, :] + sign * np.sqrt(gamma0) * kx
    return from_symbol(grid, sym.astype(complex))


def curl_gauge_V(
    sigma_par, sigma_perp, kvecs: np.ndarray, sign: int = +1
) -> np.ndarray:
    """Symbol of the unitary gauge kernel that maps the Hermitian K of a
    homogeneous isotropic medium onto the curl-form K':

        V(k) = k^ k^  +  (sigma_par/sigma_perp)^{1/2} (I - k^ k^)
                      +/- gamma^{1/2} sigma_perp^{-1/2} [k]_x,

    with gamma(k) = (sigma_perp - sigma_par)/k^2, which must be > 0 (the
    hydrodynamic closure violates this at small k; the homogeneous
    magnetodielectric satisfies it for all k).  ``sigma_par``/``sigma_perp``
    are arrays per wave vector; returns (N, 3, 3)."""
    kvecs = np.asarray(kvecs, dtype=float)
    k2 = np.einsum("ij,ij->i", kvecs, kvecs)
    sp = np.asarray(sigma_par, dtype=float)
    st = np.asarray(sigma_perp, dtype=float)
    if np.any(sp <= 0) or np.any(st <= 0):
        raise ModelValidityError("dissipative eigenvalues must be > 0")
    nonzero = k2 > 0
    gamma = np.zeros_like(sp)
    gamma[nonzero] = (st[nonzero] - sp[nonzero]) / k2[nonzero]
    if np.any(gamma[nonzero] <= 0):
        raise ModelValidityError(
            "curl gauge requires sigma_perp > sigma_par for every k != 0"
        )
    p_par, p_perp = tensor_projectors(kvecs)
    kx = cross_matrices(kvecs)
    a = np.sqrt(sp / st)
    b = np.sqrt(gamma / st)
    sym = p_par + a[:, None, None] * p_perp + sign * b[:, None, None] * kx
    sym[~nonzero] = np.eye(3)
    return sym.astype(complex)


def perturbative_K(
    sigma_par_field,
    gamma_field,
    background: tuple[float, float],
    grid: PeriodicGrid,
    sign: int = +1,
) -> DiscreteKernel:
    """First-order square-root kernel for a weakly inhomogeneous medium with
    dissipation sigma = sigma_par(r) I delta + curl gamma(r) delta curl:

        K = K0' + (1/2) (sigma - sigma0) M0,      M0 = (K0'^dag)^{-1},

    where K0' is the homogeneous curl-form kernel of the background
    (sigma_par0, gamma0) and M0 is the regulator kernel whose position-space
    form is built on the Yukawa function ``yukawa_m0`` with
    alpha = sqrt(gamma0/sigma_par0); here M0 is assembled spectrally as the
    exact inverse of K0'^dag, which makes ||K K^dag - sigma|| = O(eps^2)
    an algebraic identity.
    """
    sigma_par0, gamma0 = background
    if sigma_par0 <= 0 or gamma0 <= 0:
        raise ModelValidityError(
            "background must have sigma_par0 > 0 and gamma0 > 0 "
            "(alpha = sqrt(gamma0/sigma_par0) must be positive)"
        )
    sp = _field(sigma_par_field, grid)
    ga = _field(gamma_field, grid)
    k0 = homogeneous_curl_K(sigma_par0, gamma0, grid, sign=sign)

    kx = cross_matrices(grid.kvecs)
    alpha = np.sqrt(gamma0 / sigma_par0)
    base = np.eye(3)[None, :, :] - sign * alpha * kx  # (K0'(k))^dag / sqrt(sigma0)
    m0_sym = np.linalg.inv(base) / np.sqrt(sigma_par0)
    m0 = from_symbol(grid, m0_sym.astype(complex))

    c = curl_kernel(grid)
    dsigma = from_local_scalar(grid, sp - sigma_par0) + c @ from_local_scalar(
        grid, ga - gamma0
    ) @ c
    return k0 + 0.5 * (dsigma @ m0)


def naive_inhomogeneous_K(
    sigma_par_field, gamma_field, grid: PeriodicGrid, sign: int = +1
) -> DiscreteKernel:
    """The coefficient-promoted curl-form kernel

        K = sigma_par^{1/2}(r') I delta  -/+  i gamma^{1/2}(r') curl delta

    (pointwise square roots of the inhomogeneous coefficients).  For constant
    coefficients this reduces to ``homogeneous_curl_K`` and solves
    K K^dag = sigma; for varying coefficients it demonstrably does NOT --
    this is the negative-test fixture."""
    sp = _field(sigma_par_field, grid)
    ga = _field(gamma_field, grid)
    if np.any(sp < 0) or np.any(ga < 0):
        raise ModelValidityError("fields must be >= 0")
    c = curl_kernel(grid)
    k = from_local_scalar(grid, np.sqrt(sp)).matrix + (
        -sign * 1j
    ) * (c @ from_local_scalar(grid, np.sqrt(ga))).matrix
    return DiscreteKernel(grid, k)


def sqrt_defect(k: DiscreteKernel, sigma: DiscreteKernel) -> float:
    """Relative Frobenius residual ||K K^dag - sigma|| / ||sigma||."""
    num = np.linalg.norm(k.matrix @ k.matrix.conj().T - sigma.matrix)
    return float(num / max(sigma.norm(), 1e-300))


def inhomogeneous_sigma(sigma_par_field, gamma_field, grid: PeriodicGrid) -> DiscreteKernel:
    """The target dissipation kernel for the inhomogeneous constructions;
    re-exported from response for locality of the residual checks."""
    return assemble_sigma_gamma(sigma_par_field, gamma_field, grid)
