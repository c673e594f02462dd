"""Linear-response conductivity models.

The medium is described by a nonlocal conductivity kernel Q(r, r', w)
relating induced current to electric field.  Its Hermitian part sigma is the
dissipative (noise-source) part and must be positive definite for absorbing
media at real w > 0.  This module provides:

* closed-form material closures (Drude--Lorentz permittivity, a magnetic
  analogue, and a hydrodynamic nonlocal closure -- the latter two are our
  closure choices, the formalism fixes none),
* the model families: local anisotropic, quasi-local magnetodielectric,
  homogeneous k-space, and cell-lattice media, each evaluable as a
  DiscreteKernel,
* the Hermitian/anti-Hermitian split and the analytic-response sanity checks
  (Kramers--Kronig residual, Schwarz reflection, positivity).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import (
    LayoutError,
    ModelValidityError,
    PositivityError,
    ResolutionError,
    SingularityError,
)
from .grids import (
    DiscreteKernel,
    PeriodicGrid,
    curl_kernel,
    from_local_scalar,
    from_local_tensor,
    from_symbol,
    tensor_projectors,
)
from .units import EPS0, KAPPA0

SCHWARZ_RTOL = 1e-12


def check_frequency(omega: complex) -> complex:
    """Response functions are defined (analytic) in the closed upper
    half-plane only."""
    omega = complex(omega)
    if omega.imag < 0:
        raise ModelValidityError(
            f"frequency {omega} has Im < 0; response functions live in the "
            "upper half-plane"
        )
    return omega


# -- scalar material closures ----------------------------------------------

@dataclass(frozen=True)
class DrudeLorentzParams:
    """Single-resonance absorbing oscillator: plasma frequency, damping and
    resonance frequency (natural units unless converted at the boundary)."""

    plasma_frequency: float
    damping: float
    resonance: float = 0.0

    def __post_init__(self):
        if self.plasma_frequency < 0:
            raise ModelValidityError("plasma_frequency must be >= 0")
        if self.damping <= 0:
            raise ModelValidityError("damping must be > 0 (strictly absorbing)")
        if self.resonance < 0:
            raise ModelValidityError("resonance must be >= 0")


def eval_epsilon(params: DrudeLorentzParams, omega: complex) -> complex:
    """Drude--Lorentz permittivity eps(w) = 1 + wp^2/(w0^2 - w^2 - i gd w)."""
    omega = complex(omega)
    if params.damping <= 0 and omega.imag <= 0:
        raise ModelValidityError("need damping > 0 or Im w > 0")
    den = params.resonance**2 - omega**2 - 1j * params.damping * omega
    if den == 0:
        raise SingularityError(f"permittivity pole hit at w = {omega}")
    return 1.0 + params.plasma_frequency**2 / den


def eval_kappa(params: DrudeLorentzParams, omega: complex) -> complex:
    """Inverse permeability kappa(w) = 1/mu(w) modeled as
    kappa = 1 - wp^2/(w0^2 - w^2 - i g w); this guarantees Im kappa < 0 for
    real w > 0 (absorbing magnetic response) and paramagnetic mu(0) >= 1."""
    omega = complex(omega)
    den = params.resonance**2 - omega**2 - 1j * params.damping * omega
    if den == 0:
        raise SingularityError(f"kappa pole hit at w = {omega}")
    return 1.0 - params.plasma_frequency**2 / den


def hydrodynamic_kspace(
    omega_p: float, gamma_d: float, beta_hydro: float, k, omega: complex
) -> tuple[complex, complex]:
    """Nonlocal hydrodynamic Drude closure (our closure choice).

    eps_par(k, w) = 1 - wp^2 / (w (w + i gd) - beta^2 k^2)
    eps_perp(w)   = 1 - wp^2 / (w (w + i gd))

    Returns (Q_par, Q_perp) with Q = -i eps0 w (eps - 1).
    """
    if beta_hydro < 0:
        raise ModelValidityError("beta_hydro must be >= 0")
    if gamma_d <= 0:
        raise ModelValidityError("gamma_d must be > 0")
    omega = complex(omega)
    k = np.asarray(k, dtype=float)
    den_par = omega * (omega + 1j * gamma_d) - beta_hydro**2 * k**2
    den_perp = omega * (omega + 1j * gamma_d)
    if np.any(den_par == 0) or den_perp == 0:
        raise SingularityError("hydrodynamic longitudinal pole hit")
    eps_par = 1.0 - omega_p**2 / den_par
    eps_perp = 1.0 - omega_p**2 / den_perp
    q_par = -1j * EPS0 * omega * (eps_par - 1.0)
    q_perp = -1j * EPS0 * omega * (eps_perp - 1.0)
    if np.ndim(k) == 0:
        return complex(q_par), complex(q_perp)
    return q_par, np.broadcast_to(q_perp, q_par.shape).copy()


# -- model families ----------------------------------------------------------

@dataclass(frozen=True)
class HomogeneousKSpace:
    """Translation-invariant isotropic medium without optical activity,
    defined by scalar symbols Q_par(k, w), Q_perp(k, w) (k = |k|).

    ``q_par_inf`` / ``q_perp_inf`` give the k -> infinity limits, needed by
    the layered-medium quadrature tails; all built-in closures have finite
    limits.
    """

    q_par: Callable[[np.ndarray, complex], np.ndarray]
    q_perp: Callable[[np.ndarray, complex], np.ndarray]
    q_par_inf: Callable[[complex], complex]
    q_perp_inf: Callable[[complex], complex]
    label: str = "homogeneous"
    params: tuple = ()

    def symbol(self, kvecs: np.ndarray, omega: complex) -> np.ndarray:
        """Q(k) = Q_par k^ k^ + Q_perp (I - k^ k^) per wave vector, (N, 3, 3)."""
        kvecs = np.atleast_2d(np.asarray(kvecs, dtype=float))
        kmag = np.linalg.norm(kvecs, axis=1)
        p_par, p_perp = tensor_projectors(kvecs)
        qp = np.asarray(self.q_par(kmag, omega), dtype=complex)
        qt = np.asarray(self.q_perp(kmag, omega), dtype=complex)
        # k = 0 carries no longitudinal projector; both scalars coincide
        # there for all valid closures, so the transverse branch covers it.
        qt0 = np.where(kmag == 0, np.asarray(self.q_par(kmag, omega)), qt)
        return qp[:, None, None] * p_par + qt0[:, None, None] * p_perp

    def q_kernel(self, grid: PeriodicGrid, omega: complex) -> DiscreteKernel:
        return from_symbol(grid, self.symbol(grid.kvecs, omega))

    def sigma_kernel(self, grid: PeriodicGrid, omega: complex) -> DiscreteKernel:
        sym = self.symbol(grid.kvecs, omega)
        herm = 0.5 * (sym + np.conj(np.swapaxes(sym, 1, 2)))
        return from_symbol(grid, herm)

    def sigma_scalars(self, k, omega: complex):
        """(sigma_par, sigma_perp) = Hermitian-part eigenvalues at real w."""
        k = np.asarray(k, dtype=float)
        return (
            np.real(self.q_par(k, omega)),
            np.real(self.q_perp(k, omega)),
        )


def vacuum_model() -> HomogeneousKSpace:
    zero = lambda k, w: np.zeros_like(np.asarray(k, dtype=float), dtype=complex)
    return HomogeneousKSpace(
        q_par=zero,
        q_perp=zero,
        q_par_inf=lambda w: 0j,
        q_perp_inf=lambda w: 0j,
        label="vacuum",
    )


def local_dielectric_model(epsilon: complex) -> HomogeneousKSpace:
    """Local medium with constant complex permittivity."""
    epsilon = complex(epsilon)

    def q(k, w):
        k = np.asarray(k, dtype=float)
        return np.full(k.shape, -1j * EPS0 * w * (epsilon - 1.0), dtype=complex)

    return HomogeneousKSpace(
        q_par=q,
        q_perp=q,
        q_par_inf=lambda w: -1j * EPS0 * w * (epsilon - 1.0),
        q_perp_inf=lambda w: -1j * EPS0 * w * (epsilon - 1.0),
        label="local_dielectric",
        params=(epsilon,),
    )


def drude_model(params: DrudeLorentzParams) -> HomogeneousKSpace:
    """Local Drude--Lorentz dielectric as a k-independent k-space model."""

    def q(k, w):
        k = np.asarray(k, dtype=float)
        val = -1j * EPS0 * w * (eval_epsilon(params, w) - 1.0)
        return np.full(k.shape, val, dtype=complex)

    def q_inf(w):
        return -1j * EPS0 * w * (eval_epsilon(params, w) - 1.0)

    return HomogeneousKSpace(
        q_par=q,
        q_perp=q,
        q_par_inf=q_inf,
        q_perp_inf=q_inf,
        label="drude",
        params=(params.plasma_frequency, params.damping, params.resonance),
    )


def hydrodynamic_model(
    omega_p: float, gamma_d: float, beta_hydro: float
) -> HomogeneousKSpace:
    """Spatially dispersive hydrodynamic Drude medium (closure choice)."""

    def q_par(k, w):
        return hydrodynamic_kspace(omega_p, gamma_d, beta_hydro, k, w)[0]

    def q_perp(k, w):
        return hydrodynamic_kspace(omega_p, gamma_d, beta_hydro, k, w)[1]

    def q_par_inf(w):
        # eps_par -> 1 as k -> infinity when beta_hydro > 0
        if beta_hydro > 0:
            return 0j
        return -1j * EPS0 * w * (
            hydro_eps_perp(omega_p, gamma_d, w) - 1.0
        )

    def q_perp_inf(w):
        return -1j * EPS0 * w * (hydro_eps_perp(omega_p, gamma_d, w) - 1.0)

    return HomogeneousKSpace(
        q_par=q_par,
        q_perp=q_perp,
        q_par_inf=q_par_inf,
        q_perp_inf=q_perp_inf,
        label="hydrodynamic",
        params=(omega_p, gamma_d, beta_hydro),
    )


def hydro_eps_perp(omega_p: float, gamma_d: float, omega: complex) -> complex:
    return 1.0 - omega_p**2 / (omega * (omega + 1j * gamma_d))


def magnetodielectric_coefficients(
    epsilon: complex, kappa: complex, omega: complex
) -> tuple[complex, complex]:
    """Scalar coefficients (Q1, Q2) of the quasi-local magnetodielectric
    kernel Q = Q1 I delta + curl Q2 delta curl:
    Q1 = -i eps0 w (eps - 1), Q2 = -i kappa0 (1 - kappa)/w."""
    q1 = -1j * EPS0 * omega * (epsilon - 1.0)
    q2 = -1j * KAPPA0 * (1.0 - kappa) / omega
    return q1, q2


def magnetodielectric_homogeneous_model(
    eps_params: DrudeLorentzParams | complex,
    kappa_params: DrudeLorentzParams | complex,
) -> HomogeneousKSpace:
    """Homogeneous magnetodielectric medium as a k-space model:
    Q_par = Q1(w), Q_perp = Q1(w) + Q2(w) k^2."""

    def eps(w):
        if isinstance(eps_params, DrudeLorentzParams):
            return eval_epsilon(eps_params, w)
        return complex(eps_params)

    def kap(w):
        if isinstance(kappa_params, DrudeLorentzParams):
            return eval_kappa(kappa_params, w)
        return complex(kappa_params)

    def q_par(k, w):
        k = np.asarray(k, dtype=float)
        q1, _ = magnetodielectric_coefficients(eps(w), kap(w), w)
        return np.full(k.shape, q1, dtype=complex)

    def q_perp(k, w):
        k = np.asarray(k, dtype=float)
        q1, q2 = magnetodielectric_coefficients(eps(w), kap(w), w)
        return q1 + q2 * k**2

    def q_par_inf(w):
        return magnetodielectric_coefficients(eps(w), kap(w), w)[0]

    return HomogeneousKSpace(
        q_par=q_par,
        q_perp=q_perp,
        q_par_inf=q_par_inf,
        # NOTE: Q_perp grows like k^2 when kappa != 1; such magnetic-like
        # singular terms are rejected by the slab pipeline (see slab.py),
        # so the inf limit is only meaningful for kappa = 1.
        q_perp_inf=q_par_inf,
        label="magnetodielectric",
    )


@dataclass(frozen=True)
class MagnetoDielectric:
    """Quasi-local, possibly inhomogeneous magnetodielectric medium with
    parameter fields eps(r, w), kappa(r, w).

    Fields are callables (points (N,3), w) -> (N,) complex, or constants.
    """

    epsilon: Callable | complex
    kappa: Callable | complex = 1.0
    label: str = "magnetodielectric_field"

    def _eval(self, f, points: np.ndarray, omega: complex) -> np.ndarray:
        n = points.shape[0]
        if callable(f):
            out = np.asarray(f(points, omega), dtype=complex)
            if out.shape != (n,):
                raise ModelValidityError(
                    f"field returned shape {out.shape}, expected ({n},)"
                )
            return out
        arr = np.asarray(f, dtype=complex)
        if arr.ndim == 0:
            return np.full(n, complex(arr))
        if arr.shape != (n,):
            raise ModelValidityError(
                f"field array shape {arr.shape}, expected ({n},) or scalar"
            )
        return arr

    def coefficients(
        self, grid: PeriodicGrid, omega: complex
    ) -> tuple[np.ndarray, np.ndarray]:
        pts = grid.points
        eps = self._eval(self.epsilon, pts, omega)
        kap = self._eval(self.kappa, pts, omega)
        q1 = -1j * EPS0 * omega * (eps - 1.0)
        q2 = -1j * KAPPA0 * (1.0 - kap) / omega
        return q1, q2

    def q_kernel(self, grid: PeriodicGrid, omega: complex) -> DiscreteKernel:
        return magnetodielectric_kernel(self.epsilon, self.kappa, omega, grid)

    def sigma_kernel(self, grid: PeriodicGrid, omega: complex) -> DiscreteKernel:
        return hermitian_split(self.q_kernel(grid, omega))[0]


def magnetodielectric_kernel(epsilon, kappa, omega: complex, grid: PeriodicGrid) -> DiscreteKernel:
    """Discretized quasi-local magnetodielectric conductivity kernel

        Q = Q1(r) I delta(r - r')  +  curl Q2(r) delta(r - r') curl,

    with Q1 = -i eps0 w (eps - 1) and Q2 = -i kappa0 (1 - kappa)/w; the curl
    factors are the module's spectral discrete curl.  At real w > 0 the
    Hermitian part is sigma_par(r) = eps0 w Im eps >= 0 plus
    curl gamma(r) curl with gamma = -kappa0 Im kappa / w >= 0; violating
    either sign is a model-validity error.
    """
    model = MagnetoDielectric(epsilon, kappa)
    omega = complex(omega)
    q1, q2 = model.coefficients(grid, omega)
    if omega.imag == 0 and omega.real > 0:
        sigma_par = q1.real
        gamma = q2.real
        if np.any(sigma_par < -1e-14 * max(1.0, np.abs(q1).max())):
            raise ModelValidityError(
                "Im eps < 0 at real w > 0: non-absorbing dielectric response"
            )
        if np.any(gamma < -1e-14 * max(1.0, np.abs(q2).max())):
            raise ModelValidityError(
                "Im kappa > 0 at real w > 0 violates Im kappa(w) < 0"
            )
    kern = from_local_scalar(grid, q1)
    if np.any(q2 != 0):
        c = curl_kernel(grid)
        kern = kern + c @ from_local_scalar(grid, q2) @ c
    return kern


def assemble_sigma_gamma(sigma_par_field, gamma_field, grid: PeriodicGrid) -> DiscreteKernel:
    """Directly assemble the Hermitian dissipation kernel

        sigma = sigma_par(r) I delta + curl gamma(r) delta curl

    from real non-negative fields; the independent oracle for all
    inhomogeneous square-root constructions."""
    sp = np.asarray(sigma_par_field, dtype=float)
    ga = np.asarray(gamma_field, dtype=float)
    n = grid.n_points
    if sp.ndim == 0:
        sp = np.full(n, float(sp))
    if ga.ndim == 0:
        ga = np.full(n, float(ga))
    if np.any(sp < 0) or np.any(ga < 0):
        raise ModelValidityError("sigma_par and gamma fields must be >= 0")
    c = curl_kernel(grid)
    return from_local_scalar(grid, sp) + c @ from_local_scalar(grid, ga) @ c


@dataclass(frozen=True)
class LocalAnisotropic:
    """Local anisotropic medium Q(r, r') = sum_i q_i(r, w) e_i e_i^T delta.

    ``eigenvalues``: callable (points (N,3), w) -> (N, 3) complex principal
    conductivities q_i (the dissipative eigenvalues are Re q_i); ``axes``:
    callable (points (N,3), w) -> (N, 3, 3) real orthonormal rows e_i, or a
    constant 3x3 orthonormal matrix.
    """

    eigenvalues: Callable[[np.ndarray, complex], np.ndarray]
    axes: Callable | np.ndarray = field(default_factory=lambda: np.eye(3))
    label: str = "local_anisotropic"

    def eval_axes(self, points: np.ndarray, omega: complex) -> np.ndarray:
        n = points.shape[0]
        if callable(self.axes):
            ax = np.asarray(self.axes(points, omega), dtype=float)
        else:
            ax = np.broadcast_to(np.asarray(self.axes, dtype=float), (n, 3, 3))
        if ax.shape != (n, 3, 3):
            raise ModelValidityError(f"axes shape {ax.shape} != ({n}, 3, 3)")
        gram = np.einsum("nia,nja->nij", ax, ax)
        if not np.allclose(gram, np.eye(3), atol=1e-10):
            raise ModelValidityError("principal axes must be orthonormal")
        return ax

    def eval_eigenvalues(self, points: np.ndarray, omega: complex) -> np.ndarray:
        vals = np.asarray(self.eigenvalues(points, omega), dtype=complex)
        if vals.shape != (points.shape[0], 3):
            raise ModelValidityError(
                f"eigenvalue field shape {vals.shape} != (N, 3)"
            )
        return vals

    def local_tensors(self, grid: PeriodicGrid, omega: complex) -> np.ndarray:
        pts = grid.points
        vals = self.eval_eigenvalues(pts, omega)
        ax = self.eval_axes(pts, omega)
        return np.einsum("ni,nia,nib->nab", vals, ax, ax)

    def q_kernel(self, grid: PeriodicGrid, omega: complex) -> DiscreteKernel:
        return from_local_tensor(grid, self.local_tensors(grid, omega))

    def sigma_kernel(self, grid: PeriodicGrid, omega: complex) -> DiscreteKernel:
        return hermitian_split(self.q_kernel(grid, omega))[0]


@dataclass(frozen=True)
class CellLattice:
    """Piecewise-homogeneous medium: the grid is tiled into rectangular cells
    and each cell carries its own HomogeneousKSpace model; the kernel is zero
    whenever r and r' lie in different cells.

    ``cell_shape``: points per cell along each axis; ``models``: one model
    per cell in C order over the cell lattice (or a single model broadcast).
    """

    cell_shape: tuple[int, int, int]
    models: tuple[HomogeneousKSpace, ...]
    label: str = "cell_lattice"

    def layout(self, grid: PeriodicGrid) -> tuple[tuple[int, int, int], int]:
        cells = []
        for n, c in zip(grid.shape, self.cell_shape):
            if c < 1 or n % c != 0:
                raise LayoutError(
                    f"grid shape {grid.shape} incommensurate with cell shape "
                    f"{self.cell_shape}"
                )
            cells.append(n // c)
        n_cells = int(np.prod(cells))
        if len(self.models) not in (1, n_cells):
            raise LayoutError(
                f"{len(self.models)} models for {n_cells} cells"
            )
        return tuple(cells), n_cells

    def cell_model(self, cell_index: int) -> HomogeneousKSpace:
        if len(self.models) == 1:
            return self.models[0]
        return self.models[cell_index]

    def q_kernel(self, grid: PeriodicGrid, omega: complex) -> DiscreteKernel:
        return _cell_lattice_kernel(self, omega, grid, hermitian=False)

    def sigma_kernel(self, grid: PeriodicGrid, omega: complex) -> DiscreteKernel:
        return _cell_lattice_kernel(self, omega, grid, hermitian=True)


def _cell_point_indices(
    grid: PeriodicGrid, cell_shape, cell_counts, cell_multi
) -> np.ndarray:
    """Global flat point indices of one cell, C-ordered to match the
    ordering of the cell's own sub-grid."""
    nx, ny, nz = grid.shape
    cx, cy, cz = cell_shape
    ox, oy, oz = (m * c for m, c in zip(cell_multi, cell_shape))
    jx, jy, jz = np.meshgrid(
        np.arange(cx), np.arange(cy), np.arange(cz), indexing="ij"
    )
    return (((ox + jx) * ny + (oy + jy)) * nz + (oz + jz)).ravel()


def _cell_lattice_kernel(
    cells: CellLattice, omega: complex, grid: PeriodicGrid, hermitian: bool
) -> DiscreteKernel:
    cell_counts, n_cells = cells.layout(grid)
    if min(c for c, n in zip(cells.cell_shape, grid.shape) if n > 1) < 2:
        raise LayoutError("each resolved cell axis needs >= 2 points")
    cell_grid = PeriodicGrid(
        tuple(cells.cell_shape),
        tuple(h * c for h, c in zip(grid.spacings, cells.cell_shape)),
    )
    n = grid.n_points
    mat = np.zeros((3 * n, 3 * n), dtype=complex)
    for ci, multi in enumerate(np.ndindex(*cell_counts)):
        model = cells.cell_model(ci)
        sym = model.symbol(cell_grid.kvecs, omega)
        if hermitian:
            sym = 0.5 * (sym + np.conj(np.swapaxes(sym, 1, 2)))
        block = from_symbol(cell_grid, sym).matrix
        pts = _cell_point_indices(grid, cells.cell_shape, cell_counts, multi)
        flat = (3 * pts[:, None] + np.arange(3)[None, :]).ravel()
        mat[np.ix_(flat, flat)] = block
    return DiscreteKernel(grid, mat)


def cell_lattice_sigma(cells: CellLattice, omega: complex, grid: PeriodicGrid) -> DiscreteKernel:
    """Dissipation kernel of a cell-lattice medium: within each cell the
    truncated translation-invariant kernel of that cell's model (the cell's
    own reciprocal-lattice modes), zero across cell boundaries."""
    return _cell_lattice_kernel(cells, omega, grid, hermitian=True)


# -- split / sanity checks ----------------------------------------------------

def hermitian_split(q: DiscreteKernel) -> tuple[DiscreteKernel, DiscreteKernel]:
    """Split Q = sigma + i tau into Hermitian sigma = (Q + Q^dag)/2 and
    Hermitian tau = (Q - Q^dag)/(2i), exactly."""
    m = q.matrix
    sigma = 0.5 * (m + m.conj().T)
    tau = (m - m.conj().T) / 2j
    return DiscreteKernel(q.grid, sigma), DiscreteKernel(q.grid, tau)


def check_sigma_positive(sigma: DiscreteKernel) -> float:
    """Verify positivity of a dissipation kernel up to the discretization
    floor -1e-10 ||sigma||; returns the minimum eigenvalue."""
    evals = np.linalg.eigvalsh(sigma.matrix)
    floor = -1e-10 * max(np.abs(evals).max(), 1e-300)
    if evals.min() < floor:
        raise PositivityError(
            f"sigma eigenvalue {evals.min():.3e} below floor {floor:.3e}"
        )
    return float(evals.min())


def schwarz_check(model, omega: complex, grid: PeriodicGrid | None = None,
                  k_samples=(0.0, 0.5, 1.3, 2.7)) -> bool:
    """True iff Q*(w) = Q(-w*) within 1e-12 relative, componentwise.

    ``model`` may be a scalar callable w -> complex, a HomogeneousKSpace
    (checked on its symbols at a few |k| samples), or any kernel-evaluable
    model (checked on a small grid, default 2x2x2)."""
    omega = check_frequency(omega)
    mirror = -np.conj(omega)

    def close(a, b):
        a = np.asarray(a)
        b = np.asarray(b)
        scale = max(np.abs(a).max(initial=0.0), np.abs(b).max(initial=0.0), 1e-300)
        return bool(np.abs(a - b).max(initial=0.0) <= SCHWARZ_RTOL * scale)

    if isinstance(model, HomogeneousKSpace):
        ks = np.asarray(k_samples, dtype=float)
        return close(
            np.conj(model.q_par(ks, omega)), model.q_par(ks, mirror)
        ) and close(
            np.conj(model.q_perp(ks, omega)), model.q_perp(ks, mirror)
        )
    if callable(model):
        return close(np.conj(model(omega)), model(mirror))
    if grid is None:
        grid = PeriodicGrid((2, 2, 2))
    q_w = model.q_kernel(grid, omega).matrix
    q_m = model.q_kernel(grid, mirror).matrix
    return close(np.conj(q_w), q_m)


def drude_scalar_response(params: DrudeLorentzParams) -> Callable[[complex], complex]:
    """Scalar causal response Q(w) = -i eps0 w (eps(w) - 1) used by the
    Kramers--Kronig residual; Re Q is even and decays like 1/w^2, Im Q odd."""

    def q(omega: complex) -> complex:
        return -1j * EPS0 * omega * (eval_epsilon(params, omega) - 1.0)

    return q


def standard_kk_grid(n: int = 2048, w_min: float = 1e-3, w_max: float = 1e3) -> np.ndarray:
    """The standard log-dense positive frequency grid for KK checks."""
    return np.geomspace(w_min, w_max, n)


def kramers_kronig_residual(response, omega_grid: np.ndarray) -> float:
    """Relative L2 mismatch between Im Q and the Hilbert transform of Re Q.

    ``response``: scalar callable w -> Q(w), assumed to have even real and
    odd imaginary parts on the real axis (Schwarz symmetry), which folds the
    principal-value transform onto the positive axis:

        Im Q(w) = -(2 w / pi) P int_0^inf Re Q(w') / (w'^2 - w^2) dw'.

    The pole is removed by subtract-the-pole quadrature; beyond the grid a
    c/w'^2 tail (the decay law of Re Q for causal responses vanishing at
    infinity) is integrated analytically.  Returns ~1 for non-causal inputs
    with vanishing Im part, 0 for the zero response.
    """
    w = np.asarray(omega_grid, dtype=float)
    if w.ndim != 1 or w.size < 8:
        raise ResolutionError("omega_grid must be a 1-D grid with >= 8 points")
    if np.any(w <= 0) or np.any(np.diff(w) <= 0):
        raise ResolutionError("omega_grid must be positive and increasing")
    if w[-1] / w[0] < 1e2:
        raise ResolutionError("omega_grid span too small for the tail model")

    qv = np.array([complex(response(x)) for x in w])
    re, im = qv.real, qv.imag
    a, b = w[0], w[-1]
    tail_c = re[-1] * b**2

    norm_im = np.linalg.norm(im)
    norm_re = np.linalg.norm(re)
    if norm_re == 0 and norm_im == 0:
        return 0.0
    if norm_im == 0:
        return 1.0  # flagged: real response with no absorption is non-causal

    # evaluation points: interior of the grid, away from both edges
    mask = (w > 10 * a) & (w < b / 10)
    w_eval = w[mask]
    re_eval = re[mask]

    # derivative of Re Q for the removable point w' = w
    dre = np.gradient(re, w)

    pred = np.empty(w_eval.size)
    for idx, (w0, g0) in enumerate(zip(w_eval, re_eval)):
        with np.errstate(divide="ignore", invalid="ignore"):
            integrand = (re - g0) / (w**2 - w0**2)
        j = np.searchsorted(w, w0)
        if j < w.size and w[j] == w0:
            integrand[j] = dre[j] / (2 * w0)
        core = np.trapezoid(integrand, w)
        # analytic principal value of the subtracted pole on [a, b],
        # constant-head piece on [0, a], and c/w'^2 tail beyond b
        pv_ab = (1.0 / (2 * w0)) * (
            np.log(abs((b - w0) / (b + w0))) - np.log(abs((a - w0) / (a + w0)))
        )
        head = re[0] * (1.0 / (2 * w0)) * np.log(abs((a - w0) / (a + w0)))
        tail = tail_c / w0**2 * (
            (1.0 / (2 * w0)) * np.log((b + w0) / (b - w0)) - 1.0 / b
        )
        pred[idx] = -(2 * w0 / np.pi) * (core + g0 * pv_ab + head + tail)

    im_eval = im[mask]
    denom = np.linalg.norm(im_eval)
    if denom == 0:
        return 1.0
    return float(np.linalg.norm(pred - im_eval) / denom)
