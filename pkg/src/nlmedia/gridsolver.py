"""Direct small-grid solver for the dyadic Helmholtz equation.

Assembles H = curl curl - (w^2/c^2) I delta - i mu0 w Q on a periodic grid
(curl-curl realized spectrally, hence exact on the grid's band limit), solves
H G = I densely, and verifies the fluctuation-dissipation integral relation
Im G = mu0 w G sigma G^dag at real frequency.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import IllConditionedError, NlmediaError
from .grids import DiscreteKernel, PeriodicGrid, from_symbol
from .operator_algebra import ContractError
from .units import MU0

RECIPROCITY_TOL = 1e-12


def curl_curl_kernel(grid: PeriodicGrid) -> DiscreteKernel:
    """Spectral curl-curl kernel; symbol k^2 I - k k^T (transverse modes get
    k^2, longitudinal modes 0)."""
    k = grid.kvecs
    k2 = np.einsum("ij,ij->i", k, k)
    sym = k2[:, None, None] * np.eye(3)[None, :, :] - np.einsum(
        "ia,ib->iab", k, k
    )
    return from_symbol(grid, sym.astype(complex))


@dataclass
class HelmholtzOperator:
    """The dyadic Helmholtz kernel H = curl curl - w^2 I - i mu0 w Q
    (natural units c = 1), together with the ingredients needed for
    downstream verification."""

    kernel: DiscreteKernel
    omega: complex
    q_kernel: DiscreteKernel
    decay_length_estimate: float

    @property
    def grid(self) -> PeriodicGrid:
        return self.kernel.grid

    def preflight_ok(self) -> bool:
        """True when the torus is at least one estimated loss-decay length
        across, so the periodic images are damped and the torus emulates the
        decay-at-infinity boundary condition."""
        return min(self.grid.lengths) >= self.decay_length_estimate


@dataclass
class GreenSolution:
    """Dense inverse of a Helmholtz operator with its verification data."""

    green: DiscreteKernel
    omega: complex
    residual: float
    reciprocity: float

    @property
    def grid(self) -> PeriodicGrid:
        return self.green.grid


def _decay_length(q: DiscreteKernel, omega: complex) -> float:
    """Crude loss-decay-length estimate from the mean local conductivity:
    eps_eff = 1 + i tr<Q>/(3 w), decay length 1/(w Im sqrt(eps_eff))."""
    n = q.grid.n_points
    diag = np.einsum("ii->", q.matrix) / n
    if omega == 0:
        return np.inf
    eps_eff = 1.0 + 1j * diag / (3.0 * omega)
    rate = np.imag(np.sqrt(eps_eff) * omega)
    if rate <= 0:
        return np.inf
    return float(1.0 / rate)


def build_H(q: DiscreteKernel, omega: complex, grid: PeriodicGrid | None = None) -> HelmholtzOperator:
    """Assemble the Helmholtz operator for conductivity kernel Q at frequency
    omega.  Q must be reciprocal; the assembled H then is too."""
    if grid is None:
        grid = q.grid
    elif grid is not q.grid and grid != q.grid:
        raise ContractError("grid does not match the conductivity kernel's grid")
    rec = q.reciprocity_defect()
    if rec > RECIPROCITY_TOL:
        raise ContractError(
            f"conductivity kernel not reciprocal: defect {rec:.3e} > "
            f"{RECIPROCITY_TOL:g}"
        )
    cc = curl_curl_kernel(grid)
    n = q.matrix.shape[0]
    h = cc.matrix - (omega**2) * np.eye(n) - 1j * MU0 * omega * q.matrix
    op = HelmholtzOperator(
        kernel=DiscreteKernel(grid, h),
        omega=omega,
        q_kernel=q,
        decay_length_estimate=_decay_length(q, omega),
    )
    hrec = op.kernel.reciprocity_defect()
    if hrec > RECIPROCITY_TOL:
        raise ContractError(f"assembled H not reciprocal: defect {hrec:.3e}")
    return op


def solve_green(op: HelmholtzOperator) -> GreenSolution:
    """Dense solve of H G = I.  Raises on loss-deficient (singular or
    ill-conditioned) operators; reports the solve residual and the
    reciprocity defect G(r, r') = G^T(r', r)."""
    h = op.kernel.matrix
    n = h.shape[0]
    cond = np.linalg.cond(h)
    if not np.isfinite(cond) or cond > 1e12:
        raise IllConditionedError(
            f"Helmholtz operator condition number {cond:.3e} > 1e12; "
            "medium is loss-deficient at this frequency"
        )
    g = np.linalg.solve(h, np.eye(n, dtype=complex))
    residual = float(np.linalg.norm(h @ g - np.eye(n)) / np.sqrt(n))
    green = DiscreteKernel(op.grid, g)
    return GreenSolution(
        green=green,
        omega=op.omega,
        residual=residual,
        reciprocity=green.reciprocity_defect(),
    )


def verify_integral_relation(
    sol: GreenSolution, sigma: DiscreteKernel, omega: float
) -> float:
    """Relative residual of the fluctuation-dissipation integral relation

        Im G(r, r') = mu0 w [G sigma G^dag](r, r')      (w real > 0)

    with both sides assembled independently from the dense solution and the
    Hermitian conductivity part."""
    if np.imag(omega) != 0:
        raise ContractError("integral relation requires real frequency")
    if abs(complex(sol.omega) - complex(omega)) > 0:
        raise ContractError("frequency does not match the Green solution")
    if sigma.grid != sol.grid:
        raise ContractError("sigma kernel lives on a different grid")
    g = sol.green.matrix
    lhs = (g - g.conj().T) / 2j
    rhs = MU0 * float(omega) * (g @ sigma.matrix @ g.conj().T)
    denom = np.linalg.norm(lhs)
    if denom == 0:
        raise NlmediaError("Im G vanishes; lossless degenerate case")
    return float(np.linalg.norm(rhs - lhs) / denom)


def schwarz_green_defect(
    q_plus: DiscreteKernel, q_minus: DiscreteKernel, omega: complex
) -> float:
    """Compute G at omega and at -conj(omega) (with the correspondingly
    reflected conductivity kernels) and return the relative defect of the
    reflection property G*(w) = G(-w*)."""
    g1 = solve_green(build_H(q_plus, omega)).green.matrix
    g2 = solve_green(build_H(q_minus, -np.conj(omega))).green.matrix
    return float(
        np.linalg.norm(np.conj(g1) - g2) / max(np.linalg.norm(g1), 1e-300)
    )
