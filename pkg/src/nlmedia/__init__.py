"""nlmedia: classical electrodynamics of arbitrary linear (nonlocal) media.

Subpackages by concern:

- ``grids``: periodic grids and discretized two-point kernels
- ``response``: material models (conductivity kernels and k-space symbols)
- ``operator_algebra``: noise-kernel square roots, gauges, projectors
- ``gridsolver``: dense small-grid Green solver and fluctuation checks
- ``bulk``: homogeneous-medium propagators, layered transforms, impedances
- ``slab``: two-interface surface-admittance method and slab Green tensor
- ``tm_oracle``: independent closed-form references for local media
- ``config`` / ``checks`` / ``cli``: scenario plumbing and verifications

All internal quantities are in natural units c = eps0 = mu0 = 1 (see
``units`` for SI conversion at the boundary).
"""

from .errors import (
    AccuracyError,
    ConfigError,
    DomainError,
    GuidedWaveError,
    IllConditionedError,
    LayoutError,
    ModelValidityError,
    NlmediaError,
    PositivityError,
    ResolutionError,
    SingularityError,
)
from .grids import DiscreteKernel, PeriodicGrid
from .response import (
    CellLattice,
    DrudeLorentzParams,
    HomogeneousKSpace,
    LocalAnisotropic,
    MagnetoDielectric,
    drude_model,
    hydrodynamic_model,
    local_dielectric_model,
    magnetodielectric_homogeneous_model,
    vacuum_model,
)
from .operator_algebra import sqrt_kernel, sqrt_defect
from .gridsolver import build_H, solve_green, verify_integral_relation
from .bulk import (
    QuadratureSpec,
    bulk_green_k,
    dispersion,
    kliever_fuchs,
    partial_fourier,
    partial_fourier_gamma,
)
from .slab import (
    single_interface_admittance,
    slab_admittance,
    slab_green,
)

__version__ = "0.1.0"

__all__ = [
    "AccuracyError", "ConfigError", "DomainError", "GuidedWaveError",
    "IllConditionedError", "LayoutError", "ModelValidityError",
    "NlmediaError", "PositivityError", "ResolutionError", "SingularityError",
    "DiscreteKernel", "PeriodicGrid",
    "CellLattice", "DrudeLorentzParams", "HomogeneousKSpace",
    "LocalAnisotropic", "MagnetoDielectric",
    "drude_model", "hydrodynamic_model", "local_dielectric_model",
    "magnetodielectric_homogeneous_model", "vacuum_model",
    "sqrt_kernel", "sqrt_defect",
    "build_H", "solve_green", "verify_integral_relation",
    "QuadratureSpec", "bulk_green_k", "dispersion", "kliever_fuchs",
    "partial_fourier", "partial_fourier_gamma",
    "single_interface_admittance", "slab_admittance", "slab_green",
    "__version__",
]
