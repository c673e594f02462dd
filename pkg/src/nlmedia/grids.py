"""Periodic spatial grids and discretized dyadic integral kernels.

A dyadic integral kernel A(r, r', w) acting as (Af)(r) = \\int A(r, r') f(r') d^3r'
is represented on a periodic grid by the weighted matrix

    A~ = W^{1/2} A W^{1/2},

where W is the diagonal of quadrature weights and A the matrix of kernel
samples.  In this representation continuum Hermiticity, positivity and
composition map exactly onto matrix Hermiticity, positivity and matrix
products, so all operator calculus reduces to dense linear algebra.
Matrix indices are point-major: flat index = 3*i + a for grid point i and
Cartesian component a.
"""

from __future__ import annotations

import functools
import io
from dataclasses import dataclass, field

import numpy as np

_MAGIC = b"NLMK"
_VERSION = 1


class GridMismatchError(ValueError):
    """Raised when two kernels do not live on the same grid."""


@dataclass(frozen=True)
class PeriodicGrid:
    """Uniform periodic grid on a 3-torus.

    Parameters
    ----------
    shape : tuple of int
        Number of points along each axis (use 1 to flatten an axis).
    lengths : tuple of float
        Box lengths along each axis.  Default is a (2*pi)^3 box so the
        wave-vector lattice is integer-valued.
    """

    shape: tuple[int, int, int]
    lengths: tuple[float, float, float] = (2.0 * np.pi,) * 3

    def __post_init__(self):
        if len(self.shape) != 3 or any(int(n) < 1 for n in self.shape):
            raise ValueError(f"shape must be three positive ints, got {self.shape}")
        if len(self.lengths) != 3 or any(l <= 0 for l in self.lengths):
            raise ValueError(f"lengths must be three positive floats, got {self.lengths}")
        object.__setattr__(self, "shape", tuple(int(n) for n in self.shape))
        object.__setattr__(self, "lengths", tuple(float(l) for l in self.lengths))

    @property
    def n_points(self) -> int:
        return int(np.prod(self.shape))

    @property
    def spacings(self) -> np.ndarray:
        return np.array(self.lengths) / np.array(self.shape)

    @property
    def weight(self) -> float:
        """Quadrature weight of a single point (cell volume)."""
        return float(np.prod(self.spacings))

    @property
    def volume(self) -> float:
        return float(np.prod(self.lengths))

    @property
    def points(self) -> np.ndarray:
        """(N, 3) array of sample positions, C-ordered over (ix, iy, iz)."""
        return _points(self)

    @property
    def kvecs(self) -> np.ndarray:
        """(N, 3) wave vectors at which mode symbols are evaluated.

        For even axis sizes the unpaired Nyquist component (-n/2, which has
        no +n/2 partner on the mode lattice) is replaced by 0.  This is the
        symmetric branch choice for band-limit modes: it makes every kernel
        built from a symbol with S^T(-k) = S(k) exactly reciprocal, while
        per-mode algebraic identities (square roots, gauges, inverses)
        remain exact because all modules evaluate symbols on this same
        lattice.
        """
        return _kvecs(self, symmetrized=True)

    @property
    def mode_kvecs(self) -> np.ndarray:
        """(N, 3) true wave vectors of the grid's Fourier modes (Nyquist
        components kept); these define the plane-wave phases."""
        return _kvecs(self, symmetrized=False)

    @property
    def phases(self) -> np.ndarray:
        """(N, N) matrix E[i, m] = exp(i k_m . r_i), k_m the true mode
        wave vectors."""
        return _phases(self)


@functools.lru_cache(maxsize=32)
def _points(grid: PeriodicGrid) -> np.ndarray:
    axes = [np.arange(n) * h for n, h in zip(grid.shape, grid.spacings)]
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([m.ravel() for m in mesh], axis=1)
    pts.setflags(write=False)
    return pts


@functools.lru_cache(maxsize=64)
def _kvecs(grid: PeriodicGrid, symmetrized: bool) -> np.ndarray:
    axes = []
    for n, h in zip(grid.shape, grid.spacings):
        ax = 2.0 * np.pi * np.fft.fftfreq(n, d=h)
        if symmetrized and n % 2 == 0:
            ax = ax.copy()
            ax[n // 2] = 0.0  # unpaired Nyquist mode -> symmetric branch
        axes.append(ax)
    mesh = np.meshgrid(*axes, indexing="ij")
    ks = np.stack([m.ravel() for m in mesh], axis=1)
    ks.setflags(write=False)
    return ks


@functools.lru_cache(maxsize=8)
def _phases(grid: PeriodicGrid) -> np.ndarray:
    e = np.exp(1j * grid.points @ grid.mode_kvecs.T)
    e.setflags(write=False)
    return e


@dataclass
class DiscreteKernel:
    """A dyadic kernel in the symmetrized weighted representation.

    ``matrix`` has shape (3N, 3N) with N = grid.n_points and stores
    W^{1/2} A W^{1/2}; see module docstring.
    """

    grid: PeriodicGrid
    matrix: np.ndarray = field(repr=False)

    def __post_init__(self):
        n = 3 * self.grid.n_points
        m = np.asarray(self.matrix, dtype=complex)
        if m.shape != (n, n):
            raise GridMismatchError(
                f"matrix shape {m.shape} does not match grid dimension {n}"
            )
        self.matrix = m

    # -- algebra ---------------------------------------------------------
    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def dagger(self) -> "DiscreteKernel":
        return DiscreteKernel(self.grid, self.matrix.conj().T)

    def norm(self) -> float:
        return float(np.linalg.norm(self.matrix))

    def _check_same_grid(self, other: "DiscreteKernel"):
        if self.grid != other.grid:
            raise GridMismatchError("kernels live on different grids")

    def __matmul__(self, other: "DiscreteKernel") -> "DiscreteKernel":
        self._check_same_grid(other)
        return DiscreteKernel(self.grid, self.matrix @ other.matrix)

    def __add__(self, other: "DiscreteKernel") -> "DiscreteKernel":
        self._check_same_grid(other)
        return DiscreteKernel(self.grid, self.matrix + other.matrix)

    def __sub__(self, other: "DiscreteKernel") -> "DiscreteKernel":
        self._check_same_grid(other)
        return DiscreteKernel(self.grid, self.matrix - other.matrix)

    def __mul__(self, c: complex) -> "DiscreteKernel":
        return DiscreteKernel(self.grid, self.matrix * c)

    __rmul__ = __mul__

    def __neg__(self) -> "DiscreteKernel":
        return DiscreteKernel(self.grid, -self.matrix)

    # -- structural checks ------------------------------------------------
    def hermiticity_defect(self) -> float:
        """Relative norm of the anti-Hermitian part."""
        scale = self.norm() or 1.0
        return float(np.linalg.norm(self.matrix - self.matrix.conj().T)) / scale

    def reciprocity_defect(self) -> float:
        """Relative defect of A(r, r') = A^T(r', r) (plain matrix symmetry
        in the point-major layout with uniform weights)."""
        scale = self.norm() or 1.0
        return float(np.linalg.norm(self.matrix - self.matrix.T)) / scale


def identity_kernel(grid: PeriodicGrid) -> DiscreteKernel:
    """The Dirac-delta kernel I * delta(r - r')."""
    return DiscreteKernel(grid, np.eye(3 * grid.n_points, dtype=complex))


def from_local_tensor(grid: PeriodicGrid, tensors: np.ndarray) -> DiscreteKernel:
    """Kernel T(r) delta(r - r') from per-point 3x3 tensors, shape (N, 3, 3).

    In the weighted representation this is exactly the block-diagonal matrix
    of the tensors (the delta absorbs the quadrature weight).
    """
    t = np.asarray(tensors, dtype=complex)
    n = grid.n_points
    if t.shape == (3, 3):
        t = np.broadcast_to(t, (n, 3, 3))
    if t.shape != (n, 3, 3):
        raise GridMismatchError(f"tensor field shape {t.shape} != ({n}, 3, 3)")
    m = np.zeros((n, 3, n, 3), dtype=complex)
    idx = np.arange(n)
    m[idx, :, idx, :] = t
    return DiscreteKernel(grid, m.reshape(3 * n, 3 * n))


def from_local_scalar(grid: PeriodicGrid, values) -> DiscreteKernel:
    """Kernel f(r) I delta(r - r') from a per-point scalar field (N,)."""
    v = np.asarray(values, dtype=complex)
    n = grid.n_points
    if v.ndim == 0:
        v = np.full(n, complex(v))
    if v.shape != (n,):
        raise GridMismatchError(f"scalar field shape {v.shape} != ({n},)")
    eye = np.eye(3)
    return from_local_tensor(grid, v[:, None, None] * eye[None, :, :])


def from_symbol(grid: PeriodicGrid, symbols: np.ndarray) -> DiscreteKernel:
    """Translation-invariant kernel from its k-space symbol S(k).

    ``symbols`` has shape (N, 3, 3), one 3x3 tensor per grid mode in
    ``grid.kvecs`` order.  The kernel acts on grid plane waves exactly as
    multiplication by S(k); eigenvalues of the weighted matrix are the
    eigenvalues of the per-mode symbols.
    """
    s = np.asarray(symbols, dtype=complex)
    n = grid.n_points
    if s.shape != (n, 3, 3):
        raise GridMismatchError(f"symbol shape {s.shape} != ({n}, 3, 3)")
    e = grid.phases
    ec = e.conj()
    m = np.empty((n, 3, n, 3), dtype=complex)
    for a in range(3):
        for b in range(3):
            m[:, a, :, b] = (e * s[:, a, b]) @ ec.T / n
    return DiscreteKernel(grid, m.reshape(3 * n, 3 * n))


def symbol_at(kernel: DiscreteKernel, mode: int) -> np.ndarray:
    """Recover the 3x3 symbol of a translation-invariant kernel at one mode."""
    n = kernel.grid.n_points
    em = kernel.grid.phases[:, mode]
    m = kernel.matrix.reshape(n, 3, n, 3)
    return np.einsum("i,iajb,j->ab", em.conj(), m, em) / n


def tensor_projectors(kvecs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Longitudinal and transverse projectors k k^T / k^2 and I - k k^T / k^2
    per wave vector; the k = 0 mode is assigned wholly to the transverse
    projector (torus convention).

    Returns (P_par, P_perp), each of shape (N, 3, 3).
    """
    k = np.asarray(kvecs, dtype=float)
    k2 = np.einsum("ij,ij->i", k, k)
    safe = np.where(k2 > 0, k2, 1.0)
    p_par = np.einsum("ia,ib->iab", k, k) / safe[:, None, None]
    p_par[k2 == 0] = 0.0
    p_perp = np.eye(3)[None, :, :] - p_par
    return p_par, p_perp


def cross_matrices(kvecs: np.ndarray) -> np.ndarray:
    """Antisymmetric matrices [k]_x with [k]_x v = k x v, shape (N, 3, 3)."""
    k = np.asarray(kvecs, dtype=float)
    n = k.shape[0]
    m = np.zeros((n, 3, 3))
    m[:, 0, 1] = -k[:, 2]
    m[:, 0, 2] = k[:, 1]
    m[:, 1, 0] = k[:, 2]
    m[:, 1, 2] = -k[:, 0]
    m[:, 2, 0] = -k[:, 1]
    m[:, 2, 1] = k[:, 0]
    return m


def curl_kernel(grid: PeriodicGrid) -> DiscreteKernel:
    """The curl operator as a kernel: spectral symbol i [k]_x (exact on the
    grid's band limit).  Hermitian, since [k]_x is real antisymmetric."""
    return from_symbol(grid, 1j * cross_matrices(grid.kvecs))


# -- serialization ---------------------------------------------------------

def save_kernel(kernel: DiscreteKernel, path) -> None:
    """Write a kernel to the binary container (see README: magic 'NLMK',
    version, grid shape/lengths, dimension, row-major complex doubles)."""
    with open(path, "wb") as f:
        f.write(_MAGIC)
        np.array([_VERSION], dtype="<u4").tofile(f)
        np.array(kernel.grid.shape, dtype="<u4").tofile(f)
        np.array(kernel.grid.lengths, dtype="<f8").tofile(f)
        np.array([kernel.dim], dtype="<u8").tofile(f)
        np.ascontiguousarray(kernel.matrix, dtype="<c16").tofile(f)


def load_kernel(path) -> DiscreteKernel:
    with open(path, "rb") as f:
        magic = f.read(4)
        if magic != _MAGIC:
            raise ValueError(f"not a kernel container (magic {magic!r})")
        version = int(np.fromfile(f, dtype="<u4", count=1)[0])
        if version != _VERSION:
            raise ValueError(f"unsupported container version {version}")
        shape = tuple(int(x) for x in np.fromfile(f, dtype="<u4", count=3))
        lengths = tuple(float(x) for x in np.fromfile(f, dtype="<f8", count=3))
        dim = int(np.fromfile(f, dtype="<u8", count=1)[0])
        matrix = np.fromfile(f, dtype="<c16", count=dim * dim).reshape(dim, dim)
    return DiscreteKernel(PeriodicGrid(shape, lengths), matrix)


def save_kernel_csv(kernel: DiscreteKernel, path) -> None:
    """Write a kernel as CSV (small grids): metadata comment lines, then
    header ``row,col,re,im`` and one line per matrix entry."""
    buf = io.StringIO()
    buf.write(f"# nlmedia-kernel,v{_VERSION}\n")
    buf.write("# shape,%d,%d,%d\n" % kernel.grid.shape)
    buf.write("# lengths,%.17g,%.17g,%.17g\n" % kernel.grid.lengths)
    buf.write("row,col,re,im\n")
    m = kernel.matrix
    for i in range(m.shape[0]):
        for j in range(m.shape[1]):
            buf.write(f"{i},{j},{m[i, j].real:.17g},{m[i, j].imag:.17g}\n")
    with open(path, "w", encoding="utf-8") as f:
        f.write(buf.getvalue())


def load_kernel_csv(path) -> DiscreteKernel:
    shape = None
    lengths = None
    rows = []
    with open(path, "r", encoding="utf-8") as f:
        for line in f:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                parts = line[1:].strip().split(",")
                if parts[0] == "shape":
                    shape = tuple(int(x) for x in parts[1:4])
                elif parts[0] == "lengths":
                    lengths = tuple(float(x) for x in parts[1:4])
                continue
            if line.startswith("row,"):
                continue
            i, j, re, im = line.split(",")
            rows.append((int(i), int(j), float(re), float(im)))
    if shape is None or lengths is None:
        raise ValueError("CSV kernel missing grid metadata")
    grid = PeriodicGrid(shape, lengths)
    n = 3 * grid.n_points
    m = np.zeros((n, n), dtype=complex)
    for i, j, re, im in rows:
        m[i, j] = re + 1j * im
    return DiscreteKernel(grid, m)
