"""Dense lattice Hamiltonians on a Dirichlet box, used as the independent
cross-check for the Monte Carlo kernel estimates and as the eigenvalue
counter behind the density-of-states runs.

The kinetic term is the central second difference scaled by hbar^2/2; a
vector potential enters through complex phases on the hopping links
(Peierls substitution), evaluated at link midpoints.  Kernel entries come
from a full eigendecomposition, normalized by the cell volume so they
approximate the continuum kernel.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eigh

from .errors import TooLargeError
from .potentials import ScalarPotential, VectorPotential, ZeroVector

__all__ = [
    "MATRIX_SIZE_CAP",
    "LatticeSpec",
    "LatticeOperator",
    "build_lattice_hamiltonian",
    "oracle_kernel",
    "count_states",
    "site_index",
]

MATRIX_SIZE_CAP = 4096


@dataclass(frozen=True)
class LatticeSpec:
    """Uniform grid of interior points of a Dirichlet box centred at 0."""

    dim: int
    points_per_side: int
    box_length: float

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise ValueError("lattice dim must be 1 or 2")
        if self.points_per_side < 1:
            raise ValueError("points_per_side must be at least 1")
        if self.box_length <= 0:
            raise ValueError("box_length must be positive")
        if self.size > MATRIX_SIZE_CAP:
            raise TooLargeError(
                f"lattice of {self.size} sites exceeds the dense cap {MATRIX_SIZE_CAP}"
            )

    @property
    def spacing(self) -> float:
        return self.box_length / (self.points_per_side + 1)

    @property
    def size(self) -> int:
        return self.points_per_side**self.dim

    @property
    def volume(self) -> float:
        return self.box_length**self.dim

    def axis(self) -> np.ndarray:
        """Interior coordinates along one axis."""
        h = self.spacing
        return -0.5 * self.box_length + h * np.arange(1, self.points_per_side + 1)

    def sites(self) -> np.ndarray:
        """All site coordinates, shape (size, dim), row-major in site index."""
        ax = self.axis()
        if self.dim == 1:
            return ax[:, None]
        x, y = np.meshgrid(ax, ax, indexing="ij")
        return np.stack([x.ravel(), y.ravel()], axis=1)


@dataclass
class LatticeOperator:
    matrix: np.ndarray
    spec: LatticeSpec
    hbar: float
    _eig: tuple | None = field(default=None, repr=False)

    @property
    def is_real(self) -> bool:
        return not np.iscomplexobj(self.matrix)

    def eigensystem(self):
        if self._eig is None:
            vals, vecs = eigh(self.matrix)
            self._eig = (vals, vecs)
        return self._eig

    def eigenvalues(self) -> np.ndarray:
        return self.eigensystem()[0]

    def hermiticity_residual(self) -> float:
        m = self.matrix
        scale = float(np.abs(m).max()) or 1.0
        return float(np.abs(m - m.conj().T).max()) / scale


def build_lattice_hamiltonian(
    spec: LatticeSpec,
    v: ScalarPotential,
    a: VectorPotential,
    hbar: float = 1.0,
) -> LatticeOperator:
    """Dense H = (P - a)^2 / 2 + v on the Dirichlet box.

    Interior stencil for a = 0 is -(hbar^2/2) times the central second
    difference plus v on the diagonal; links pick up phases
    exp(-i h a_mu(midpoint) / hbar) when a vector potential is present.
    """
    if hbar <= 0:
        raise ValueError("hbar must be positive")
    h = spec.spacing
    hop = hbar**2 / (2.0 * h * h)
    sites = spec.sites()
    n = spec.size
    magnetic = not isinstance(a, ZeroVector)
    dtype = complex if magnetic else float
    mat = np.zeros((n, n), dtype=dtype)

    diag = 2.0 * spec.dim * hop + v.evaluate(sites)
    mat[np.arange(n), np.arange(n)] = diag

    m = spec.points_per_side
    if spec.dim == 1:
        rows = np.arange(n - 1)
        cols = rows + 1
        links = [(rows, cols, 0)]
    else:
        grid_idx = np.arange(n).reshape(m, m)
        links = [
            (grid_idx[:-1, :].ravel(), grid_idx[1:, :].ravel(), 0),
            (grid_idx[:, :-1].ravel(), grid_idx[:, 1:].ravel(), 1),
        ]

    for rows, cols, axis in links:
        if magnetic:
            mids = 0.5 * (sites[rows] + sites[cols])
            a_mid = a.evaluate(mids)[:, axis]
            phase = np.exp(-1j * h * a_mid / hbar)
        else:
            phase = 1.0
        mat[rows, cols] = -hop * phase
        mat[cols, rows] = np.conj(mat[rows, cols])

    return LatticeOperator(mat, spec, hbar)


def oracle_kernel(opr: LatticeOperator, beta: float, i: int, j: int) -> complex:
    """Continuum-normalized kernel entry [exp(-beta H)]_{ij} / h^dim."""
    if beta <= 0:
        raise ValueError("beta must be positive")
    vals, vecs = opr.eigensystem()
    weights = np.exp(-beta * vals)
    entry = np.sum(vecs[i] * weights * np.conj(vecs[j]))
    entry /= opr.spec.spacing**opr.spec.dim
    return complex(entry) if not opr.is_real else complex(float(entry.real))


def count_states(opr: LatticeOperator, energy: float) -> int:
    """Number of eigenvalues <= energy (ties count as below)."""
    vals = opr.eigenvalues()
    return int(np.searchsorted(vals, energy, side="right"))


def site_index(spec: LatticeSpec, point) -> int:
    """Index of the lattice site nearest to the given point."""
    p = np.atleast_1d(np.asarray(point, dtype=float))
    if p.shape != (spec.dim,):
        raise ValueError(f"point {point!r} does not have dimension {spec.dim}")
    ax = spec.axis()
    idx = [int(np.clip(np.argmin(np.abs(ax - c)), 0, spec.points_per_side - 1)) for c in p]
    if spec.dim == 1:
        return idx[0]
    return idx[0] * spec.points_per_side + idx[1]
