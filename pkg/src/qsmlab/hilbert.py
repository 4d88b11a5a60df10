"""Dense complex linear algebra substrate.

Vectors are 1-D complex arrays, Hermitian operators are square complex
arrays, and a :class:`Subspace` stores an ordered orthonormal basis as the
columns of a matrix.  Everything is finite dimensional and dense; the
ambient cap lives in the numeric policy.
"""

from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionMismatch,
    EmptyShell,
    InvalidEntries,
    InvariantViolation,
    NotHermitian,
    RankDeficient,
    TooLarge,
)
from .numeric import policy


def as_vector(v) -> np.ndarray:
    v = np.asarray(v, dtype=complex)
    if v.ndim != 1 or v.size < 1:
        raise DimensionMismatch(f"expected a 1-D complex vector, got shape {v.shape}")
    if not np.all(np.isfinite(v.real)) and np.all(np.isfinite(v.imag)):
        raise InvalidEntries("vector contains NaN/Inf entries")
    return v


def require_hermitian(mat, *, tol: float | None = None) -> np.ndarray:
    """Return ``mat`` as a complex array, raising NotHermitian if it fails
    the relative Frobenius symmetry test."""
    mat = np.asarray(mat, dtype=complex)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise NotHermitian(f"expected a square matrix, got shape {mat.shape}")
    if not np.all(np.isfinite(mat.real)) and np.all(np.isfinite(mat.imag)):
        raise NotHermitian("matrix contains NaN/Inf entries")
    tol = policy.atol if tol is None else tol
    scale = np.linalg.norm(mat)
    if np.linalg.norm(mat - mat.conj().T) > tol * max(scale, 1.0):
        raise NotHermitian("matrix is not Hermitian within tolerance")
    return mat


@dataclass(frozen=True)
class Subspace:
    """Ordered orthonormal basis (columns) of a subspace of C^ambient_dim."""

    basis: np.ndarray

    def __post_init__(self):
        basis = np.asarray(self.basis, dtype=complex)
        if basis.ndim != 2:
            raise DimensionMismatch(f"basis must be a 2-D column matrix, got {basis.shape}")
        ambient, dim = basis.shape
        if not 1 <= dim <= ambient:
            raise DimensionMismatch(f"need 1 <= dim <= ambient_dim, got dim={dim}, ambient={ambient}")
        if ambient > policy.ambient_cap:
            raise TooLarge(f"ambient dimension {ambient} exceeds cap {policy.ambient_cap}")
        gram = basis.conj().T @ basis
        if np.max(np.abs(gram - np.eye(dim))) > policy.atol:
            raise InvariantViolation("basis columns are not orthonormal within tolerance")
        basis = basis.copy()
        basis.setflags(write=False)
        object.__setattr__(self, "basis", basis)

    @property
    def ambient_dim(self) -> int:
        return self.basis.shape[0]

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    def coords(self, vec: np.ndarray) -> np.ndarray:
        """Coefficients of ``vec`` in this basis (orthogonal projection)."""
        return self.basis.conj().T @ vec

    def embed(self, coords: np.ndarray) -> np.ndarray:
        """Map subspace coordinates back to ambient coordinates."""
        return self.basis @ coords


def orthonormalize(vectors) -> Subspace:
    """Orthonormalize a list of same-dimension vectors into a Subspace.

    Raises RankDeficient when the inputs are linearly dependent beyond the
    rank tolerance.  The result is the Gram-Schmidt basis (QR with the R
    diagonal rotated real-positive), so already-orthonormal input passes
    through unchanged.
    """
    cols = [as_vector(v) for v in vectors]
    if not cols:
        raise DimensionMismatch("need at least one vector")
    dims = {c.size for c in cols}
    if len(dims) != 1:
        raise DimensionMismatch(f"vectors have mixed dimensions {sorted(dims)}")
    a = np.column_stack(cols)
    svals = np.linalg.svd(a, compute_uv=False)
    if svals[-1] <= policy.rank_tol * svals[0]:
        raise RankDeficient(f"input list is rank deficient (sigma_min/sigma_max = {svals[-1]/svals[0]:.2e})")
    q, r = np.linalg.qr(a)
    diag = np.diagonal(r)
    phases = diag / np.abs(diag)
    return Subspace(q * phases[None, :])


def projector(s: Subspace) -> np.ndarray:
    """P = sum_b |b><b| over the subspace basis."""
    return s.basis @ s.basis.conj().T


def spectral_decompose(h) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (ascending) and orthonormal eigenvector columns of a
    Hermitian matrix."""
    h = require_hermitian(h)
    evals, evecs = np.linalg.eigh(h)
    return evals, evecs


def energy_shell(h, energy: float, delta_e: float) -> Subspace:
    """Span of eigenvectors with eigenvalue in the closed window
    [energy, energy + delta_e]."""
    if delta_e <= 0:
        raise EmptyShell(f"delta_e must be positive, got {delta_e}")
    evals, evecs = spectral_decompose(h)
    return shell_from_spectrum(evals, evecs, energy, delta_e)


def shell_from_spectrum(evals, evecs, energy: float, delta_e: float) -> Subspace:
    """energy_shell for a precomputed spectral decomposition."""
    mask = (evals >= energy) & (evals <= energy + delta_e)
    if not mask.any():
        raise EmptyShell(f"no eigenvalue in [{energy}, {energy + delta_e}]")
    return Subspace(evecs[:, mask])
