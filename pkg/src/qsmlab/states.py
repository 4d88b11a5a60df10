"""Quantum state representations and density-matrix constructions.

Pure states are unit vectors, mixed states are Hermitian PSD trace-one
matrices.  The central construction is the normalized projection onto a
chosen subspace, together with uniform sphere sampling and ensemble mixing
that realize the same matrix as a Monte Carlo average.
"""

import struct
from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateDistribution,
    DimensionMismatch,
    IndexOutOfRange,
    InvalidEntries,
    InvariantViolation,
    NullConditional,
)
from .hilbert import Subspace, projector, require_hermitian
from .numeric import IncidentLog, policy


@dataclass(frozen=True)
class WaveFunction:
    """Unit-norm complex amplitude vector."""

    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex)
        if amps.ndim != 1 or amps.size < 1:
            raise DimensionMismatch(f"amplitudes must be a 1-D vector, got shape {amps.shape}")
        if not np.all(np.isfinite(amps.real)) and np.all(np.isfinite(amps.imag)):
            raise InvalidEntries("amplitudes contain NaN/Inf")
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > policy.atol:
            raise InvariantViolation(f"wave function norm {norm} deviates from 1")
        amps = amps.copy()
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def normalized(cls, vec) -> "WaveFunction":
        vec = np.asarray(vec, dtype=complex)
        norm = np.linalg.norm(vec)
        if norm <= 0 or not np.isfinite(norm):
            raise DegenerateDistribution("cannot normalize a zero/non-finite vector")
        return cls(vec / norm)

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    def density_matrix(self) -> "DensityMatrix":
        psi = self.amplitudes
        return DensityMatrix(np.outer(psi, psi.conj()))


@dataclass(frozen=True)
class DensityMatrix:
    """Hermitian, positive semidefinite, trace-one operator.

    Construction checks Hermiticity and trace (cheap); positivity is
    verified by :meth:`validate_psd`, which experiments call at checkpoints
    so hot unitary loops do not pay an eigendecomposition per step.
    """

    matrix: np.ndarray

    def __post_init__(self):
        mat = require_hermitian(self.matrix)
        tr = np.trace(mat).real
        if abs(tr - 1.0) > policy.atol:
            raise InvariantViolation(f"trace {tr} deviates from 1")
        mat = mat.copy()
        mat.setflags(write=False)
        object.__setattr__(self, "matrix", mat)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def diagonal(self) -> np.ndarray:
        return self.matrix.diagonal().real

    def validate_psd(self) -> float:
        """Return the minimum eigenvalue, raising if below the PSD floor."""
        lo = float(np.linalg.eigvalsh(self.matrix)[0])
        if lo < policy.psd_floor:
            raise InvariantViolation(f"density matrix eigenvalue {lo} below PSD floor")
        return lo

    @classmethod
    def repaired(cls, mat, incidents: IncidentLog | None = None) -> "DensityMatrix":
        """Build from a matrix that may carry roundoff-negative eigenvalues.

        Eigenvalues in [psd_floor, 0) are clamped to zero (counted as
        incidents) and the matrix renormalized; eigenvalues below the floor
        raise.
        """
        mat = require_hermitian(mat)
        evals, evecs = np.linalg.eigh(mat)
        if evals[0] < policy.psd_floor:
            raise InvariantViolation(f"eigenvalue {evals[0]} below PSD floor; not repairable")
        neg = evals < 0
        if neg.any():
            if incidents is not None:
                incidents.psd_clamps += int(neg.sum())
            evals = np.where(neg, 0.0, evals)
            mat = (evecs * evals[None, :]) @ evecs.conj().T
        tr = np.trace(mat).real
        if tr <= 0:
            raise InvariantViolation("repaired matrix has non-positive trace")
        return cls(mat / tr)


@dataclass(frozen=True)
class IPHSpec:
    """Choice of initial subspace(s): one (strong) or an admissible list (weak)."""

    mode: str                      # "strong" | "weak"
    subspaces: tuple[Subspace, ...]
    selected_index: int = 0

    def __post_init__(self):
        if self.mode not in ("strong", "weak"):
            raise InvariantViolation(f"unknown IPH mode {self.mode!r}")
        if not self.subspaces:
            raise InvariantViolation("IPH spec needs at least one subspace")
        ambients = {s.ambient_dim for s in self.subspaces}
        if len(ambients) != 1:
            raise DimensionMismatch("all admissible subspaces must share one ambient space")


def iph_density_matrix(s: Subspace) -> DensityMatrix:
    """Normalized projection onto the subspace: W = P / dim."""
    return DensityMatrix(projector(s) / s.dim)


def weak_iph(spec: IPHSpec) -> DensityMatrix:
    """Normalized projector of the selected admissible subspace."""
    if spec.mode != "weak":
        raise InvariantViolation("weak_iph requires a weak-mode spec")
    if not 0 <= spec.selected_index < len(spec.subspaces):
        raise IndexOutOfRange(
            f"selected_index {spec.selected_index} outside [0, {len(spec.subspaces)})")
    return iph_density_matrix(spec.subspaces[spec.selected_index])


def sample_mu_s(s: Subspace, rng: np.random.Generator) -> WaveFunction:
    """Uniform draw from the unit sphere of the subspace.

    Independent standard complex Gaussians per basis vector, normalized:
    the unique unitarily invariant construction.
    """
    c = rng.standard_normal(s.dim) + 1j * rng.standard_normal(s.dim)
    return WaveFunction.normalized(s.embed(c))


def mix_ensemble(samples) -> DensityMatrix:
    """(1/M) sum of |psi><psi| over the sample list."""
    samples = list(samples)
    if not samples:
        raise DimensionMismatch("need at least one sample")
    dims = {psi.dim for psi in samples}
    if len(dims) != 1:
        raise DimensionMismatch(f"samples have mixed dimensions {sorted(dims)}")
    stack = np.column_stack([psi.amplitudes for psi in samples])
    return DensityMatrix(stack @ stack.conj().T / stack.shape[1])


def purity(w: DensityMatrix) -> float:
    """trace(W^2); 1 for pure states, 1/d for the normalized d-dim projector."""
    return float(np.vdot(w.matrix, w.matrix).real)


def expectation(op, state) -> float:
    """<psi|A|psi> or tr(A W) for a Hermitian operator."""
    op = np.asarray(op, dtype=complex)
    if isinstance(state, WaveFunction):
        return float(np.vdot(state.amplitudes, op @ state.amplitudes).real)
    return float(np.trace(op @ state.matrix).real)


def state_overlap(a: WaveFunction, b: WaveFunction) -> float:
    """|<a|b>|; equals 1 iff the states agree up to a global phase."""
    if a.dim != b.dim:
        raise DimensionMismatch("overlap of states with different dimensions")
    return float(abs(np.vdot(a.amplitudes, b.amplitudes)))


def conditional_density_matrix(w: DensityMatrix, sys_points: int, env_index: int) -> DensityMatrix:
    """Conditional density matrix of the system factor given the environment
    configuration.

    ``w`` lives on a system x environment configuration grid flattened
    system-major (index = x * env_points + y).  The conditional kernel is
    W_cond(x, x') = W((x, Y), (x', Y)) / sum_x W((x, Y), (x, Y)).
    """
    dim = w.dim
    if dim % sys_points != 0:
        raise DimensionMismatch(f"dimension {dim} not divisible by sys_points {sys_points}")
    env_points = dim // sys_points
    if not 0 <= env_index < env_points:
        raise IndexOutOfRange(f"environment index {env_index} outside [0, {env_points})")
    block = w.matrix.reshape(sys_points, env_points, sys_points, env_points)
    kernel = block[:, env_index, :, env_index]
    norm = np.trace(kernel).real
    if norm < 1e-12:
        raise NullConditional(f"conditional normalization {norm} below 1e-12")
    return DensityMatrix(kernel / norm)


# -- portable binary serialization ------------------------------------------
#
# header: magic b"QSMB", version u16, type tag u16 (1 = wave function,
# 2 = density matrix), dim u64, all little-endian; payload: row-major
# little-endian float64 (re, im) pairs.

_MAGIC = b"QSMB"
_HEADER = struct.Struct("<4sHHQ")
_TAG_WAVEFUNCTION = 1
_TAG_DENSITY = 2


def save_state(path, state) -> None:
    if isinstance(state, WaveFunction):
        tag, payload = _TAG_WAVEFUNCTION, state.amplitudes
    elif isinstance(state, DensityMatrix):
        tag, payload = _TAG_DENSITY, state.matrix
    else:
        raise TypeError(f"cannot serialize {type(state).__name__}")
    dim = payload.shape[0]
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(_MAGIC, 1, tag, dim))
        fh.write(np.ascontiguousarray(payload, dtype="<c16").tobytes())


def load_state(path):
    with open(path, "rb") as fh:
        magic, version, tag, dim = _HEADER.unpack(fh.read(_HEADER.size))
        if magic != _MAGIC:
            raise InvalidEntries(f"bad magic {magic!r}")
        if version != 1:
            raise InvalidEntries(f"unsupported format version {version}")
        raw = np.frombuffer(fh.read(), dtype="<c16")
    if tag == _TAG_WAVEFUNCTION:
        if raw.size != dim:
            raise InvalidEntries(f"expected {dim} amplitudes, got {raw.size}")
        return WaveFunction(raw.astype(complex))
    if tag == _TAG_DENSITY:
        if raw.size != dim * dim:
            raise InvalidEntries(f"expected {dim}x{dim} entries, got {raw.size}")
        return DensityMatrix(raw.astype(complex).reshape(dim, dim))
    raise InvalidEntries(f"unknown type tag {tag}")
