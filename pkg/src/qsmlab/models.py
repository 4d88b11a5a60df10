"""Toy physical systems.

Two families: hard-core lattice chains (occupation basis, XX hopping plus
on-site field) for macrostate statistics, and one or two distinguishable
particles on a 1-D hard-wall grid for guidance and collapse dynamics.

Basis conventions.  Lattice: computational basis indexed by bitstrings,
site j (1-based) is bit (n - j), so the ket |1100> on 4 sites is index 12.
Grid: interior Dirichlet points x_j = j * dq for j = 1..G with dq =
L / (G + 1); two-particle configurations flatten system-major
(index = i1 * G + i2).
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, InvariantViolation, TooLarge
from .numeric import policy
from .states import DensityMatrix, WaveFunction


@dataclass(frozen=True)
class LatticeModel:
    """Chain of two-level sites with conserved total occupation."""

    n_sites: int
    coupling: float
    field: float
    local_dim: int = 2

    def __post_init__(self):
        if self.n_sites < 1:
            raise InvariantViolation("need at least one site")
        if self.local_dim != 2:
            raise InvariantViolation("local dimension is fixed at 2")
        if 2 ** self.n_sites > policy.ambient_cap:
            raise TooLarge(f"2^{self.n_sites} exceeds ambient cap {policy.ambient_cap}")
        for name in ("coupling", "field"):
            if not np.isfinite(getattr(self, name)):
                raise InvariantViolation(f"{name} must be finite")

    @property
    def dim(self) -> int:
        return 2 ** self.n_sites


@dataclass(frozen=True)
class GridModel:
    """One or two particles in a hard-wall box, discretized on G interior points."""

    n_particles: int
    grid_points: int
    box_length: float
    mass: float
    potential: np.ndarray          # sampled on the grid, shape (grid_points,)
    hbar: float = 1.0

    def __post_init__(self):
        if self.n_particles not in (1, 2):
            raise InvariantViolation("n_particles must be 1 or 2")
        if self.grid_points < 8:
            raise InvariantViolation("need at least 8 grid points")
        if self.box_length <= 0 or self.mass <= 0 or self.hbar <= 0:
            raise InvariantViolation("box_length, mass and hbar must be positive")
        pot = np.asarray(self.potential, dtype=float)
        if pot.shape != (self.grid_points,) or not np.all(np.isfinite(pot)):
            raise InvariantViolation(f"potential must be {self.grid_points} finite samples")
        if self.grid_points ** self.n_particles > policy.ambient_cap:
            raise TooLarge("configuration-space dimension exceeds ambient cap")
        pot = pot.copy()
        pot.setflags(write=False)
        object.__setattr__(self, "potential", pot)

    @property
    def dq(self) -> float:
        return self.box_length / (self.grid_points + 1)

    @property
    def positions(self) -> np.ndarray:
        return self.dq * np.arange(1, self.grid_points + 1)

    @property
    def dim(self) -> int:
        return self.grid_points ** self.n_particles


@dataclass(frozen=True)
class MacroVariable:
    """Macro-observable diagonal in the computational basis, with value bins.

    ``diagonal`` holds the eigenvalue of each basis state; ``bin_edges``
    defines half-open bins [e_i, e_{i+1}) (last bin closed) that must cover
    the spectrum.
    """

    diagonal: np.ndarray
    bin_edges: np.ndarray

    def __post_init__(self):
        diag = np.asarray(self.diagonal, dtype=float)
        edges = np.asarray(self.bin_edges, dtype=float)
        if diag.ndim != 1 or edges.ndim != 1 or edges.size < 2:
            raise DimensionMismatch("need a 1-D diagonal and at least two bin edges")
        if not np.all(np.diff(edges) > 0):
            raise InvariantViolation("bin edges must be strictly increasing")
        if diag.min() < edges[0] or diag.max() > edges[-1]:
            raise InvariantViolation("bins do not cover the operator spectrum")
        diag = diag.copy(); diag.setflags(write=False)
        edges = edges.copy(); edges.setflags(write=False)
        object.__setattr__(self, "diagonal", diag)
        object.__setattr__(self, "bin_edges", edges)

    @property
    def dim(self) -> int:
        return self.diagonal.size

    @property
    def n_bins(self) -> int:
        return self.bin_edges.size - 1

    def operator(self) -> np.ndarray:
        return np.diag(self.diagonal.astype(complex))

    def bin_index_of(self, value: float) -> int:
        i = int(np.searchsorted(self.bin_edges, value, side="right") - 1)
        return min(max(i, 0), self.n_bins - 1)

    def bin_members(self, i: int) -> np.ndarray:
        """Boolean mask of basis states whose value falls in bin i."""
        lo, hi = self.bin_edges[i], self.bin_edges[i + 1]
        if i == self.n_bins - 1:
            return (self.diagonal >= lo) & (self.diagonal <= hi)
        return (self.diagonal >= lo) & (self.diagonal < hi)

    def bin_label(self, i: int) -> str:
        """Label from the distinct values in the bin, e.g. "2" or "2-3"."""
        vals = np.unique(self.diagonal[self.bin_members(i)])
        if vals.size == 0:
            return f"[{self.bin_edges[i]:g},{self.bin_edges[i+1]:g})"
        if vals.size == 1:
            return f"{vals[0]:g}"
        return f"{vals[0]:g}-{vals[-1]:g}"


@dataclass(frozen=True)
class MassDensityOperator:
    """Family of per-location mass operators, diagonal in the computational basis.

    ``diagonals[x]`` is the diagonal of M(x); the family sums to the total
    mass operator.
    """

    site_masses: np.ndarray
    diagonals: np.ndarray          # (n_locations, dim)

    def __post_init__(self):
        masses = np.asarray(self.site_masses, dtype=float)
        diags = np.asarray(self.diagonals, dtype=float)
        if diags.ndim != 2:
            raise DimensionMismatch("diagonals must be (n_locations, dim)")
        if np.any(diags < -policy.atol):
            raise InvariantViolation("each M(x) must be positive semidefinite")
        masses = masses.copy(); masses.setflags(write=False)
        diags = diags.copy(); diags.setflags(write=False)
        object.__setattr__(self, "site_masses", masses)
        object.__setattr__(self, "diagonals", diags)

    @property
    def n_locations(self) -> int:
        return self.diagonals.shape[0]

    @property
    def dim(self) -> int:
        return self.diagonals.shape[1]

    def operator(self, x: int) -> np.ndarray:
        return np.diag(self.diagonals[x].astype(complex))

    def total_mass_diagonal(self) -> np.ndarray:
        return self.diagonals.sum(axis=0)


def _occupations(n: int) -> np.ndarray:
    """Per-basis-state occupation of each site; shape (2^n, n), site-major."""
    states = np.arange(2 ** n)
    return np.array([(states >> (n - 1 - j)) & 1 for j in range(n)]).T


def build_spin_chain(n: int, coupling: float, field: float) -> np.ndarray:
    """Nearest-neighbor XX hopping plus on-site field, dimension 2^n.

    H = coupling * sum_j (hop between sites j, j+1) + field * sum_j (n_j - 1/2).
    Conserves total occupation.
    """
    model = LatticeModel(n_sites=n, coupling=coupling, field=field)
    dim = model.dim
    occ = _occupations(n)
    h = np.zeros((dim, dim), dtype=complex)
    np.fill_diagonal(h, field * (occ.sum(axis=1) - n / 2.0))
    for s in range(dim):
        for j in range(n - 1):
            b1, b2 = n - 1 - j, n - 2 - j
            if ((s >> b1) & 1) != ((s >> b2) & 1):
                h[s ^ ((1 << b1) | (1 << b2)), s] += coupling
    return h


def total_occupation(n: int) -> MacroVariable:
    """Total occupation count with one bin per integer value."""
    occ = _occupations(n).sum(axis=1).astype(float)
    return MacroVariable(occ, np.arange(-0.5, n + 1.0, 1.0))


def left_half_occupation(n: int, bin_edges=None) -> MacroVariable:
    """Occupation count over sites 1..n//2; default one bin per integer."""
    if n < 2:
        raise InvariantViolation("need at least two sites")
    half = n // 2
    occ = _occupations(n)[:, :half].sum(axis=1).astype(float)
    if bin_edges is None:
        bin_edges = np.arange(-0.5, half + 1.0, 1.0)
    return MacroVariable(occ, bin_edges)


def box_halves(g: GridModel) -> MacroVariable:
    """Which half of the box the (first) particle occupies: 0 = left, 1 = right."""
    half = (g.positions >= g.box_length / 2).astype(float)
    if g.n_particles == 2:
        half = np.repeat(half, g.grid_points)
    return MacroVariable(half, np.array([-0.5, 0.5, 1.5]))


def build_grid_hamiltonian(g: GridModel) -> np.ndarray:
    """Central-difference kinetic term with hard walls, plus the sampled potential.

    Dirichlet boundaries: the wave function vanishes at 0 and L.  For two
    particles the kinetic term acts on each factor and the potential is
    V(x1) + V(x2).
    """
    gp, dq = g.grid_points, g.dq
    coef = g.hbar ** 2 / (2 * g.mass * dq ** 2)
    h1 = (np.diag(np.full(gp, 2 * coef) + g.potential)
          - np.diag(np.full(gp - 1, coef), 1)
          - np.diag(np.full(gp - 1, coef), -1)).astype(complex)
    if g.n_particles == 1:
        return h1
    eye = np.eye(gp)
    return np.kron(h1, eye) + np.kron(eye, h1)


def lattice_mass_density(n: int, site_masses=None) -> MassDensityOperator:
    """M(x) = m_x * n_x for lattice site x (occupation-weighted site masses)."""
    masses = np.ones(n) if site_masses is None else np.asarray(site_masses, dtype=float)
    if masses.shape != (n,):
        raise DimensionMismatch(f"need {n} site masses, got shape {masses.shape}")
    occ = _occupations(n).astype(float)
    return MassDensityOperator(masses, (masses[:, None] * occ.T))


def grid_mass_density(g: GridModel, particle_masses=None) -> MassDensityOperator:
    """M(x) = sum_k m_k |x><x|_k: mass carried at grid location x."""
    if particle_masses is None:
        particle_masses = np.full(g.n_particles, g.mass)
    particle_masses = np.asarray(particle_masses, dtype=float)
    if particle_masses.shape != (g.n_particles,):
        raise DimensionMismatch("one mass per particle required")
    gp = g.grid_points
    if g.n_particles == 1:
        diags = particle_masses[0] * np.eye(gp)
        return MassDensityOperator(particle_masses, diags)
    diags = np.zeros((gp, gp * gp))
    for x in range(gp):
        d = np.zeros((gp, gp))
        d[x, :] += particle_masses[0]
        d[:, x] += particle_masses[1]
        diags[x] = d.reshape(-1)
    return MassDensityOperator(particle_masses, diags)


def mass_density_field(state, m: MassDensityOperator) -> np.ndarray:
    """m(x) = tr(M(x) W) (or <psi|M(x)|psi>) for each location x."""
    if isinstance(state, WaveFunction):
        weights = np.abs(state.amplitudes) ** 2
    elif isinstance(state, DensityMatrix):
        weights = state.diagonal()
    else:
        raise TypeError(f"expected WaveFunction or DensityMatrix, got {type(state).__name__}")
    if weights.size != m.dim:
        raise DimensionMismatch(f"state dim {weights.size} != operator dim {m.dim}")
    out = m.diagonals @ weights
    if np.any(out < -1e-10):
        raise InvariantViolation("negative mass density")
    return out
