"""Spontaneous collapse as a Poisson-timed jump process.

Gaussian localization events of width sigma hit particle k at rate lambda
each; between hits the state evolves unitarily.  Both the wave-function
version (collapse center drawn from ||Lambda^(1/2) psi||^2) and the
density-matrix version (center drawn from tr(W Lambda)) are implemented,
and they agree exactly on pure states under shared draws.

The rate operators are diagonal in the position basis and normalized per
configuration so that sum_x Lambda(x) dq = identity, which makes every
center distribution sum to one by construction (the 1-D Gaussian prefactor
cancels from all normalized quantities).
"""

from dataclasses import dataclass

import numpy as np

from .coarse import macro_weights
from .errors import DegenerateDistribution, DimensionMismatch, InvariantViolation, OffGrid
from .models import GridModel, mass_density_field
from .numeric import IncidentLog
from .states import DensityMatrix, WaveFunction, purity
from .unitary import SpectralPropagator


@dataclass(frozen=True)
class GRWParams:
    collapse_rate: float           # lambda, per particle per unit time
    collapse_width: float          # sigma
    n_particles: int

    def __post_init__(self):
        if self.collapse_rate < 0:
            raise InvariantViolation("collapse rate must be >= 0")
        if self.collapse_width <= 0:
            raise InvariantViolation("collapse width must be positive")
        if self.n_particles < 1:
            raise InvariantViolation("need at least one particle")


@dataclass(frozen=True)
class CollapseEvent:
    """A flash: (time, particle index 1..N, center location on the grid)."""

    time: float
    particle: int
    center_index: int
    center: float


@dataclass(frozen=True)
class CollapseKernel:
    """Precomputed diagonal rate entries base[x, q] for a grid model.

    base[x, q] is the diagonal value of Lambda(x) at single-particle
    position q, normalized so sum_x base[x, q] * dq = 1 for every q.
    """

    grid: GridModel
    sigma: float
    base: np.ndarray

    @classmethod
    def build(cls, grid: GridModel, sigma: float) -> "CollapseKernel":
        x = grid.positions
        raw = np.exp(-((x[:, None] - x[None, :]) ** 2) / (2 * sigma ** 2))
        raw /= np.sqrt(2 * np.pi * sigma ** 2)
        base = raw / (raw.sum(axis=0, keepdims=True) * grid.dq)
        return cls(grid, sigma, base)

    def diagonal(self, particle: int, center_index: int) -> np.ndarray:
        """Diagonal of Lambda_k(x_center) over configuration space."""
        row = self.base[center_index]
        if self.grid.n_particles == 1:
            return row
        gp = self.grid.grid_points
        if particle == 1:
            return np.repeat(row, gp)
        return np.tile(row, gp)

    def _position_marginal(self, diag_density: np.ndarray, particle: int) -> np.ndarray:
        if self.grid.n_particles == 1:
            return diag_density
        gp = self.grid.grid_points
        grid2 = diag_density.reshape(gp, gp)
        return grid2.sum(axis=1) if particle == 1 else grid2.sum(axis=0)

    def center_distribution(self, state, particle: int) -> np.ndarray:
        """rho(x) dq over grid centers; sums to one by kernel completeness."""
        if isinstance(state, WaveFunction):
            amps = state.amplitudes
            diag = amps.real ** 2 + amps.imag ** 2
        else:
            diag = state.matrix.diagonal().real
        if diag.size != self.grid.dim:
            raise DimensionMismatch("state does not live on the kernel's grid")
        marg = self._position_marginal(diag, particle)
        return (self.base @ marg) * self.grid.dq


def grid_index(g: GridModel, x: float) -> int:
    """Index of the grid point at location x; OffGrid if x is not a point."""
    idx = int(round(x / g.dq)) - 1
    if not 0 <= idx < g.grid_points or abs(g.positions[idx] - x) > 1e-9 * g.box_length:
        raise OffGrid(f"{x} is not a grid location")
    return idx


def collapse_rate_operator(g: GridModel, particle: int, x: float, sigma: float) -> np.ndarray:
    """Dense Lambda_k(x): Gaussian of width sigma in the position of particle
    k, diagonal in the configuration basis."""
    kernel = CollapseKernel.build(g, sigma)
    return np.diag(kernel.diagonal(particle, grid_index(g, x)).astype(complex))


def sample_collapse_schedule(params: GRWParams, t_end: float,
                             rng: np.random.Generator) -> list[tuple[float, int]]:
    """Poisson process with total rate N * lambda on [0, t_end]; each event
    gets a uniform particle label."""
    if t_end <= 0:
        raise InvariantViolation("t_end must be positive")
    total_rate = params.n_particles * params.collapse_rate
    events: list[tuple[float, int]] = []
    if total_rate <= 0:
        return events
    t = 0.0
    while True:
        t += rng.exponential(1.0 / total_rate)
        if t > t_end:
            return events
        events.append((t, 1 + int(rng.integers(params.n_particles))))


def sample_center(rho: np.ndarray, rng: np.random.Generator) -> int:
    total = rho.sum()
    if total < 1e-12:
        raise DegenerateDistribution(f"center distribution mass {total} below 1e-12")
    cdf = np.cumsum(rho) / total
    return int(np.searchsorted(cdf, rng.random()))


def psi_grw_collapse(kernel: CollapseKernel, psi: WaveFunction, particle: int,
                     rng: np.random.Generator, time: float = 0.0
                     ) -> tuple[WaveFunction, CollapseEvent]:
    """Collapse a wave function: X ~ ||Lambda(x)^(1/2) psi||^2 dq, then
    psi -> Lambda(X)^(1/2) psi normalized."""
    rho = kernel.center_distribution(psi, particle)
    idx = sample_center(rho, rng)
    sqrt_diag = np.sqrt(kernel.diagonal(particle, idx))
    post = WaveFunction.normalized(sqrt_diag * psi.amplitudes)
    event = CollapseEvent(time, particle, idx, float(kernel.grid.positions[idx]))
    return post, event


def w_grw_collapse(kernel: CollapseKernel, w: DensityMatrix, particle: int,
                   rng: np.random.Generator, time: float = 0.0
                   ) -> tuple[DensityMatrix, CollapseEvent]:
    """Collapse a density matrix: X ~ tr(W Lambda(x)) dq, then
    W -> Lambda^(1/2) W Lambda^(1/2) / tr(W Lambda)."""
    rho = kernel.center_distribution(w, particle)
    idx = sample_center(rho, rng)
    diag = kernel.diagonal(particle, idx)
    sqrt_diag = np.sqrt(diag)
    norm = float(diag @ w.matrix.diagonal().real)
    if norm < 1e-300:
        raise DegenerateDistribution("collapse normalization vanished")
    post = DensityMatrix((sqrt_diag[:, None] * w.matrix * sqrt_diag[None, :]) / norm)
    event = CollapseEvent(time, particle, idx, float(kernel.grid.positions[idx]))
    return post, event


def average_collapse_channel(w: DensityMatrix, kernel: CollapseKernel,
                             particle: int) -> np.ndarray:
    """Marginalize the collapse center analytically:
    W -> sum_x Lambda(x)^(1/2) W Lambda(x)^(1/2) dq (trace preserving)."""
    sqrt_base = np.sqrt(kernel.base)
    damp = (sqrt_base.T @ sqrt_base) * kernel.grid.dq       # C[q, q']
    gp = kernel.grid.grid_points
    if kernel.grid.n_particles == 2:
        eye = np.ones((gp, gp))
        damp = np.kron(damp, eye) if particle == 1 else np.kron(eye, damp)
    return w.matrix * damp


@dataclass(frozen=True)
class GRWRunResult:
    final_state: object
    flashes: tuple[CollapseEvent, ...]
    times: np.ndarray | None
    weights: np.ndarray | None          # (n_times, n_cells) macro-weight trace
    mass_densities: np.ndarray | None   # (n_times, n_locations)
    incidents: IncidentLog


def run_grw_process(initial, propagator: SpectralPropagator, kernel: CollapseKernel,
                    params: GRWParams, t_end: float, rng: np.random.Generator,
                    record_times=None, decomposition=None, mass_density=None
                    ) -> GRWRunResult:
    """Alternate exact unitary segments with scheduled collapses.

    Records the flash history, and on request the macro-weight trace over a
    decomposition and mass-density snapshots at the record times.
    """
    incidents = IncidentLog()
    pure = isinstance(initial, WaveFunction)
    events = sample_collapse_schedule(params, t_end, rng)
    record_times = np.array([] if record_times is None else record_times, dtype=float)
    weights = [] if decomposition is not None else None
    masses = [] if mass_density is not None else None

    def snapshot(state):
        if weights is not None:
            weights.append(macro_weights(state, decomposition))
        if masses is not None:
            masses.append(mass_density_field(state, mass_density))

    state, t_cursor = initial, 0.0
    flashes: list[CollapseEvent] = []
    # ties at equal t: the event fires first ("event" < "record"), so a
    # coincident record sees the post-collapse state
    timeline = sorted(
        [(t, "record", 0) for t in record_times] + [(t, "event", k) for t, k in events])
    for t, kind, k in timeline:
        dt = t - t_cursor
        if dt > 0:
            state = (propagator.evolve_wavefunction(state, dt) if pure
                     else propagator.evolve_density(state, dt))
            t_cursor = t
        if kind == "record":
            snapshot(state)
        else:
            if pure:
                state, event = psi_grw_collapse(kernel, state, k, rng, time=t)
            else:
                before = purity(state)
                state, event = w_grw_collapse(kernel, state, k, rng, time=t)
                if purity(state) < before - 1e-12:
                    incidents.purity_decreases += 1
            flashes.append(event)
    if t_end > t_cursor:
        state = (propagator.evolve_wavefunction(state, t_end - t_cursor) if pure
                 else propagator.evolve_density(state, t_end - t_cursor))
    return GRWRunResult(
        final_state=state,
        flashes=tuple(flashes),
        times=record_times if record_times.size else None,
        weights=np.array(weights) if weights else None,
        mass_densities=np.array(masses) if masses else None,
        incidents=incidents,
    )
