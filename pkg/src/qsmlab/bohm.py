"""Particle trajectories guided by wave functions or density matrices.

The velocity field is (hbar/m) Im[grad psi / psi] on the grid (for mixed
states, the first-argument derivative of W(q, q') evaluated on the
diagonal), linearly interpolated between grid points.  Grid points where
the density falls below the node threshold (or the raw ratio exceeds the
velocity cap) carry a capped velocity and are flagged; a node incident is
logged whenever a velocity evaluation touches a flagged point.
Trajectories use explicit midpoint (RK2) stepping against the exactly
evolved state.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateDistribution, DimensionMismatch, InvariantViolation
from .models import GridModel
from .numeric import IncidentLog, policy
from .states import DensityMatrix, WaveFunction
from .unitary import SpectralPropagator


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray              # (n_steps + 1,)
    configurations: np.ndarray     # (n_steps + 1, n_particles)

    def __post_init__(self):
        if np.any(np.diff(self.times) <= 0):
            raise InvariantViolation("trajectory times must increase")
        if self.times.shape[0] != self.configurations.shape[0]:
            raise DimensionMismatch("one configuration per time required")


def _cap(g: GridModel) -> float:
    return policy.velocity_cap_boxes * g.box_length


def _ratio_to_velocity(g: GridModel, grad, amps, dens):
    """(velocity, node flags): Im(grad/amps) scaled by hbar/m, capped where
    the density is below threshold or the raw ratio exceeds the cap."""
    vcap = _cap(g)
    delta = policy.node_threshold * dens.max()
    with np.errstate(divide="ignore", invalid="ignore"):
        raw = (g.hbar / g.mass) * np.imag(grad / amps)
    flagged = (dens < delta) | ~np.isfinite(raw) | (np.abs(raw) > vcap)
    raw = np.nan_to_num(raw, nan=0.0, posinf=vcap, neginf=-vcap)
    return np.clip(raw, -vcap, vcap), flagged


def _grad_1d(arr: np.ndarray, dq: float, axis: int = 0) -> np.ndarray:
    """Central difference with hard-wall (zero) boundary values."""
    arr = np.moveaxis(arr, axis, 0)
    out = np.zeros_like(arr)
    out[1:-1] = (arr[2:] - arr[:-2]) / (2 * dq)
    out[0] = arr[1] / (2 * dq)
    out[-1] = -arr[-2] / (2 * dq)
    return np.moveaxis(out, 0, axis)


def field_and_flags_psi(g: GridModel, psi: WaveFunction):
    """Velocity field and node flags on the grid; field shape (G,) or
    (G, G, 2), flags per grid point."""
    if psi.dim != g.dim:
        raise DimensionMismatch("state does not live on this grid")
    amps = psi.amplitudes
    dens = amps.real ** 2 + amps.imag ** 2
    if g.n_particles == 1:
        return _ratio_to_velocity(g, _grad_1d(amps, g.dq), amps, dens)
    gp = g.grid_points
    amps2 = amps.reshape(gp, gp)
    dens2 = dens.reshape(gp, gp)
    field = np.empty((gp, gp, 2))
    flags = np.zeros((gp, gp), dtype=bool)
    for axis in range(2):
        v, fl = _ratio_to_velocity(g, _grad_1d(amps2, g.dq, axis=axis), amps2, dens2)
        field[..., axis] = v
        flags |= fl
    return field, flags


def field_and_flags_w(g: GridModel, w: DensityMatrix):
    """W-guidance field: differentiate the first argument of W(q, q') along
    each particle axis and evaluate on the diagonal."""
    if w.dim != g.dim:
        raise DimensionMismatch("state does not live on this grid")
    mat = w.matrix
    diag = np.diagonal(mat)
    dens = diag.real
    gp = g.grid_points
    if g.n_particles == 1:
        plus = np.zeros(gp, dtype=complex)
        minus = np.zeros(gp, dtype=complex)
        plus[:-1] = np.diagonal(mat, offset=-1)    # W(q+1, q)
        minus[1:] = np.diagonal(mat, offset=+1)    # W(q-1, q)
        grad = (plus - minus) / (2 * g.dq)
        return _ratio_to_velocity(g, grad, diag, dens)
    four = mat.reshape(gp, gp, gp, gp)             # (a1, a2, b1, b2)
    i, j = np.meshgrid(np.arange(gp), np.arange(gp), indexing="ij")
    dens2 = dens.reshape(gp, gp)
    diag2 = diag.reshape(gp, gp)
    field = np.empty((gp, gp, 2))
    flags = np.zeros((gp, gp), dtype=bool)
    for axis in range(2):
        plus = np.zeros((gp, gp), dtype=complex)
        minus = np.zeros((gp, gp), dtype=complex)
        if axis == 0:
            plus[:-1, :] = four[i[:-1, :] + 1, j[:-1, :], i[:-1, :], j[:-1, :]]
            minus[1:, :] = four[i[1:, :] - 1, j[1:, :], i[1:, :], j[1:, :]]
        else:
            plus[:, :-1] = four[i[:, :-1], j[:, :-1] + 1, i[:, :-1], j[:, :-1]]
            minus[:, 1:] = four[i[:, 1:], j[:, 1:] - 1, i[:, 1:], j[:, 1:]]
        grad = (plus - minus) / (2 * g.dq)
        v, fl = _ratio_to_velocity(g, grad, diag2, dens2)
        field[..., axis] = v
        flags |= fl
    return field, flags


def velocity_field_psi(g: GridModel, psi: WaveFunction) -> np.ndarray:
    return field_and_flags_psi(g, psi)[0]


def velocity_field_w(g: GridModel, w: DensityMatrix) -> np.ndarray:
    return field_and_flags_w(g, w)[0]


def interpolate_field(g: GridModel, field: np.ndarray, q: np.ndarray,
                      flags: np.ndarray | None = None,
                      incidents: IncidentLog | None = None) -> np.ndarray:
    """Multilinear interpolation of a grid velocity field at configurations
    q (shape (..., n_particles)), clamped to edge values outside the grid.
    With flags given, evaluations supported on a flagged point log a node
    incident."""
    q = np.asarray(q, dtype=float)
    gp = g.grid_points
    u = np.clip((q - g.dq) / g.dq, 0.0, gp - 1 - 1e-12)
    i0 = u.astype(int)
    frac = u - i0
    i1 = np.minimum(i0 + 1, gp - 1)
    if g.n_particles == 1:
        a0, a1 = i0[..., 0], i1[..., 0]
        if flags is not None and incidents is not None:
            incidents.node_regions += int(np.count_nonzero(flags[a0] | flags[a1]))
        vals = field[a0] * (1 - frac[..., 0]) + field[a1] * frac[..., 0]
        return vals[..., None]
    fa, fb = frac[..., 0], frac[..., 1]
    c00 = (i0[..., 0], i0[..., 1])
    c01 = (i0[..., 0], i1[..., 1])
    c10 = (i1[..., 0], i0[..., 1])
    c11 = (i1[..., 0], i1[..., 1])
    if flags is not None and incidents is not None:
        touched = flags[c00] | flags[c01] | flags[c10] | flags[c11]
        incidents.node_regions += int(np.count_nonzero(touched))
    out = np.empty(q.shape)
    for axis in range(2):
        f = field[..., axis]
        out[..., axis] = ((1 - fa) * (1 - fb) * f[c00] + (1 - fa) * fb * f[c01]
                          + fa * (1 - fb) * f[c10] + fa * fb * f[c11])
    return out


def velocity_psi(g: GridModel, psi: WaveFunction, q,
                 incidents: IncidentLog | None = None) -> np.ndarray:
    """Guidance velocity at configuration(s) q from a wave function."""
    q = np.asarray(q, dtype=float)
    field, flags = field_and_flags_psi(g, psi)
    if q.ndim == 1:
        return interpolate_field(g, field, q[None, :], flags, incidents)[0]
    return interpolate_field(g, field, q, flags, incidents)


def velocity_w(g: GridModel, w: DensityMatrix, q,
               incidents: IncidentLog | None = None) -> np.ndarray:
    """Guidance velocity at configuration(s) q from a density matrix."""
    q = np.asarray(q, dtype=float)
    field, flags = field_and_flags_w(g, w)
    if q.ndim == 1:
        return interpolate_field(g, field, q[None, :], flags, incidents)[0]
    return interpolate_field(g, field, q, flags, incidents)


def diagonal_density(g: GridModel, state) -> np.ndarray:
    """|psi(q)|^2 or W(q, q), normalized to sum 1 over configuration cells."""
    if isinstance(state, WaveFunction):
        amps = state.amplitudes
        dens = amps.real ** 2 + amps.imag ** 2
    elif isinstance(state, DensityMatrix):
        dens = state.diagonal().copy()
        dens[dens < 0] = 0.0
    else:
        raise TypeError(f"expected WaveFunction or DensityMatrix, got {type(state).__name__}")
    if dens.size != g.dim:
        raise DimensionMismatch("state does not live on this grid")
    total = dens.sum()
    if total < 1e-12:
        raise DegenerateDistribution("diagonal density has no mass")
    if abs(total - 1.0) > 1e-8:
        raise InvariantViolation(f"diagonal density sums to {total}, expected 1")
    return dens / total


def sample_initial_configuration(g: GridModel, state, rng: np.random.Generator,
                                 size: int | None = None) -> np.ndarray:
    """Inverse-CDF draw from the diagonal density, jittered uniformly inside
    the grid cell; returns (n_particles,) or (size, n_particles)."""
    p = diagonal_density(g, state)
    n = 1 if size is None else size
    cdf = np.cumsum(p)
    cdf /= cdf[-1]
    flat = np.searchsorted(cdf, rng.random(n))
    if g.n_particles == 1:
        idx = flat[:, None]
    else:
        idx = np.column_stack(np.unravel_index(flat, (g.grid_points, g.grid_points)))
    pos = g.positions[idx] + (rng.random(idx.shape) - 0.5) * g.dq
    return pos[0] if size is None else pos


class PsiEvolution:
    """Exactly evolved pure state, cached per requested time."""

    def __init__(self, propagator: SpectralPropagator, psi0: WaveFunction):
        self.propagator = propagator
        self._coeffs = propagator.eigenvectors.conj().T @ psi0.amplitudes
        self._states: dict[float, WaveFunction] = {}
        self._fields: dict[float, tuple] = {}

    def state(self, t: float) -> WaveFunction:
        if t not in self._states:
            amps = self.propagator.eigenvectors @ (self.propagator.phases(t) * self._coeffs)
            self._states[t] = WaveFunction(amps)
        return self._states[t]

    def field_and_flags(self, g: GridModel, t: float):
        if t not in self._fields:
            self._fields[t] = field_and_flags_psi(g, self.state(t))
        return self._fields[t]


class WEvolution:
    """Exactly evolved density matrix, cached per requested time."""

    def __init__(self, propagator: SpectralPropagator, w0: DensityMatrix):
        self.propagator = propagator
        v = propagator.eigenvectors
        self._wtilde = v.conj().T @ w0.matrix @ v
        self._states: dict[float, DensityMatrix] = {}
        self._fields: dict[float, tuple] = {}

    def state(self, t: float) -> DensityMatrix:
        if t not in self._states:
            v = self.propagator.eigenvectors
            ph = self.propagator.phases(t)
            rotated = (ph[:, None] * self._wtilde) * ph.conj()[None, :]
            out = v @ rotated @ v.conj().T
            self._states[t] = DensityMatrix(0.5 * (out + out.conj().T))
        return self._states[t]

    def field_and_flags(self, g: GridModel, t: float):
        if t not in self._fields:
            self._fields[t] = field_and_flags_w(g, self.state(t))
        return self._fields[t]


def integrate_ensemble(g: GridModel, source, q0: np.ndarray, dt: float, steps: int,
                       incidents: IncidentLog | None = None, t0: float = 0.0
                       ) -> tuple[np.ndarray, np.ndarray]:
    """RK2 midpoint integration of many trajectories against the exactly
    evolved state; velocity fields are built once per half step and shared.

    Returns (times, positions) with positions shaped
    (steps + 1, n_traj, n_particles).  Box exits are clamped and counted as
    reflections.
    """
    if dt <= 0 or steps < 1:
        raise InvariantViolation("need dt > 0 and steps >= 1")
    q = np.atleast_2d(np.asarray(q0, dtype=float)).copy()
    if q.shape[1] != g.n_particles:
        raise DimensionMismatch(f"configurations must have {g.n_particles} coordinates")
    times = t0 + dt * np.arange(steps + 1)
    out = np.empty((steps + 1, q.shape[0], g.n_particles))
    out[0] = q
    lo, hi = 0.0, g.box_length
    for step in range(steps):
        t = times[step]
        f1, fl1 = source.field_and_flags(g, t)
        v1 = interpolate_field(g, f1, q, fl1, incidents)
        qh = np.clip(q + 0.5 * dt * v1, lo, hi)
        f2, fl2 = source.field_and_flags(g, t + 0.5 * dt)
        v2 = interpolate_field(g, f2, qh, fl2, incidents)
        qn = q + dt * v2
        outside = (qn < lo) | (qn > hi)
        if outside.any() and incidents is not None:
            incidents.reflections += int(np.count_nonzero(outside))
        q = np.clip(qn, lo, hi)
        out[step + 1] = q
    return times, out


def integrate_trajectory(g: GridModel, source, q0, dt: float, steps: int,
                         incidents: IncidentLog | None = None, t0: float = 0.0) -> Trajectory:
    """Single-trajectory wrapper around :func:`integrate_ensemble`."""
    q0 = np.atleast_1d(np.asarray(q0, dtype=float))
    times, positions = integrate_ensemble(g, source, q0[None, :], dt, steps, incidents, t0)
    return Trajectory(times, positions[:, 0, :])


def histogram_edges(g: GridModel, n_bins: int | None = None) -> np.ndarray:
    """Bin edges over [0, L]: one bin per grid cell by default."""
    if n_bins is None:
        inner = g.dq * (np.arange(1, g.grid_points) + 0.5)
        return np.concatenate(([0.0], inner, [g.box_length]))
    return np.linspace(0.0, g.box_length, n_bins + 1)


def equivariance_distance(g: GridModel, positions: np.ndarray, state,
                          n_bins: int | None = None) -> float:
    """L1 distance between the empirical histogram of (first-coordinate)
    positions and the theoretical diagonal density, on shared bins."""
    q1 = np.atleast_2d(positions)[:, 0]
    dens = diagonal_density(g, state)
    if g.n_particles == 2:
        dens = dens.reshape(g.grid_points, g.grid_points).sum(axis=1)
    edges = histogram_edges(g, n_bins)
    theory, _ = np.histogram(g.positions, bins=edges, weights=dens)
    emp, _ = np.histogram(q1, bins=edges)
    return float(np.abs(emp / q1.size - theory).sum())
