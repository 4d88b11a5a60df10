"""Global numeric policy and per-run incident counters.

All tolerance knobs live in one record so experiments and tests share a
single tuning point.  The module-level ``policy`` instance is read by every
operation; replace fields on it (or swap the instance) to retune globally.
"""

from dataclasses import dataclass, field, asdict


@dataclass
class NumericPolicy:
    # algebraic identities: orthonormality, Hermiticity, traces, projector idempotence
    atol: float = 1e-10
    # eigendecomposition residuals, relative to the operator norm scale
    spectral_rtol: float = 1e-8
    # singular values below rank_tol * s_max count as zero
    rank_tol: float = 1e-10
    # density-matrix eigenvalues in [psd_floor, 0) may be clamped; below is an error
    psd_floor: float = -1e-10
    # |psi|^2 below node_threshold * max|psi|^2 counts as a node region
    node_threshold: float = 1e-8
    # Bohmian velocity cap, in box lengths per unit time
    velocity_cap_boxes: float = 10.0
    # largest ambient dimension stored densely
    ambient_cap: int = 4096


policy = NumericPolicy()


@dataclass
class IncidentLog:
    """Counters for numerically noteworthy events during a run."""

    node_regions: int = 0
    psd_clamps: int = 0
    ties: int = 0
    reflections: int = 0
    ordering_violations: int = 0
    purity_decreases: int = 0

    def merge(self, other: "IncidentLog") -> None:
        for key, val in asdict(other).items():
            setattr(self, key, getattr(self, key) + val)

    def as_dict(self) -> dict:
        return asdict(self)
