"""Macrostate structure of an energy shell.

A macro-variable splits the shell into orthogonal cells; weights, the
effective macrostate, Boltzmann entropy (k_B log dim, natural log, k_B = 1)
and the dominant equilibrium cell all live here.
"""

import json
from dataclasses import dataclass

import numpy as np

from .errors import DecompositionIncompatible, DimensionMismatch, InvariantViolation
from .hilbert import Subspace, projector
from .models import MacroVariable
from .numeric import IncidentLog, policy
from .states import DensityMatrix, WaveFunction


@dataclass(frozen=True)
class MacroCell:
    label: str
    subspace: Subspace

    @property
    def dim(self) -> int:
        return self.subspace.dim


@dataclass(frozen=True)
class MacroDecomposition:
    """Orthogonal decomposition of the shell into labeled macro-cells.

    Cells of dimension zero are omitted; their labels are kept in
    ``empty_labels``.
    """

    shell: Subspace
    cells: tuple[MacroCell, ...]
    empty_labels: tuple[str, ...] = ()

    def __post_init__(self):
        if sum(c.dim for c in self.cells) != self.shell.dim:
            raise InvariantViolation("cell dimensions do not sum to the shell dimension")
        for c in self.cells:
            cross = self.shell.basis.conj().T @ c.subspace.basis
            back = self.shell.basis @ cross
            if np.linalg.norm(back - c.subspace.basis) > 1e-8 * np.sqrt(c.dim):
                raise InvariantViolation(f"cell {c.label} does not lie inside the shell")

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(c.label for c in self.cells)

    def cell(self, label: str) -> MacroCell:
        for c in self.cells:
            if c.label == label:
                return c
        raise KeyError(f"no cell labeled {label!r}")


@dataclass(frozen=True)
class ClosenessPolicy:
    """Threshold for "lies almost entirely in": weight >= epsilon."""

    epsilon: float = 0.99

    def __post_init__(self):
        if not 0.0 < self.epsilon < 1.0:
            raise InvariantViolation("epsilon must lie in (0, 1)")


@dataclass(frozen=True)
class EquilibriumInfo:
    label: str
    ratio: float
    tie: bool


def decompose(shell: Subspace, mv: MacroVariable) -> MacroDecomposition:
    """Intersect the shell with each eigenvalue-bin eigenspace of the
    macro-variable.

    Requires the macro-variable (diagonal) to commute with the shell
    projector within 1e-8; otherwise the bins do not define orthogonal
    subspaces of the shell.
    """
    if mv.dim != shell.ambient_dim:
        raise DimensionMismatch(f"macro-variable dim {mv.dim} != ambient {shell.ambient_dim}")
    p = projector(shell)
    comm = mv.diagonal[:, None] * p - p * mv.diagonal[None, :]
    scale = max(np.max(np.abs(mv.diagonal)), 1.0)
    if np.linalg.norm(comm) > 1e-8 * scale:
        raise DecompositionIncompatible(
            "macro-variable does not commute with the shell projector")
    cells, empty = [], []
    for i in range(mv.n_bins):
        label = mv.bin_label(i)
        mask = mv.bin_members(i)
        sliced = shell.basis[mask, :]               # rows of bin-members only
        if sliced.shape[0] == 0:
            empty.append(label)
            continue
        # [Q_bin, P] = 0, so Q_bin P projects onto the intersection; its range
        # is spanned by the right singular vectors of the sliced basis.
        u, svals, vt = np.linalg.svd(sliced, full_matrices=False)
        rank = int(np.sum(svals > 0.5))
        if rank == 0:
            empty.append(label)
            continue
        coords = vt[:rank, :].conj().T              # shell coordinates of the cell
        full = np.zeros((shell.ambient_dim, rank), dtype=complex)
        full[mask, :] = sliced @ coords
        cells.append(MacroCell(label, Subspace(full)))
    return MacroDecomposition(shell, tuple(cells), tuple(empty))


def macro_weight(state, cell: MacroCell) -> float:
    """<psi|P_cell|psi> for pure input, tr(W P_cell) for mixed input."""
    basis = cell.subspace.basis
    if isinstance(state, WaveFunction):
        if state.dim != cell.subspace.ambient_dim:
            raise DimensionMismatch("state and cell live in different spaces")
        return float(np.linalg.norm(basis.conj().T @ state.amplitudes) ** 2)
    if isinstance(state, DensityMatrix):
        if state.dim != cell.subspace.ambient_dim:
            raise DimensionMismatch("state and cell live in different spaces")
        return float(np.einsum("ia,ij,ja->", basis.conj(), state.matrix, basis).real)
    raise TypeError(f"expected WaveFunction or DensityMatrix, got {type(state).__name__}")


def macro_weights(state, dec: MacroDecomposition) -> np.ndarray:
    return np.array([macro_weight(state, c) for c in dec.cells])


def effective_macrostate(state, dec: MacroDecomposition,
                         closeness: ClosenessPolicy = ClosenessPolicy()) -> str | None:
    """The unique cell holding at least epsilon of the state, else None
    (superposition of macrostates)."""
    for c in dec.cells:
        if macro_weight(state, c) >= closeness.epsilon:
            return c.label
    return None


def boltzmann_entropy(cell: MacroCell) -> float:
    """S = log dim(cell), in units of k_B."""
    return float(np.log(cell.dim))


def equilibrium_cell(dec: MacroDecomposition,
                     incidents: IncidentLog | None = None) -> EquilibriumInfo:
    """Cell of maximal dimension; ties resolve to the earliest cell and are
    flagged."""
    if not dec.cells:
        raise InvariantViolation("empty decomposition")
    dims = [c.dim for c in dec.cells]
    best = int(np.argmax(dims))
    tie = dims.count(dims[best]) > 1
    if tie and incidents is not None:
        incidents.ties += 1
    return EquilibriumInfo(dec.cells[best].label, dims[best] / dec.shell.dim, tie)


def decomposition_summary(dec: MacroDecomposition,
                          closeness: ClosenessPolicy = ClosenessPolicy()) -> dict:
    """JSON-ready summary: labels, dims, entropies, equilibrium ratio."""
    eq = equilibrium_cell(dec)
    return {
        "shell_dim": dec.shell.dim,
        "cells": [
            {"label": c.label, "dim": c.dim, "entropy": boltzmann_entropy(c)}
            for c in dec.cells
        ],
        "empty_labels": list(dec.empty_labels),
        "equilibrium": {"label": eq.label, "ratio": eq.ratio, "tie": eq.tie},
        "epsilon": closeness.epsilon,
    }


def summary_json(dec: MacroDecomposition) -> str:
    return json.dumps(decomposition_summary(dec), indent=2)
