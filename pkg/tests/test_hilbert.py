import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qsmlab.errors import EmptyShell, NotHermitian, RankDeficient
from qsmlab.hilbert import (Subspace, energy_shell, orthonormalize, projector,
                            spectral_decompose)
from qsmlab.streams import stream

from conftest import random_hermitian


def basis_vec(i, dim):
    v = np.zeros(dim, dtype=complex)
    v[i] = 1.0
    return v


class TestOrthonormalize:
    def test_already_orthonormal_passes_through(self):
        e1, e2 = basis_vec(0, 4), basis_vec(1, 4)
        s = orthonormalize([e1, e2])
        assert np.allclose(s.basis[:, 0], e1)
        assert np.allclose(s.basis[:, 1], e2)

    def test_dependent_input_raises(self):
        e1 = basis_vec(0, 3)
        with pytest.raises(RankDeficient):
            orthonormalize([e1, e1])

    def test_gram_schmidt_example(self):
        # hand Gram-Schmidt: {(1,1)/sqrt2, (1,0)} -> {(1,1)/sqrt2, (1,-1)/sqrt2}
        v1 = np.array([1, 1], dtype=complex) / np.sqrt(2)
        v2 = np.array([1, 0], dtype=complex)
        s = orthonormalize([v1, v2])
        assert np.allclose(s.basis[:, 0], v1)
        expected = np.array([1, -1], dtype=complex) / np.sqrt(2)
        assert abs(np.vdot(s.basis[:, 1], expected)) == pytest.approx(1.0, abs=1e-12)

    @given(seed=st.integers(0, 2**32 - 1), dim=st.integers(2, 12),
           k=st.integers(1, 6))
    @settings(max_examples=40, deadline=None)
    def test_idempotent_and_spans(self, seed, dim, k):
        k = min(k, dim)
        r = stream(seed, 3)
        vecs = [r.standard_normal(dim) + 1j * r.standard_normal(dim) for _ in range(k)]
        s = orthonormalize(vecs)
        assert s.dim == k
        again = orthonormalize([s.basis[:, i] for i in range(k)])
        # same span: projectors agree
        assert np.linalg.norm(projector(s) - projector(again)) < 1e-9
        # original vectors lie in the span
        p = projector(s)
        for v in vecs:
            assert np.linalg.norm(p @ v - v) < 1e-9 * np.linalg.norm(v)


class TestProjector:
    @pytest.mark.parametrize("indices,dim,expected_diag", [
        ([0], 3, [1, 0, 0]),
        ([0, 1], 3, [1, 1, 0]),
    ])
    def test_standard_basis(self, indices, dim, expected_diag):
        s = Subspace(np.column_stack([basis_vec(i, dim) for i in indices]))
        assert np.allclose(projector(s), np.diag(expected_diag))

    def test_rank_one_superposition(self):
        v = np.array([1, 1], dtype=complex) / np.sqrt(2)
        p = projector(Subspace(v[:, None]))
        assert np.allclose(p, np.full((2, 2), 0.5))

    @given(seed=st.integers(0, 2**32 - 1), dim=st.integers(2, 16))
    @settings(max_examples=40, deadline=None)
    def test_idempotent_with_trace_dim(self, seed, dim):
        r = stream(seed, 4)
        k = int(r.integers(1, dim + 1))
        vecs = [r.standard_normal(dim) + 1j * r.standard_normal(dim) for _ in range(k)]
        s = orthonormalize(vecs)
        p = projector(s)
        assert np.linalg.norm(p @ p - p) < 1e-10 * dim
        assert abs(np.trace(p).real - s.dim) < 1e-10 * dim


class TestSpectralDecompose:
    def test_diagonal_sorted(self):
        evals, evecs = spectral_decompose(np.diag([3.0, 1.0, 2.0]))
        assert np.allclose(evals, [1, 2, 3])
        # eigenvectors are the permuted standard basis, up to phase
        for col, idx in zip(evecs.T, [1, 2, 0]):
            assert abs(abs(col[idx]) - 1) < 1e-12

    def test_pauli_x(self):
        evals, evecs = spectral_decompose(np.array([[0, 1], [1, 0]], dtype=complex))
        assert np.allclose(evals, [-1, 1])
        minus = np.array([1, -1]) / np.sqrt(2)
        plus = np.array([1, 1]) / np.sqrt(2)
        assert abs(np.vdot(evecs[:, 0], minus)) == pytest.approx(1.0, abs=1e-12)
        assert abs(np.vdot(evecs[:, 1], plus)) == pytest.approx(1.0, abs=1e-12)

    def test_not_hermitian_raises(self):
        with pytest.raises(NotHermitian):
            spectral_decompose(np.array([[0, 1], [0, 0]], dtype=complex))

    @given(seed=st.integers(0, 2**32 - 1))
    @settings(max_examples=40, deadline=None)
    def test_residual_and_reconstruction(self, seed):
        h = random_hermitian(8, seed)
        evals, evecs = spectral_decompose(h)
        scale = np.linalg.norm(h)
        for lam, v in zip(evals, evecs.T):
            assert np.linalg.norm(h @ v - lam * v) <= 1e-8 * scale
        recon = (evecs * evals[None, :]) @ evecs.conj().T
        assert np.linalg.norm(recon - h) <= 1e-8 * scale
        assert np.all(np.diff(evals) >= -1e-12)
        gram = evecs.conj().T @ evecs
        assert np.max(np.abs(gram - np.eye(8))) < 1e-10


class TestEnergyShell:
    def test_window_selects_interior(self):
        h = np.diag([0.0, 1.0, 2.0, 3.0])
        s = energy_shell(h, 0.5, 2.0)
        assert s.dim == 2
        p = projector(s)
        assert np.allclose(p, np.diag([0, 1, 1, 0]))

    def test_empty_window_raises(self):
        with pytest.raises(EmptyShell):
            energy_shell(np.diag([0.0, 1.0, 2.0, 3.0]), 10.0, 1.0)

    def test_wide_window_full_space(self):
        h = np.diag([0.0, 1.0, 2.0, 3.0])
        assert energy_shell(h, -1.0, 5.0).dim == 4

    def test_closed_boundaries_included(self):
        h = np.diag([0.0, 1.0, 2.0])
        assert energy_shell(h, 1.0, 1.0).dim == 2

    @given(seed=st.integers(0, 2**32 - 1))
    @settings(max_examples=25, deadline=None)
    def test_huge_window_gives_ambient(self, seed):
        h = random_hermitian(6, seed)
        bound = np.linalg.norm(h) + 1
        assert energy_shell(h, -bound, 2 * bound).dim == 6
