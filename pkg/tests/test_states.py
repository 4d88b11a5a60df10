import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qsmlab.errors import (DimensionMismatch, IndexOutOfRange, InvariantViolation,
                           NullConditional)
from qsmlab.hilbert import Subspace, orthonormalize
from qsmlab.numeric import IncidentLog
from qsmlab.states import (DensityMatrix, IPHSpec, WaveFunction,
                           conditional_density_matrix, iph_density_matrix, load_state,
                           mix_ensemble, purity, sample_mu_s, save_state, state_overlap,
                           weak_iph)
from qsmlab.streams import stream


def basis_vec(i, dim):
    v = np.zeros(dim, dtype=complex)
    v[i] = 1.0
    return v


def span(dim, *indices):
    return Subspace(np.column_stack([basis_vec(i, dim) for i in indices]))


def random_subspace(dim, k, seed):
    r = stream(seed, 11)
    return orthonormalize([r.standard_normal(dim) + 1j * r.standard_normal(dim)
                           for _ in range(k)])


class TestStateTypes:
    def test_wavefunction_requires_unit_norm(self):
        with pytest.raises(InvariantViolation):
            WaveFunction(np.array([1.0, 1.0], dtype=complex))

    def test_density_requires_unit_trace(self):
        with pytest.raises(InvariantViolation):
            DensityMatrix(np.eye(2, dtype=complex))

    def test_repaired_clamps_and_counts(self):
        mat = np.diag([1.0 + 5e-11, -5e-11]).astype(complex)
        inc = IncidentLog()
        w = DensityMatrix.repaired(mat, inc)
        assert inc.psd_clamps == 1
        assert w.validate_psd() >= 0.0
        assert np.trace(w.matrix).real == pytest.approx(1.0)

    def test_repaired_rejects_real_negativity(self):
        with pytest.raises(InvariantViolation):
            DensityMatrix.repaired(np.diag([1.001, -0.001]).astype(complex))


class TestIph:
    def test_one_dim_projector(self):
        w = iph_density_matrix(span(4, 0))
        assert np.allclose(w.matrix, np.diag([1, 0, 0, 0]))

    def test_two_dim_projector(self):
        w = iph_density_matrix(span(4, 0, 1))
        assert np.allclose(w.matrix, np.diag([0.5, 0.5, 0, 0]))

    @given(seed=st.integers(0, 2**32 - 1), dim=st.integers(2, 10))
    @settings(max_examples=30, deadline=None)
    def test_purity_is_inverse_dim(self, seed, dim):
        k = 1 + seed % dim
        s = random_subspace(dim, k, seed)
        w = iph_density_matrix(s)
        assert purity(w) == pytest.approx(1.0 / k, abs=1e-10)
        # d * W is idempotent
        m = k * w.matrix
        assert np.linalg.norm(m @ m - m) < 1e-10 * dim

    def test_basis_rotation_invariance(self, rng):
        s = random_subspace(6, 3, 5)
        q, _ = np.linalg.qr(rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3)))
        rotated = Subspace(s.basis @ q)
        a = iph_density_matrix(s).matrix
        b = iph_density_matrix(rotated).matrix
        assert np.linalg.norm(a - b) <= 1e-10


class TestWeakIph:
    def test_selects_by_index(self):
        spec = IPHSpec("weak", (span(4, 0), span(4, 1)), selected_index=1)
        assert np.allclose(weak_iph(spec).matrix, np.diag([0, 1, 0, 0]))

    def test_overlapping_subspaces_give_distinct_states(self):
        s1 = span(4, 0, 1)
        s2 = span(4, 0, 2)
        spec1 = IPHSpec("weak", (s1, s2), selected_index=0)
        spec2 = IPHSpec("weak", (s1, s2), selected_index=1)
        w1, w2 = weak_iph(spec1), weak_iph(spec2)
        assert np.trace(w1.matrix).real == pytest.approx(1.0)
        assert np.trace(w2.matrix).real == pytest.approx(1.0)
        assert np.linalg.norm(w1.matrix - w2.matrix) > 0.1

    def test_deterministic_per_index(self):
        spec = IPHSpec("weak", (span(4, 0, 1), span(4, 2)), selected_index=0)
        a = weak_iph(spec)
        b = weak_iph(spec)
        assert np.array_equal(a.matrix, b.matrix)

    def test_index_out_of_range(self):
        spec = IPHSpec("weak", (span(4, 0),), selected_index=0)
        bad = IPHSpec("weak", (span(4, 0),), selected_index=3)
        weak_iph(spec)
        with pytest.raises(IndexOutOfRange):
            weak_iph(bad)


class TestSampleMuS:
    def test_dim_one_is_basis_vector_up_to_phase(self, rng):
        s = span(5, 2)
        psi = sample_mu_s(s, rng)
        assert abs(abs(psi.amplitudes[2]) - 1) < 1e-12

    def test_draw_lies_in_subspace(self, rng):
        s = random_subspace(8, 3, 42)
        psi = sample_mu_s(s, rng)
        coords = s.coords(psi.amplitudes)
        assert np.linalg.norm(coords) == pytest.approx(1.0, abs=1e-10)
        assert np.linalg.norm(s.embed(coords) - psi.amplitudes) < 1e-10

    def test_monte_carlo_mean_converges_to_iph(self):
        # oracle for the ensemble decomposition: empirical mean of projectors
        s = random_subspace(16, 10, 99)
        target = iph_density_matrix(s).matrix
        r = stream(777, 0)
        dists = {}
        for m in (5000, 20000):
            acc = np.zeros((16, 16), dtype=complex)
            for _ in range(m):
                a = sample_mu_s(s, r).amplitudes
                acc += np.outer(a, a.conj())
            dists[m] = np.linalg.norm(acc / m - target)
        assert dists[20000] <= 0.02
        # ~1/sqrt(M): doubling M four-fold halves the distance
        assert 1.4 < dists[5000] / dists[20000] < 2.9

    def test_unitary_invariance_within_subspace(self):
        s = random_subspace(8, 4, 123)
        r1 = stream(31, 0)
        rot = np.linalg.qr(r1.standard_normal((4, 4)) + 1j * r1.standard_normal((4, 4)))[0]
        u = s.basis @ rot @ s.basis.conj().T + (np.eye(8) - s.basis @ s.basis.conj().T)
        m = 4000
        acc_a = np.zeros((8, 8), dtype=complex)
        acc_b = np.zeros((8, 8), dtype=complex)
        ra, rb = stream(32, 0), stream(33, 0)
        for _ in range(m):
            a = sample_mu_s(s, ra).amplitudes
            b = u @ sample_mu_s(s, rb).amplitudes
            acc_a += np.outer(a, a.conj())
            acc_b += np.outer(b, b.conj())
        assert np.linalg.norm(acc_a / m - acc_b / m) < 0.06


class TestMixEnsemble:
    def test_single_state(self):
        w = mix_ensemble([WaveFunction(basis_vec(0, 3))])
        assert np.allclose(w.matrix, np.diag([1, 0, 0]))

    def test_orthogonal_pair(self):
        w = mix_ensemble([WaveFunction(basis_vec(0, 3)), WaveFunction(basis_vec(1, 3))])
        assert np.allclose(w.matrix, np.diag([0.5, 0.5, 0]))

    def test_non_unique_decomposition(self):
        # rotated pair realizes the same mixture: the decomposition into
        # pure states is not unique
        plus = WaveFunction(np.array([1, 1, 0], dtype=complex) / np.sqrt(2))
        minus = WaveFunction(np.array([1, -1, 0], dtype=complex) / np.sqrt(2))
        a = mix_ensemble([WaveFunction(basis_vec(0, 3)), WaveFunction(basis_vec(1, 3))])
        b = mix_ensemble([plus, minus])
        assert np.linalg.norm(a.matrix - b.matrix) < 1e-12

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            mix_ensemble([WaveFunction(basis_vec(0, 3)), WaveFunction(basis_vec(0, 2))])


class TestPurity:
    def test_pure_state(self, rng):
        v = rng.standard_normal(6) + 1j * rng.standard_normal(6)
        psi = WaveFunction(v / np.linalg.norm(v))
        assert purity(psi.density_matrix()) == pytest.approx(1.0, abs=1e-10)

    def test_unitary_conjugation_invariant(self, rng):
        w = iph_density_matrix(random_subspace(6, 2, 8))
        q, _ = np.linalg.qr(rng.standard_normal((6, 6)) + 1j * rng.standard_normal((6, 6)))
        conj = DensityMatrix(q @ w.matrix @ q.conj().T)
        assert purity(conj) == pytest.approx(purity(w), abs=1e-10)


class TestConditionalDensityMatrix:
    def test_product_state_gives_system_factor(self, rng):
        sys_amp = rng.standard_normal(4) + 1j * rng.standard_normal(4)
        env_amp = rng.standard_normal(3) + 1j * rng.standard_normal(3)
        sys_amp /= np.linalg.norm(sys_amp)
        env_amp /= np.linalg.norm(env_amp)
        joint = WaveFunction(np.kron(sys_amp, env_amp))
        w = joint.density_matrix()
        for y in range(3):
            cond = conditional_density_matrix(w, sys_points=4, env_index=y)
            expected = np.outer(sys_amp, sys_amp.conj())
            assert np.linalg.norm(cond.matrix - expected) < 1e-10

    def test_bell_like_pinned_by_correlation(self):
        # 4x4 hand computation: (|00> + |11>)/sqrt2; conditioning on y=0
        # leaves the pure system state |0>
        phi = np.zeros(4, dtype=complex)
        phi[0] = phi[3] = 1 / np.sqrt(2)
        w = WaveFunction(phi).density_matrix()
        cond = conditional_density_matrix(w, sys_points=2, env_index=0)
        assert np.allclose(cond.matrix, np.diag([1, 0]))
        cond1 = conditional_density_matrix(w, sys_points=2, env_index=1)
        assert np.allclose(cond1.matrix, np.diag([0, 1]))

    def test_trace_one_and_null_conditional(self, rng):
        sys_amp = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        sys_amp /= np.linalg.norm(sys_amp)
        env_amp = np.array([1.0, 0.0], dtype=complex)   # no support on y=1
        w = WaveFunction(np.kron(sys_amp, env_amp)).density_matrix()
        cond = conditional_density_matrix(w, 2, 0)
        assert np.trace(cond.matrix).real == pytest.approx(1.0, abs=1e-12)
        with pytest.raises(NullConditional):
            conditional_density_matrix(w, 2, 1)


class TestSerialization:
    def test_wavefunction_roundtrip(self, rng, tmp_path):
        v = rng.standard_normal(7) + 1j * rng.standard_normal(7)
        psi = WaveFunction(v / np.linalg.norm(v))
        path = tmp_path / "psi.qsmb"
        save_state(path, psi)
        back = load_state(path)
        assert isinstance(back, WaveFunction)
        assert np.array_equal(back.amplitudes, psi.amplitudes)

    def test_density_roundtrip(self, tmp_path):
        w = iph_density_matrix(random_subspace(5, 2, 77))
        path = tmp_path / "w.qsmb"
        save_state(path, w)
        back = load_state(path)
        assert isinstance(back, DensityMatrix)
        assert np.array_equal(back.matrix, w.matrix)

    def test_header_layout(self, tmp_path):
        psi = WaveFunction(basis_vec(1, 3))
        path = tmp_path / "h.qsmb"
        save_state(path, psi)
        raw = path.read_bytes()
        assert raw[:4] == b"QSMB"
        assert int.from_bytes(raw[4:6], "little") == 1      # version
        assert int.from_bytes(raw[6:8], "little") == 1      # wave function tag
        assert int.from_bytes(raw[8:16], "little") == 3     # dim
        assert len(raw) == 16 + 3 * 16                      # (re, im) f64 pairs


class TestOverlap:
    def test_phase_equivalence(self, rng):
        v = rng.standard_normal(4) + 1j * rng.standard_normal(4)
        psi = WaveFunction(v / np.linalg.norm(v))
        rotated = WaveFunction(np.exp(1j * 0.7) * psi.amplitudes)
        assert state_overlap(psi, rotated) == pytest.approx(1.0, abs=1e-12)
