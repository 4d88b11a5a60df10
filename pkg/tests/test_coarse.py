import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qsmlab.coarse import (ClosenessPolicy, boltzmann_entropy, decompose,
                           decomposition_summary, effective_macrostate, equilibrium_cell,
                           macro_weight, macro_weights)
from qsmlab.errors import DecompositionIncompatible
from qsmlab.hilbert import Subspace, orthonormalize, spectral_decompose
from qsmlab.models import (MacroVariable, build_spin_chain, left_half_occupation,
                           total_occupation)
from qsmlab.numeric import IncidentLog
from qsmlab.states import WaveFunction, iph_density_matrix, sample_mu_s
from qsmlab.streams import stream


def full_space(n):
    return Subspace(np.eye(2 ** n, dtype=complex))


class TestDecompose:
    def test_total_occupation_binomial_dims(self):
        dec = decompose(full_space(4), total_occupation(4))
        assert [c.dim for c in dec.cells] == [1, 4, 6, 4, 1]

    def test_left_half_dims_match_enumeration(self):
        # oracle: enumerate left-half counts of all 16 bitstrings
        expected = {str(k): 0 for k in range(3)}
        for bits in itertools.product("01", repeat=4):
            expected[str(bits[:2].count("1"))] += 1
        dec = decompose(full_space(4), left_half_occupation(4))
        assert {c.label: c.dim for c in dec.cells} == expected

    def test_one_excitation_sector(self):
        # oracle: the four one-hot states; left-half count is 1 for sites 1-2
        vecs = []
        for i in range(4):
            v = np.zeros(16, dtype=complex)
            v[1 << (3 - i)] = 1.0
            vecs.append(v)
        shell = orthonormalize(vecs)
        dec = decompose(shell, left_half_occupation(4))
        assert {c.label: c.dim for c in dec.cells} == {"0": 2, "1": 2}
        assert dec.empty_labels == ("2",)

    def test_incompatible_macro_variable(self):
        # a shell lying across bins of a diagonal variable cannot decompose
        v = np.zeros(4, dtype=complex)
        v[0] = v[3] = 1 / np.sqrt(2)
        shell = Subspace(v[:, None])
        mv = MacroVariable(np.array([0.0, 0.0, 1.0, 1.0]), np.array([-0.5, 0.5, 1.5]))
        with pytest.raises(DecompositionIncompatible):
            decompose(shell, mv)

    def test_dims_sum_to_shell_dim(self):
        h = build_spin_chain(6, 1.0, 25.0)
        evals, evecs = spectral_decompose(h)
        mask = (evals >= -7) & (evals <= 7)       # half-filled sector
        shell = Subspace(evecs[:, mask])
        dec = decompose(shell, left_half_occupation(6))
        assert sum(c.dim for c in dec.cells) == shell.dim

    def test_unitary_invariance_of_dims(self, rng):
        dec0 = decompose(full_space(3), left_half_occupation(3))
        # rotate the shell basis within itself
        q, _ = np.linalg.qr(rng.standard_normal((8, 8)) + 1j * rng.standard_normal((8, 8)))
        rotated = Subspace(np.eye(8, dtype=complex) @ q)
        dec1 = decompose(rotated, left_half_occupation(3))
        assert [c.dim for c in dec0.cells] == [c.dim for c in dec1.cells]


class TestMacroWeight:
    @pytest.fixture
    def dec(self):
        return decompose(full_space(4), left_half_occupation(4))

    def test_state_inside_cell(self, dec):
        cell = dec.cells[2]                     # label "2"
        psi = WaveFunction(cell.subspace.basis[:, 0])
        assert macro_weight(psi, cell) == pytest.approx(1.0, abs=1e-12)

    def test_orthogonal_state(self, dec):
        psi = WaveFunction(dec.cells[0].subspace.basis[:, 0])
        assert macro_weight(psi, dec.cells[2]) == pytest.approx(0.0, abs=1e-12)

    def test_equal_superposition(self, dec):
        a = dec.cells[0].subspace.basis[:, 0]
        b = dec.cells[1].subspace.basis[:, 0]
        psi = WaveFunction((a + b) / np.sqrt(2))
        assert macro_weight(psi, dec.cells[0]) == pytest.approx(0.5, abs=1e-12)
        assert macro_weight(psi, dec.cells[1]) == pytest.approx(0.5, abs=1e-12)

    @given(seed=st.integers(0, 2**32 - 1))
    @settings(max_examples=25, deadline=None)
    def test_completeness_pure_and_mixed(self, seed):
        dec = decompose(full_space(4), left_half_occupation(4))
        r = stream(seed, 7)
        v = r.standard_normal(16) + 1j * r.standard_normal(16)
        psi = WaveFunction(v / np.linalg.norm(v))
        assert macro_weights(psi, dec).sum() == pytest.approx(1.0, abs=1e-8)
        w = psi.density_matrix()
        assert macro_weights(w, dec).sum() == pytest.approx(1.0, abs=1e-8)


class TestEffectiveMacrostate:
    @pytest.fixture
    def dec(self):
        return decompose(full_space(4), left_half_occupation(4))

    def test_member_state(self, dec):
        psi = WaveFunction(dec.cells[1].subspace.basis[:, 0])
        assert effective_macrostate(psi, dec) == "1"

    def test_half_half_superposition_is_none(self, dec):
        a = dec.cells[0].subspace.basis[:, 0]
        b = dec.cells[1].subspace.basis[:, 0]
        psi = WaveFunction((a + b) / np.sqrt(2))
        assert effective_macrostate(psi, dec, ClosenessPolicy(0.99)) is None

    def test_iph_state_lands_in_its_cell(self, dec):
        cell = dec.cells[2]
        w = iph_density_matrix(cell.subspace)
        assert effective_macrostate(w, dec) == cell.label
        # mixed-state entropy equals the pure-state formula on the cell
        assert boltzmann_entropy(cell) == pytest.approx(np.log(cell.dim))


class TestEntropyAndEquilibrium:
    def test_entropy_values(self):
        dec = decompose(full_space(4), total_occupation(4))
        by_label = {c.label: c for c in dec.cells}
        assert boltzmann_entropy(by_label["0"]) == 0.0
        assert boltzmann_entropy(by_label["2"]) == pytest.approx(np.log(6), abs=1e-12)

    def test_entropy_monotone_in_dimension(self):
        dec = decompose(full_space(4), total_occupation(4))
        dims = np.array([c.dim for c in dec.cells])
        ents = np.array([boltzmann_entropy(c) for c in dec.cells])
        order = np.argsort(dims)
        assert np.all(np.diff(ents[order]) >= 0)
        assert np.all(np.diff(ents[order])[np.diff(dims[order]) > 0] > 0)

    def test_equilibrium_is_max_dim(self):
        dec = decompose(full_space(4), total_occupation(4))
        eq = equilibrium_cell(dec)
        assert eq.label == "2"
        assert eq.ratio == pytest.approx(6 / 16)
        assert not eq.tie

    def test_tie_returns_lowest_with_flag(self):
        vecs = []
        for i in range(4):
            v = np.zeros(16, dtype=complex)
            v[1 << (3 - i)] = 1.0
            vecs.append(v)
        dec = decompose(orthonormalize(vecs), left_half_occupation(4))
        inc = IncidentLog()
        eq = equilibrium_cell(dec, inc)
        assert eq.label == "0" and eq.tie and inc.ties == 1

    def test_ten_site_central_dominance(self):
        # oracle: binomial products C(5,k)^2 peak at k = 2, 3 (tie)
        dims = {k: 0 for k in range(6)}
        for bits in itertools.product("01", repeat=10):
            if bits.count("1") == 5:
                dims[bits[:5].count("1")] += 1
        assert dims == {k: int(round(
            math.comb(5, k) * math.comb(5, 5 - k))) for k in range(6)}
        assert max(dims, key=dims.get) in (2, 3)

    def test_summary_shape(self):
        dec = decompose(full_space(3), left_half_occupation(3))
        s = decomposition_summary(dec)
        assert s["shell_dim"] == 8
        assert {c["label"] for c in s["cells"]} == {"0", "1"}
        assert 0 < s["equilibrium"]["ratio"] <= 1


class TestIphEnsembleConsistency:
    def test_mu_s_average_weight_matches_iph(self):
        dec = decompose(full_space(4), left_half_occupation(4))
        cell = dec.cells[1]
        w_iph = iph_density_matrix(cell.subspace)
        target = macro_weights(w_iph, dec)
        r = stream(20240501, 0)
        acc = np.zeros(len(dec.cells))
        m = 4000
        for _ in range(m):
            acc += macro_weights(sample_mu_s(cell.subspace, r), dec)
        assert np.max(np.abs(acc / m - target)) < 3 / np.sqrt(m) + 1e-6
