import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hbsmimo.beamspace import (BeamspaceChannel, HybridSelector, SelectionGroup,
                               build_hybrid_selector, equivalent_channel, select_sbs,
                               to_beamspace)
from hbsmimo.channel import ArrayGeometry, sample_channel_set, steering_vector
from hbsmimo.exceptions import ConfigurationError
from hbsmimo.numerics import dft_matrix

from conftest import crandn


def nominal_beamspace(seed, L=3, trial=0):
    cs = sample_channel_set(ArrayGeometry(256), 16, L, seed=seed, trial=trial)
    return to_beamspace(cs, dft_matrix(256))


class TestToBeamspace:
    def test_on_grid_single_beam(self):
        M = 64
        H = np.stack([steering_vector(m / M, M) for m in (3, 40)], axis=1)
        bs = to_beamspace(H, dft_matrix(M))
        for k, m in enumerate((3, 40)):
            col = np.abs(bs.matrix[:, k])
            assert int(np.argmax(col)) == m
            assert col[m] >= 0.99

    def test_single_antenna(self):
        H = np.array([[1 + 2j, -0.5j]])
        np.testing.assert_allclose(to_beamspace(H, dft_matrix(1)).matrix, H)

    def test_frobenius_preserved(self, rng):
        H = crandn(rng, 32, 5)
        bs = to_beamspace(H, dft_matrix(32))
        assert np.linalg.norm(bs.matrix) == pytest.approx(np.linalg.norm(H), rel=1e-10)

    def test_size_mismatch(self):
        with pytest.raises(ConfigurationError):
            to_beamspace(np.ones((8, 2)), dft_matrix(4))


def _toy(energies):
    return BeamspaceChannel(np.sqrt(np.asarray(energies, dtype=float)).T.astype(complex))


class TestSelectSbs:
    def test_disjoint_dominant_beams(self):
        bs = _toy([[0.1, 5.0, 0.2, 0.0], [0.0, 0.3, 0.1, 4.0]])
        g = select_sbs(bs, 2)
        assert g.beams_of(0) == (1,) and g.beams_of(1) == (3,)

    def test_shared_strongest_beam_brute_force(self):
        # both users peak on beam 1; user 1 is stronger there
        E = np.array([[2.0, 5.0, 1.0, 0.0],
                      [0.5, 6.0, 0.2, 3.0]])
        g = select_sbs(_toy(E), 2)
        assert g.beams_of(1) == (1,)
        assert g.beams_of(0) == (0,)
        picked = E[0, g.beams_of(0)[0]] + E[1, g.beams_of(1)[0]]
        best = max(E[0, a] + E[1, b] for a, b in itertools.permutations(range(4), 2))
        assert picked == best

    def test_nominal_budget(self):
        g = select_sbs(nominal_beamspace(0), 48)
        assert g.size == 48 and len(set(g.beam_indices)) == 48
        assert all(len(g.beams_of(k)) == 3 for k in range(16))

    def test_deterministic(self):
        a = select_sbs(nominal_beamspace(1), 48)
        b = select_sbs(nominal_beamspace(1), 48)
        assert a == b

    def test_ties_prefer_low_index(self):
        g = select_sbs(_toy([[1.0, 1.0, 1.0, 1.0]]), 2 // 2 * 1)
        assert g.beam_indices == (0,)

    @pytest.mark.parametrize("n_rf", [40, 17, 512])
    def test_bad_budgets(self, n_rf):
        with pytest.raises(ConfigurationError):
            select_sbs(nominal_beamspace(0), n_rf)


class TestHybridSelector:
    def test_fig2_groups(self):
        sel = build_hybrid_selector(nominal_beamspace(2), 32, 16, 1.0)
        assert sel.group1.size == 32 and sel.group2.size == 16
        assert all(len(sel.group1.beams_of(k)) == 2 for k in range(16))
        assert not set(sel.group1.beam_indices) & set(sel.group2.beam_indices)
        assert sel.clusters == 2

    def test_fig3_case_one_clusters(self):
        sel = build_hybrid_selector(nominal_beamspace(2), 48, 32, 0.0)
        assert sel.clusters == 2 and sel.width == 80

    def test_group1_matches_sbs(self):
        bs = nominal_beamspace(3)
        assert build_hybrid_selector(bs, 48, 32, 1.0).group1 == select_sbs(bs, 48)

    def test_xi_zero_blanks_first_block(self):
        sel = build_hybrid_selector(nominal_beamspace(4), 32, 16, 0.0)
        S = sel.matrix(256)
        assert not S[:, :32].any()
        np.testing.assert_array_equal(S[:, 32:], sel.group2.matrix(256))

    def test_too_many_beams(self):
        bs = to_beamspace(crandn(np.random.default_rng(0), 8, 2), dft_matrix(8))
        with pytest.raises(ConfigurationError):
            build_hybrid_selector(bs, 6, 4, 1.0)

    def test_bad_xi(self):
        with pytest.raises(ConfigurationError):
            build_hybrid_selector(nominal_beamspace(0), 32, 16, 1.5)

    @pytest.mark.parametrize("xi", [0.0, 0.3, 1.0])
    def test_selector_gram_diagonal(self, xi):
        sel = build_hybrid_selector(nominal_beamspace(5), 32, 16, xi)
        S = sel.matrix(256)
        gram = S.T @ S
        np.testing.assert_array_equal(gram, np.diag(np.diag(gram)))
        assert set(np.round(np.diag(gram), 12)) <= {round(xi ** 2, 12), round((1 - xi) ** 2, 12)}

    def test_overlapping_groups_rejected(self):
        g = SelectionGroup((1, 2), (0, 1))
        with pytest.raises(ConfigurationError):
            HybridSelector(g, g, 0.5, 2)


class TestEquivalentChannel:
    def test_xi_one_zeroes_group2_rows(self):
        bs = nominal_beamspace(6)
        eq = equivalent_channel(bs, build_hybrid_selector(bs, 32, 16, 1.0))
        assert not eq.matrix[32:].any()

    def test_matches_selector_product(self):
        bs = nominal_beamspace(7)
        sel = build_hybrid_selector(bs, 32, 16, 0.25)
        eq = equivalent_channel(bs, sel)
        np.testing.assert_allclose(eq.matrix, sel.matrix(256).T @ bs.matrix, atol=1e-15)

    def test_full_support_preserves_energy(self):
        M = 32
        H = np.stack([steering_vector(2 / M, M) + 0.5 * steering_vector(9 / M, M),
                      steering_vector(20 / M, M) - 1j * steering_vector(25 / M, M)], axis=1)
        bs = to_beamspace(H, dft_matrix(M))
        eq = equivalent_channel(bs, build_hybrid_selector(bs, 4, 2, 1.0))
        np.testing.assert_allclose(np.linalg.norm(eq.matrix, axis=0),
                                   np.linalg.norm(H, axis=0), rtol=1e-10)

    def test_direct_indexing(self):
        bs = BeamspaceChannel(np.array([[2.0], [1.0], [0.0], [0.0]], dtype=complex))
        sel = HybridSelector(SelectionGroup((0,), (0,)), SelectionGroup((1,), (0,)), 1.0, 1)
        np.testing.assert_array_equal(equivalent_channel(bs, sel).matrix.ravel(), [2, 0])

    @pytest.mark.parametrize("xi", [0.0, 1.0])
    def test_selection_never_amplifies(self, xi):
        bs = nominal_beamspace(8)
        eq = equivalent_channel(bs, build_hybrid_selector(bs, 48, 32, xi))
        assert np.all(np.linalg.norm(eq.matrix, axis=0)
                      <= np.linalg.norm(bs.matrix, axis=0) + 1e-12)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10_000), L=st.integers(1, 3))
def test_allocation_counts_exact(seed, L):
    bs = nominal_beamspace(seed, L)
    sel = build_hybrid_selector(bs, 48, 32, 1.0)
    for group, per in ((sel.group1, 3), (sel.group2, 2)):
        assert all(len(group.beams_of(k)) == per for k in range(16))


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10_000), L=st.integers(1, 3))
def test_captured_energy_monotone_in_budget(seed, L):
    bs = nominal_beamspace(seed, L)
    captured = []
    for budget in (16, 32, 48, 64):
        eq = equivalent_channel(bs, HybridSelector.single(select_sbs(bs, budget), 16))
        captured.append(np.sum(np.abs(eq.matrix) ** 2))
    assert all(b >= a - 1e-12 for a, b in zip(captured, captured[1:]))
