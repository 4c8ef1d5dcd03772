import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kyflat.flattening import build_trivial
from kyflat.linalg import numerical_rank
from kyflat.tensor_core import (CPDecomposition, Tensor3, assemble, match_and_score,
                                random_generic_decomposition, rank1_distance, sign_normalize,
                                slice_tensor)

E1, E2 = [1.0, 0.0], [0.0, 1.0]


def two_term():
    return CPDecomposition.from_vectors([E1, E2], [E1, E2], [E1, E2])


class TestTensor3:
    def test_row_major_entries(self):
        T = Tensor3.from_entries((2, 3, 4), np.arange(24))
        # (i, j, k) 1-based sits at ((i-1) n2 + (j-1)) n3 + (k-1)
        assert T.data[1, 2, 3] == ((2 - 1) * 3 + (3 - 1)) * 4 + (4 - 1)
        np.testing.assert_array_equal(T.entries, np.arange(24))

    def test_wrong_length(self):
        with pytest.raises(ValueError):
            Tensor3.from_entries((2, 2, 2), [1.0] * 7)

    @pytest.mark.parametrize("bad", [np.nan, np.inf])
    def test_non_finite(self, bad):
        with pytest.raises(ValueError):
            Tensor3(np.full((2, 2, 2), bad))

    def test_immutable(self):
        T = Tensor3.zeros((2, 2, 2))
        with pytest.raises(ValueError):
            T.data[0, 0, 0] = 1.0

    def test_permute(self):
        X = np.random.default_rng(0).standard_normal((2, 3, 4))
        assert Tensor3(X).permute((1, 3, 2)).dims == (2, 4, 3)
        np.testing.assert_array_equal(Tensor3(X).permute((1, 3, 2)).data, X.transpose(0, 2, 1))


class TestCPDecomposition:
    def test_rejects_zero_vector(self):
        with pytest.raises(ValueError, match="term 2 has a zero b-vector"):
            CPDecomposition.from_vectors([E1, E2], [E1, [0.0, 0.0]], [E1, E2])

    def test_allow_zero(self):
        d = CPDecomposition.from_vectors([E1], [[0.0, 0.0]], [E1], allow_zero=True)
        assert d.r == 1

    def test_length_mismatch_names_term(self):
        with pytest.raises(ValueError, match="term 2"):
            CPDecomposition.from_vectors([E1, E2], [E1, [1.0, 2.0, 3.0]], [E1, E2], dims=(2, 2, 2))

    def test_normalized_preserves_tensor(self):
        d = random_generic_decomposition((4, 5, 6), 3, seed=1)
        n = d.normalized()
        np.testing.assert_allclose(assemble(n).data, assemble(d).data, atol=1e-12)
        np.testing.assert_allclose(np.linalg.norm(n.B, axis=0), 1.0)
        np.testing.assert_allclose(np.linalg.norm(n.C, axis=0), 1.0)
        for M in (n.B, n.C):
            idx = np.argmax(np.abs(M), axis=0)
            assert np.all(M[idx, np.arange(M.shape[1])] > 0)


class TestAssemble:
    def test_empty(self):
        d = CPDecomposition(np.zeros((2, 0)), np.zeros((3, 0)), np.zeros((4, 0)))
        np.testing.assert_array_equal(assemble(d).data, np.zeros((2, 3, 4)))

    def test_unit_rank1(self):
        T = assemble(CPDecomposition.from_vectors([E1], [E1], [E1]))
        expected = np.zeros((2, 2, 2))
        expected[0, 0, 0] = 1
        np.testing.assert_array_equal(T.data, expected)

    def test_disjoint_terms(self):
        T = assemble(two_term())
        assert T.data[0, 0, 0] == T.data[1, 1, 1] == 1
        assert T.data.sum() == 2

    def test_dims_mismatch(self):
        with pytest.raises(ValueError, match="term"):
            assemble(two_term(), dims=(2, 3, 2))

    def test_linear_in_concatenation(self):
        d1 = random_generic_decomposition((3, 4, 5), 2, seed=1)
        d2 = random_generic_decomposition((3, 4, 5), 3, seed=2)
        np.testing.assert_allclose(assemble(d1.concat(d2)).data,
                                   (assemble(d1) + assemble(d2)).data, atol=1e-13)

    def test_scale_invariance(self):
        d = random_generic_decomposition((3, 4, 5), 2, seed=3)
        s = np.array([2.5, -0.3])
        scaled = CPDecomposition(d.A * s, d.B / s, d.C)
        np.testing.assert_allclose(assemble(scaled).data, assemble(d).data,
                                   rtol=1e-12, atol=1e-12 * assemble(d).norm())


class TestSlice:
    def test_examples(self):
        T = assemble(two_term())
        np.testing.assert_array_equal(slice_tensor(T, 1, 1), [[1, 0], [0, 0]])
        np.testing.assert_array_equal(slice_tensor(T, 1, 2), [[0, 0], [0, 1]])

    def test_zero(self):
        np.testing.assert_array_equal(slice_tensor(Tensor3.zeros((2, 3, 4)), 2, 3), np.zeros((2, 4)))

    def test_other_modes(self):
        X = np.random.default_rng(0).standard_normal((2, 3, 4))
        T = Tensor3(X)
        np.testing.assert_array_equal(slice_tensor(T, 2, 2), X[:, 1, :])
        np.testing.assert_array_equal(slice_tensor(T, 3, 4), X[:, :, 3])

    @pytest.mark.parametrize("mode,index", [(1, 0), (1, 3), (3, 5)])
    def test_out_of_range(self, mode, index):
        with pytest.raises(IndexError):
            slice_tensor(Tensor3.zeros((2, 3, 4)), mode, index)


class TestRandom:
    def test_deterministic(self):
        a = random_generic_decomposition((5, 5, 5), 3, seed=11)
        b = random_generic_decomposition((5, 5, 5), 3, seed=11)
        np.testing.assert_array_equal(a.A, b.A)
        np.testing.assert_array_equal(a.C, b.C)

    def test_nonzero_and_rank(self):
        d = random_generic_decomposition((5, 5, 5), 3, seed=4)
        assert all(np.linalg.norm(v) > 0 for t in d.terms() for v in t)
        assert numerical_rank(build_trivial(assemble(d), [1])) == 3


class TestMatching:
    def test_identity(self):
        d = random_generic_decomposition((4, 5, 6), 4, seed=0)
        rep = match_and_score(d, d)
        assert rep.matched_permutation == (0, 1, 2, 3)
        assert rep.max_relative_error == 0.0
        assert rep.reconstruction_relative_error == 0.0
        assert not rep.ambiguous

    def test_reverse_and_rescale(self):
        d = random_generic_decomposition((4, 5, 6), 3, seed=0)
        rev = d.permuted([2, 1, 0])
        f = CPDecomposition(rev.A * 2, rev.B * 3, rev.C / 6)
        rep = match_and_score(d, f)
        assert rep.matched_permutation == (2, 1, 0)
        assert rep.max_relative_error < 1e-14

    def test_sign_flip_hand_computed(self):
        # on a 2x2x2 instance the unit rank-1 tensors X and -X are 2 apart
        truth = two_term()
        flipped = CPDecomposition(truth.A, truth.B * np.array([-1.0, 1.0]), truth.C)
        rep = match_and_score(truth, flipped)
        assert rep.per_term_relative_error[0] == pytest.approx(2.0)
        assert rep.per_term_relative_error[1] == 0.0
        assert rep.ambiguous
        both = CPDecomposition(truth.A * np.array([-1.0, 1.0]), flipped.B, truth.C)
        assert match_and_score(truth, both).max_relative_error == 0.0

    def test_rank_mismatch(self):
        with pytest.raises(ValueError, match="rank mismatch"):
            match_and_score(random_generic_decomposition((3, 3, 3), 2, seed=0),
                            random_generic_decomposition((3, 3, 3), 3, seed=0))

    def test_distance_is_accurate_for_close_terms(self):
        rng = np.random.default_rng(5)
        a, b, c = (rng.standard_normal(n) for n in (4, 5, 6))
        eps = 1e-10
        d = rank1_distance((a, b, c), (a + eps * rng.standard_normal(4), b, c))
        assert 0 < d < 1e-9


def test_sign_normalize():
    np.testing.assert_array_equal(sign_normalize(np.array([1.0, -3.0])), [-1.0, 3.0])


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 4), st.integers(1, 4), st.integers(1, 4), st.integers(1, 4),
       st.integers(0, 2**32 - 1))
def test_match_self_property(n1, n2, n3, r, seed):
    d = random_generic_decomposition((n1, n2, n3), r, seed=seed)
    assert match_and_score(d, d).max_relative_error == 0.0
