import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kyflat.errors import DiagonalizationError
from kyflat.linalg import (DEFAULT_TOL, SubspaceBasis, TolerancePolicy, column_space, intersect,
                           null_space, numerical_rank, rank_margin, simultaneous_diagonalize,
                           solve_linear)


def span(*vecs):
    return column_space(np.column_stack(vecs))


def same_span(U: SubspaceBasis, V: SubspaceBasis) -> bool:
    return U.dim == V.dim and np.allclose(U.projector(), V.projector(), atol=1e-10)


class TestTolerancePolicy:
    @pytest.mark.parametrize("field", ["rank_rel_tol", "match_tol", "solve_residual_tol"])
    @pytest.mark.parametrize("value", [0.0, -1e-3, 1.0, 2.0])
    def test_bounds(self, field, value):
        with pytest.raises(ValueError):
            TolerancePolicy(**{field: value})

    def test_defaults(self):
        assert DEFAULT_TOL.to_dict() == {"rank_rel_tol": 1e-9, "match_tol": 1e-6,
                                         "solve_residual_tol": 1e-8}


class TestRank:
    def test_examples(self):
        assert numerical_rank(np.eye(3)) == 3
        assert numerical_rank(np.zeros((3, 4))) == 0
        assert numerical_rank(np.outer([1.0, 2.0, 3.0], [4.0, 5.0])) == 1

    def test_margin(self):
        k, margin = rank_margin(np.diag([1.0, 1e-3]))
        assert k == 2 and margin > 1e3
        assert rank_margin(np.zeros((2, 2)))[1] == float("inf")

    @settings(max_examples=60, deadline=None)
    @given(st.integers(1, 8), st.integers(1, 8), st.integers(0, 8), st.integers(0, 2**32 - 1))
    def test_transpose_symmetry(self, m, n, k, seed):
        rng = np.random.default_rng(seed)
        A = rng.standard_normal((m, k)) @ rng.standard_normal((k, n))
        assert numerical_rank(A) == numerical_rank(A.T) == min(m, n, k)


class TestColumnSpace:
    def test_identity(self):
        assert column_space(np.eye(4)).dim == 4

    def test_line(self):
        B = column_space(np.array([[1.0], [1.0]])).basis
        np.testing.assert_allclose(np.abs(B[:, 0]), [2 ** -0.5] * 2)

    def test_consistent_with_rank(self):
        rng = np.random.default_rng(0)
        A = rng.standard_normal((6, 3)) @ rng.standard_normal((3, 7))
        Q = column_space(A).basis
        assert Q.shape[1] == numerical_rank(A)
        np.testing.assert_allclose(Q.T @ Q, np.eye(Q.shape[1]), atol=1e-12)


class TestIntersect:
    e = np.eye(3)

    def test_overlap(self):
        I = intersect(span(self.e[0], self.e[1]), span(self.e[1], self.e[2]))
        assert same_span(I, span(self.e[1]))

    def test_trivial(self):
        assert intersect(span(self.e[0]), span(self.e[1])).dim == 0

    def test_self(self):
        U = span(self.e[0] + self.e[2], self.e[1])
        assert same_span(intersect(U, U), U)

    def test_ambient_mismatch(self):
        with pytest.raises(ValueError):
            intersect(SubspaceBasis.zero(3), SubspaceBasis.zero(4))

    def test_orthonormal_output(self):
        rng = np.random.default_rng(2)
        common = rng.standard_normal((10, 3))
        U = column_space(np.hstack([common, rng.standard_normal((10, 2))]))
        V = column_space(np.hstack([common, rng.standard_normal((10, 3))]))
        I = intersect(U, V)
        assert I.dim == 3
        np.testing.assert_allclose(I.basis.T @ I.basis, np.eye(3), atol=1e-12)
        assert all(U.contains(v) and V.contains(v) for v in I.basis.T)

    @settings(max_examples=60, deadline=None)
    @given(st.integers(1, 10), st.data())
    def test_dimension_formula(self, n, data):
        a = data.draw(st.integers(0, n))
        b = data.draw(st.integers(0, n))
        rng = np.random.default_rng(data.draw(st.integers(0, 2**32 - 1)))
        U = column_space(rng.standard_normal((n, a))) if a else SubspaceBasis.zero(n)
        V = column_space(rng.standard_normal((n, b))) if b else SubspaceBasis.zero(n)
        assert intersect(U, V).dim >= U.dim + V.dim - n


class TestSolve:
    def test_identity(self):
        b = np.array([1.0, -2.0, 3.0])
        sol = solve_linear(np.eye(3), b)
        np.testing.assert_allclose(sol.solution, b)
        assert sol.residual == 0 and sol.is_unique

    def test_tall(self):
        sol = solve_linear(np.array([[1.0], [1.0]]), np.array([1.0, 1.0]))
        np.testing.assert_allclose(sol.solution, [1.0])
        assert sol.residual < 1e-15 and sol.is_unique

    def test_min_norm(self):
        sol = solve_linear(np.array([[1.0, 1.0]]), np.array([2.0]))
        np.testing.assert_allclose(sol.solution, [1.0, 1.0])
        assert not sol.is_unique

    def test_random_consistent(self):
        rng = np.random.default_rng(3)
        A = rng.standard_normal((20, 8))
        sol = solve_linear(A, A @ rng.standard_normal(8))
        assert sol.residual < 1e-10

    def test_inconsistent_reports_residual(self):
        sol = solve_linear(np.array([[1.0], [0.0]]), np.array([0.0, 1.0]))
        assert sol.residual == pytest.approx(1.0)


def test_null_space_wide_and_tall():
    A = np.array([[1.0, 1.0, 0.0]])
    N = null_space(A)
    assert N.shape == (3, 2)
    np.testing.assert_allclose(A @ N, 0, atol=1e-15)
    assert null_space(np.eye(3)).shape == (3, 0)


class TestSimultaneousDiagonalize:
    def test_single(self):
        z = np.array([1.0, 2.0])
        (w,) = simultaneous_diagonalize([np.outer(z, z)])
        np.testing.assert_allclose(np.abs(w), np.abs(z) / np.linalg.norm(z))

    def test_axes(self):
        e = np.eye(2)
        out = simultaneous_diagonalize([np.outer(e[0], e[0]) + np.outer(e[1], e[1]),
                                        np.outer(e[0], e[0]) - 2 * np.outer(e[1], e[1])])
        got = sorted(tuple(np.round(np.abs(w), 12)) for w in out)
        assert got == [(0.0, 1.0), (1.0, 0.0)]

    @pytest.mark.parametrize("seed", range(5))
    def test_random_mixing(self, seed):
        rng = np.random.default_rng(seed)
        Z = rng.standard_normal((5, 3))
        beta = rng.standard_normal((3, 3))
        slices = [sum(beta[k, m] * np.outer(Z[:, m], Z[:, m]) for m in range(3)) for k in range(3)]
        out = simultaneous_diagonalize(slices, seed=seed)
        truth = [np.outer(z, z) / (z @ z) for z in Z.T]
        for w in out:
            W = np.outer(w, w)
            assert min(np.linalg.norm(W - T) for T in truth) < 1e-8

    def test_dependent_vectors_rejected(self):
        z = np.array([1.0, 0.0, 0.0])
        with pytest.raises(DiagonalizationError):
            simultaneous_diagonalize([np.outer(z, z), 2 * np.outer(z, z)])

    def test_repeated_directions_unstable(self):
        # two slices that are both the identity on a plane admit no unique separation
        P = np.diag([1.0, 1.0, 0.0])
        with pytest.raises(DiagonalizationError, match="unstable|diagonalizable"):
            simultaneous_diagonalize([P, 3 * P])
