import numpy as np
import pytest

from helpers import match_up_to_scale, random_rank1_span
from kyflat.errors import AlgorithmFailure
from kyflat.rank1_extract import (MatrixSubspace, factor_rank1, find_rank1_elements,
                                  minor_constraints, normalize_rank1)


def test_single_term():
    Z = np.outer([1.0, -2.0, 0.5], [3.0, 1.0])
    (out,) = find_rank1_elements(MatrixSubspace((3, 2), [Z]), 1)
    np.testing.assert_allclose(out, normalize_rank1(Z), atol=1e-14)
    assert np.linalg.norm(out) == pytest.approx(1.0)


def test_coordinate_pair():
    e = np.eye(2)
    out = find_rank1_elements(MatrixSubspace((2, 2), [np.outer(e[0], e[0]), np.outer(e[1], e[1])]), 2)
    assert match_up_to_scale([np.outer(e[0], e[0]), np.outer(e[1], e[1])], out) < 1e-12


@pytest.mark.parametrize("seed", range(5))
def test_random_3x8(seed):
    gens, basis = random_rank1_span(3, 8, 3, seed)
    out = find_rank1_elements(MatrixSubspace((3, 8), basis), 3)
    assert len(out) == 3
    assert match_up_to_scale(gens, out) < 1e-8
    for Z in out:
        s = np.linalg.svd(Z, compute_uv=False)
        assert s[1] < 1e-10 * s[0]


def test_idempotent():
    gens, basis = random_rank1_span(4, 10, 6, 3)
    out = find_rank1_elements(MatrixSubspace((4, 10), basis), 6)
    again = find_rank1_elements(MatrixSubspace((4, 10), out), 6, seed=7)
    assert match_up_to_scale(out, again) < 1e-10


def test_spurious_intersection():
    # a generic 3-dimensional space of 3x3 matrices holds no rank-1 lifts at all
    rng = np.random.default_rng(0)
    space = MatrixSubspace((3, 3), [rng.standard_normal((3, 3)) for _ in range(3)])
    with pytest.raises(AlgorithmFailure, match="spurious intersection"):
        find_rank1_elements(space, 3)


def test_dimension_checks():
    Z = np.outer([1.0, 2.0], [1.0, 0.0])
    with pytest.raises(ValueError):
        find_rank1_elements(MatrixSubspace((2, 2), [Z]), 2)
    with pytest.raises(ValueError, match="dependent"):
        find_rank1_elements(MatrixSubspace((2, 2), [Z, 2 * Z]), 2)
    assert find_rank1_elements(MatrixSubspace((2, 2), []), 0) == []


def test_minor_constraints_annihilate_lifts():
    gens, basis = random_rank1_span(3, 4, 3, 1)
    Y = np.stack(basis)
    C = minor_constraints(Y)
    assert C.shape == (3 * 6, 6)
    # the lift of a rank-1 element g.Y has coefficients g_k g_l (halved on the diagonal)
    mix = np.linalg.lstsq(Y.reshape(3, -1).T, gens[0].ravel(), rcond=None)[0]
    G = np.outer(mix, mix)
    ku, lu = np.triu_indices(3)
    delta = np.where(ku == lu, G[ku, lu] / 2, G[ku, lu])
    assert np.linalg.norm(C @ delta) < 1e-10 * np.linalg.norm(C) * np.linalg.norm(delta)


def test_factor_rank1():
    Z = np.outer([2.0, -1.0], [0.0, -3.0, 4.0])
    d, b = factor_rank1(Z)
    np.testing.assert_allclose(np.outer(d, b), Z, atol=1e-14)
    assert np.linalg.norm(b) == pytest.approx(1.0) and b[np.argmax(np.abs(b))] > 0
