"""Rank-1 elements of a matrix subspace spanned by generic rank-1 matrices.

For a space ``Y`` with basis ``Y_1..Y_r``, a rank-1 element ``z = sum g_k Y_k``
gives the symmetric lift ``z ⊗ z = sum G_kl Y_k ⊗ Y_l`` with ``G = g g^T``.
The lift lies in the span of ``Y_k ⊗ Y_l + Y_l ⊗ Y_k`` and annihilates every
2x2-minor functional. When that intersection has dimension exactly ``r`` it is
spanned by the lifts of the ``r`` rank-1 elements, which simultaneous
diagonalization of the coefficient matrices ``G`` separates.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import AlgorithmFailure
from .linalg import (DEFAULT_TOL, TolerancePolicy, column_space, null_space,
                     simultaneous_diagonalize, svd)


@dataclass(frozen=True)
class MatrixSubspace:
    shape: tuple[int, int]
    basis: tuple[np.ndarray, ...] = field(repr=False)

    def __init__(self, shape: Sequence[int], basis: Sequence[np.ndarray]):
        shape = tuple(int(s) for s in shape)
        mats = tuple(np.asarray(B, dtype=float).reshape(shape) for B in basis)
        object.__setattr__(self, "shape", shape)
        object.__setattr__(self, "basis", mats)

    @property
    def dim(self) -> int:
        return len(self.basis)

    def vectorized(self) -> np.ndarray:
        m, n = self.shape
        if not self.basis:
            return np.zeros((m * n, 0))
        return np.stack([B.reshape(-1) for B in self.basis], axis=1)


def minor_constraints(Y: np.ndarray) -> np.ndarray:
    """Values of every 2x2-minor functional on the symmetric-lift basis.

    ``Y`` has shape ``(r, m, n)``. Rows are indexed by ``(i1<i2, j1<j2)``;
    columns by ``k <= l`` in row-major upper-triangular order, for the lift
    basis element ``Y_k ⊗ Y_l + Y_l ⊗ Y_k``.
    """
    r, m, n = Y.shape
    ku, lu = np.triu_indices(r)
    ja, jb = np.triu_indices(n, k=1)
    blocks = []
    for i1 in range(m - 1):
        for i2 in range(i1 + 1, m):
            outer = np.einsum("ka,lb->klab", Y[:, i1, :], Y[:, i2, :])
            minors = outer[:, :, ja, jb] - outer[:, :, jb, ja]
            sym = minors + minors.transpose(1, 0, 2)
            blocks.append(sym[ku, lu, :].T)
    if not blocks:
        return np.zeros((0, len(ku)))
    return np.vstack(blocks)


def _coeffs_to_symmetric(delta: np.ndarray, r: int) -> np.ndarray:
    G = np.zeros((r, r))
    ku, lu = np.triu_indices(r)
    G[ku, lu] = delta
    G[lu, ku] = delta
    G[np.diag_indices(r)] *= 2
    return G


def normalize_rank1(Z: np.ndarray) -> np.ndarray:
    """Unit Frobenius norm, largest-magnitude entry positive."""
    Z = Z / np.linalg.norm(Z)
    k = np.unravel_index(np.argmax(np.abs(Z)), Z.shape)
    return -Z if Z[k] < 0 else Z


def factor_rank1(Z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Split a rank-1 matrix as ``outer(d, b)`` with ``b`` unit-norm, largest entry positive."""
    _, _, Vt = svd(Z)
    b = Vt[0]
    j = int(np.argmax(np.abs(b)))
    if b[j] < 0:
        b = -b
    return Z @ b, b


def find_rank1_elements(space: MatrixSubspace, r: int | None = None,
                        tol: TolerancePolicy = DEFAULT_TOL, seed: int = 0) -> list[np.ndarray]:
    """Return the ``r`` rank-1 matrices (normalized) whose span is ``space``.

    Raises
    ------
    AlgorithmFailure
        ``"spurious intersection"`` if the lifted intersection does not have
        dimension ``r``, or ``"not rank-1"`` if a recovered element fails the
        rank-1 test.
    DiagonalizationError
        Propagated from :func:`kyflat.linalg.simultaneous_diagonalize`.
    """
    m, n = space.shape
    if r is None:
        r = space.dim
    if space.dim != r:
        raise ValueError(f"space has dimension {space.dim}, expected {r}")
    if r == 0:
        return []
    Q = column_space(space.vectorized(), tol).basis
    if Q.shape[1] != r:
        raise ValueError(f"basis matrices are linearly dependent (rank {Q.shape[1]} < {r})")
    Y = Q.T.reshape(r, m, n)

    if r == 1:
        groups = [np.ones((1, 1))]
    else:
        C = minor_constraints(Y)
        D = null_space(C, tol)
        if D.shape[1] != r:
            raise AlgorithmFailure(
                f"spurious intersection: lifted intersection has dimension {D.shape[1]}, expected {r}",
                step="rank-1 extraction", condition="(x)/(xi)")
        groups = [_coeffs_to_symmetric(D[:, k], r) for k in range(r)]

    coeffs = simultaneous_diagonalize(groups, tol, seed=seed) if r > 1 else [np.ones(1)]
    out = []
    for g in coeffs:
        Z = np.tensordot(g, Y, axes=1)
        s = svd(Z, compute_uv=False)
        if s.size > 1 and s[1] > tol.match_tol * s[0]:
            raise AlgorithmFailure(
                f"not rank-1: recovered element has singular value ratio {s[1] / s[0]:.3g}",
                step="rank-1 extraction", condition="(x)/(xi)")
        out.append(normalize_rank1(Z))
    return out
