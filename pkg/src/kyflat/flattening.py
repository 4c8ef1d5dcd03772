"""Trivial and Koszul-Young flattenings of third-order tensors.

Row and column orders are subset-major, coordinate-minor, with subsets in
lexicographic order. With this order the flattening of a rank-1 tensor
``a x b x c`` is literally ``kron(build_A(a), outer(b, c))``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from math import comb
from typing import Sequence

import numpy as np

from .combinat import SubsetIndexer, sigma
from .tensor_core import Tensor3

STANDARD = "standard"
SWAPPED = "swapped"


def _check_pq(p: int, q: int) -> None:
    if not (0 <= p and p + 1 <= q):
        raise ValueError(f"need 0 <= p <= p+1 <= q, got p={p}, q={q}")


def default_p(q: int, n2: int, n3: int) -> int:
    """``floor(q * n3 / (n2 + n3))``, the choice that makes the flattening closest to square."""
    if q < 1:
        raise ValueError("q must be positive")
    return (q * n3) // (n2 + n3)


def build_A(a: Sequence[float], p: int, q: int) -> np.ndarray:
    """The ``C(q,p) x C(q,p+1)`` matrix with ``A[S, U] = sigma(U, i) * a_i`` when ``U = S + {i}``."""
    a = np.asarray(a, dtype=float)
    _check_pq(p, q)
    if a.size < q:
        raise ValueError(f"vector of length {a.size} is shorter than q={q}")
    rows = SubsetIndexer(q, p)
    cols = SubsetIndexer(q, p + 1)
    col_index = cols.index_map()
    A = np.zeros((rows.count, cols.count))
    for s_idx, S in enumerate(rows.enumerate()):
        for i in range(1, q + 1):
            if i in S:
                continue
            U = tuple(sorted(S + (i,)))
            A[s_idx, col_index[U]] = sigma(U, i) * a[i - 1]
    return A


@dataclass(frozen=True)
class FlatteningMatrix:
    """A Koszul-Young flattening with its index bookkeeping.

    Rows are ``(S, j)`` with ``|S| = row_size`` and ``j`` in ``[n_row]``;
    columns are ``(U, k)`` with ``|U| = row_size + 1`` and ``k`` in ``[n_col]``.
    Subsets and coordinates are 1-based; matrix positions are 0-based.
    """

    matrix: np.ndarray
    p: int
    q: int
    mode: str
    row_size: int
    n_row: int
    n_col: int

    @property
    def shape(self) -> tuple[int, int]:
        return self.matrix.shape

    def row_index(self, S: Sequence[int], j: int) -> int:
        return SubsetIndexer(self.q, self.row_size).rank(S) * self.n_row + (j - 1)

    def col_index(self, U: Sequence[int], k: int) -> int:
        return SubsetIndexer(self.q, self.row_size + 1).rank(U) * self.n_col + (k - 1)

    def row_key(self, idx: int) -> tuple[tuple[int, ...], int]:
        s, j = divmod(idx, self.n_row)
        return SubsetIndexer(self.q, self.row_size).unrank(s), j + 1

    def col_key(self, idx: int) -> tuple[tuple[int, ...], int]:
        u, k = divmod(idx, self.n_col)
        return SubsetIndexer(self.q, self.row_size + 1).unrank(u), k + 1

    def dump(self, path, index_path=None) -> None:
        """Write ``{rows, cols, data}`` JSON and optionally a sidecar index map."""
        m, n = self.matrix.shape
        with open(path, "w") as fh:
            json.dump({"rows": m, "cols": n, "data": self.matrix.reshape(-1).tolist()}, fh)
        if index_path is not None:
            sidecar = {
                "p": self.p, "q": self.q, "mode": self.mode,
                "rows": [[list(S), j] for S, j in map(self.row_key, range(m))],
                "cols": [[list(U), k] for U, k in map(self.col_key, range(n))],
            }
            with open(index_path, "w") as fh:
                json.dump(sidecar, fh)


def _koszul_blocks(slices: np.ndarray, p: int, q: int) -> np.ndarray:
    """Assemble the flattening from ``slices[i]`` (``n_row x n_col``) for ``i`` in ``[q]``."""
    _, n_row, n_col = slices.shape
    rows = SubsetIndexer(q, p)
    col_index = SubsetIndexer(q, p + 1).index_map()
    M = np.zeros((rows.count * n_row, comb(q, p + 1) * n_col))
    for s_idx, S in enumerate(rows.enumerate()):
        r0 = s_idx * n_row
        for i in range(1, q + 1):
            if i in S:
                continue
            U = tuple(sorted(S + (i,)))
            c0 = col_index[U] * n_col
            M[r0:r0 + n_row, c0:c0 + n_col] = sigma(U, i) * slices[i - 1]
    return M


def build_koszul(T: Tensor3, p: int, q: int, mode: str = STANDARD) -> FlatteningMatrix:
    """The flattening ``M(T; p, q)`` (``mode="standard"``) or ``M'(T; p, q)`` (``"swapped"``).

    Only the first ``q`` mode-1 slices of ``T`` are used. The swapped variant
    exchanges the roles of modes 2 and 3 and uses subsets of sizes
    ``q-p-1`` and ``q-p``.
    """
    n1, n2, n3 = T.dims
    if q > n1:
        raise ValueError(f"q={q} exceeds n1={n1}")
    _check_pq(p, q)
    if mode == STANDARD:
        M = _koszul_blocks(T.data[:q], p, q)
        return FlatteningMatrix(M, p, q, mode, p, n2, n3)
    if mode == SWAPPED:
        pp = q - p - 1
        M = _koszul_blocks(np.transpose(T.data[:q], (0, 2, 1)), pp, q)
        return FlatteningMatrix(M, p, q, mode, pp, n3, n2)
    raise ValueError(f"unknown mode {mode!r}")


def build_trivial(T, S: Sequence[int]) -> np.ndarray:
    """Flatten an order-k tensor with the 1-based modes ``S`` as rows.

    Row and column multi-indices run in C order over increasing mode number.
    ``T`` may be a :class:`Tensor3` or any ``numpy`` array.
    """
    data = T.data if isinstance(T, Tensor3) else np.asarray(T, dtype=float)
    k = data.ndim
    S = sorted(set(int(s) for s in S))
    if not S or len(S) == k or any(not 1 <= s <= k for s in S):
        raise ValueError(f"S must be a nonempty proper subset of [1, {k}], got {S}")
    comp = [m for m in range(1, k + 1) if m not in S]
    perm = [s - 1 for s in S] + [m - 1 for m in comp]
    rows = int(np.prod([data.shape[s - 1] for s in S]))
    return np.transpose(data, perm).reshape(rows, -1)


def best_trivial_split(dims: Sequence[int]) -> tuple[list[int], int]:
    """A maximizing subset ``S`` and the threshold ``n_* = max_S min(prod_S, prod_rest)``."""
    k = len(dims)
    best, best_val = None, -1
    for mask in range(1, 2 ** k - 1):
        S = [m + 1 for m in range(k) if mask >> m & 1]
        inside = int(np.prod([dims[s - 1] for s in S]))
        outside = int(np.prod(dims)) // inside
        val = min(inside, outside)
        if val > best_val:
            best, best_val = S, val
    return best, best_val
