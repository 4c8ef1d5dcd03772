"""Fixed-size subsets of ``{1, ..., q}`` in lexicographic order, and the Koszul sign.

Subsets are sorted tuples of 1-based integers. The lexicographic order fixed
here is part of the file-format contract: it determines the row and column
order of every flattening matrix.
"""

from __future__ import annotations

from functools import lru_cache
from itertools import combinations
from math import comb
from typing import Iterable, Sequence


def sigma(U: Sequence[int], i: int) -> int:
    """Return ``(-1) ** #{j in U : j < i}``, the parity of ``i``'s position in ``U``.

    >>> sigma((1, 2), 2)
    -1
    """
    if i not in U:
        raise ValueError(f"{i} is not an element of {tuple(U)}")
    return -1 if sum(1 for j in U if j < i) % 2 else 1


@lru_cache(maxsize=None)
def _all_subsets(q: int, p: int) -> tuple[tuple[int, ...], ...]:
    return tuple(combinations(range(1, q + 1), p))


class SubsetIndexer:
    """Bijection between the ``p``-subsets of ``[q]`` and ``0 .. C(q, p) - 1``.

    Parameters
    ----------
    q : int
        Ground-set size; elements are ``1..q``.
    p : int
        Subset size, ``0 <= p <= q``.
    """

    def __init__(self, q: int, p: int):
        if q < 0 or p < 0 or p > q:
            raise ValueError(f"need 0 <= p <= q, got p={p}, q={q}")
        if q > 64:
            raise ValueError("ground sets larger than 64 are not supported")
        self.q = q
        self.p = p
        self.count = comb(q, p)

    def __len__(self) -> int:
        return self.count

    def __repr__(self) -> str:
        return f"SubsetIndexer(q={self.q}, p={self.p})"

    def _check(self, S: Iterable[int]) -> tuple[int, ...]:
        S = tuple(S)
        if len(S) != self.p:
            raise ValueError(f"expected a {self.p}-subset, got {S}")
        if any(not 1 <= s <= self.q for s in S):
            raise ValueError(f"subset {S} is not contained in [1, {self.q}]")
        if any(S[k] >= S[k + 1] for k in range(len(S) - 1)):
            raise ValueError(f"subset {S} must be strictly increasing")
        return S

    def rank(self, S: Iterable[int]) -> int:
        """Lexicographic position of ``S`` (0 for ``{1..p}``)."""
        S = self._check(S)
        # count subsets whose first differing element is smaller
        idx = 0
        prev = 0
        for pos, s in enumerate(S):
            remaining = self.p - pos - 1
            for v in range(prev + 1, s):
                idx += comb(self.q - v, remaining)
            prev = s
        return idx

    def unrank(self, idx: int) -> tuple[int, ...]:
        if not 0 <= idx < self.count:
            raise ValueError(f"index {idx} out of range [0, {self.count})")
        out = []
        v = 1
        for pos in range(self.p):
            remaining = self.p - pos - 1
            while True:
                block = comb(self.q - v, remaining)
                if idx < block:
                    break
                idx -= block
                v += 1
            out.append(v)
            v += 1
        return tuple(out)

    def enumerate(self) -> tuple[tuple[int, ...], ...]:
        """All ``p``-subsets of ``[q]`` in lexicographic order."""
        return _all_subsets(self.q, self.p)

    def index_map(self) -> dict[tuple[int, ...], int]:
        return {S: k for k, S in enumerate(self.enumerate())}
