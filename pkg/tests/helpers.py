"""Shared test utilities: planted generators and comparison helpers."""

from __future__ import annotations

import numpy as np


def rank1_indep_matrices(n: int, r: int) -> list[tuple[np.ndarray, np.ndarray]]:
    """``r`` linearly independent rank-1 matrices ``u v^T`` summing to ``I_n``.

    Valid for ``n <= r <= n^2 - n + 1``. For ``r < 2n - 1`` the all-ones block on
    the leading ``k x k`` corner (``k = r - n + 1``) minus its off-diagonal row and
    column strips gives ``I_k``, and unit diagonal terms fill the rest. Larger
    ``r`` starts from ``J_n`` and splits the strips into smaller rectangles.
    """
    if not n <= r <= n * n - n + 1:
        raise ValueError(f"need {n} <= r <= {n * n - n + 1}, got {r}")
    e = np.eye(n)
    k = min(r - n + 1, n)
    ones_k = np.zeros(n)
    ones_k[:k] = 1.0
    terms = [(ones_k.copy(), ones_k.copy())]
    # strips: row t over cols t+1..k-1 and column t over rows t+1..k-1 (0-based)
    strips = []
    for t in range(k - 1):
        strips.append(("row", t, list(range(t + 1, k))))
        strips.append(("col", t, list(range(t + 1, k))))
    extra = (r - 1) - (2 * (k - 1) + (n - k))
    assert extra == 0 or k == n
    for kind, t, cells in strips:
        splits = min(len(cells) - 1, extra)
        extra -= splits
        pieces = [[c] for c in cells[:splits]] + [cells[splits:]]
        for piece in pieces:
            span = e[piece].sum(axis=0)
            if kind == "row":
                terms.append((-e[t], span))
            else:
                terms.append((-span, e[t]))
    for i in range(k, n):
        terms.append((e[i], e[i]))
    assert len(terms) == r
    return terms


def match_up_to_scale(truth: list[np.ndarray], found: list[np.ndarray]) -> float:
    """Largest distance between unit-normalized, sign-aligned matrices under the best greedy matching."""
    def unit(X):
        X = np.asarray(X, dtype=float).ravel()
        return X / np.linalg.norm(X)

    T = [unit(X) for X in truth]
    F = [unit(X) for X in found]
    used, worst = set(), 0.0
    for f in F:
        dists = [(min(np.linalg.norm(f - t), np.linalg.norm(f + t)), k)
                 for k, t in enumerate(T) if k not in used]
        d, k = min(dists)
        used.add(k)
        worst = max(worst, d)
    return worst


def random_rank1_span(m: int, n: int, r: int, seed):
    rng = np.random.default_rng(seed)
    gens = [np.outer(rng.standard_normal(m), rng.standard_normal(n)) for _ in range(r)]
    mix = rng.standard_normal((r, r))
    basis = [sum(mix[k, l] * gens[l] for l in range(r)) for k in range(r)]
    return gens, basis
