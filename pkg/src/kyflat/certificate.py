"""Efficiently checkable sufficient conditions for a unique, recoverable decomposition.

Given a candidate decomposition ``T = sum a(l) x b(l) x c(l)`` and flattening
parameters ``(p, q)``, eleven conditions (i)-(xi) are checked. If all hold,
the decomposition is the unique rank-``r`` decomposition of ``T`` and
:func:`kyflat.decompose.decompose` recovers it.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from itertools import combinations
from math import comb
from typing import Optional

import numpy as np

from .combinat import SubsetIndexer
from .flattening import STANDARD, SWAPPED, build_A, build_koszul, default_p
from .linalg import DEFAULT_TOL, TolerancePolicy, rank_margin
from .rank_detect import alpha_ratio
from .tensor_core import CPDecomposition, assemble

LABELS = ("i", "ii", "iii", "iv", "v", "vi", "vii", "viii", "ix", "x", "xi")


@dataclass(frozen=True)
class ConditionRecord:
    label: str
    description: str
    passed: bool
    measured: float
    required: float
    margin: Optional[float] = None


@dataclass(frozen=True)
class GenericRegime:
    """Parameter regime in which generic components are guaranteed to pass."""

    alpha: float
    q_requirement: float
    r_bound: float
    p_is_default: bool
    within_guarantee: bool


@dataclass(frozen=True)
class UniquenessCertificate:
    conditions: tuple[ConditionRecord, ...]
    p: int
    q: int
    p_bar: int
    r: int
    generic_regime: GenericRegime
    overall: bool = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "overall", all(c.passed for c in self.conditions))

    def __getitem__(self, label: str) -> ConditionRecord:
        for c in self.conditions:
            if c.label == label:
                return c
        raise KeyError(label)

    def failed(self) -> list[str]:
        return [c.label for c in self.conditions if not c.passed]

    def to_dict(self) -> dict:
        out = asdict(self)
        out["conditions"] = [asdict(c) for c in self.conditions]
        out["failed"] = self.failed()
        for c in out["conditions"]:
            if c["margin"] == float("inf"):
                c["margin"] = None
        return out


def _sides(decomp: CPDecomposition, p: int, q: int, mode: str):
    """(mode-vector matrix, row subset size) for the requested side."""
    if mode == STANDARD:
        return decomp.B, p
    if mode == SWAPPED:
        return decomp.C, q - p - 1
    raise ValueError(f"unknown mode {mode!r}")


def build_N(decomp: CPDecomposition, p: int, q: int, mode: str = STANDARD) -> np.ndarray:
    """Rows ``(S, j)`` with ``S`` not inside ``[p+1]``; columns ``(U, l)`` with ``1 in U != [p+1]``.

    Entry ``b(l)_j * A(a(l); p, q)[S, U]``. The swapped variant uses ``c`` and
    ``q-p-1``.
    """
    if q > decomp.dims[0]:
        raise ValueError(f"q={q} exceeds n1={decomp.dims[0]}")
    W, pw = _sides(decomp, p, q, mode)
    if not 0 <= pw <= q - 1:
        raise ValueError(f"invalid p={p} for q={q}")
    head = set(range(1, pw + 2))
    rows_all = SubsetIndexer(q, pw).enumerate()
    cols_all = SubsetIndexer(q, pw + 1).enumerate()
    rows = [k for k, S in enumerate(rows_all) if not set(S) <= head]
    cols = [k for k, U in enumerate(cols_all) if 1 in U and set(U) != head]
    r = decomp.r
    blocks = np.stack([build_A(a, pw, q)[np.ix_(rows, cols)] for a in decomp.A.T]) if r else \
        np.zeros((0, len(rows), len(cols)))
    N = np.einsum("lsu,jl->sjul", blocks, W)
    return N.reshape(len(rows) * W.shape[0], len(cols) * r)


def build_P(decomp: CPDecomposition, p: int, q: int | None = None, mode: str = STANDARD) -> np.ndarray:
    """Rows ``(i1<i2, j1<j2)``, columns ``(l1<l2)``: the four-term expression in ``(d, b)``.

    ``d(l)`` is the first ``p+1`` entries of ``a(l)``; the swapped variant uses the
    first ``q-p`` entries and ``c`` (``q`` is then required).
    """
    if mode == STANDARD:
        W, plen = decomp.B, p + 1
    elif mode == SWAPPED:
        if q is None:
            raise ValueError("q is required for the swapped variant")
        W, plen = decomp.C, q - p
    else:
        raise ValueError(f"unknown mode {mode!r}")
    D = decomp.A[:plen]
    n = W.shape[0]
    ipairs = list(combinations(range(plen), 2))
    jpairs = list(combinations(range(n), 2))
    lpairs = list(combinations(range(decomp.r), 2))
    P = np.zeros((len(ipairs) * len(jpairs), len(lpairs)))
    if not lpairs or not ipairs or not jpairs:
        return P
    i1, i2 = map(np.array, zip(*ipairs))
    j1, j2 = map(np.array, zip(*jpairs))
    l1, l2 = map(np.array, zip(*lpairs))

    def term(x1, y1, x2, y2, la, lb):
        # a(la)_{x1} b(la)_{y1} a(lb)_{x2} b(lb)_{y2} over all (i-pair, j-pair, l-pair)
        return (D[x1][:, None, :][..., la] * W[y1][None, :, :][..., la]
                * D[x2][:, None, :][..., lb] * W[y2][None, :, :][..., lb])

    val = (term(i1, j1, i2, j2, l1, l2) + term(i1, j1, i2, j2, l2, l1)
           - term(i1, j2, i2, j1, l1, l2) - term(i1, j2, i2, j1, l2, l1))
    return val.reshape(len(ipairs) * len(jpairs), len(lpairs))


def _full_column_rank(label, desc, X, tol) -> ConditionRecord:
    cols = X.shape[1]
    if cols == 0:
        return ConditionRecord(label, desc + " (vacuous)", True, 0, 0, None)
    k, margin = rank_margin(X, tol)
    return ConditionRecord(label, desc, k == cols, k, cols, margin)


def _kron_columns(X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    return np.einsum("il,jl->ijl", X, Y).reshape(X.shape[0] * Y.shape[0], X.shape[1])


def certify_uniqueness(decomp: CPDecomposition, q: int, p: Optional[int] = None,
                       tol: TolerancePolicy = DEFAULT_TOL) -> UniquenessCertificate:
    """Evaluate conditions (i)-(xi) for ``decomp`` at parameters ``(p, q)``.

    Failures are recorded in the certificate, never raised.
    """
    n1, n2, n3 = decomp.dims
    if p is None:
        p = default_p(q, n2, n3)
    p_bar = min(p + 1, q - p)
    if p_bar < 2:
        raise ValueError(f"p_bar = min(p+1, q-p) = {p_bar}; need p_bar >= 2")
    if q > n1:
        raise ValueError(f"q={q} exceeds n1={n1}")
    r = decomp.r
    A = decomp.A
    conds = []

    # (i)
    norms = np.linalg.norm(A, axis=0)
    ratio = np.where(norms > 0, np.abs(A[0]) / np.where(norms > 0, norms, 1), 0.0)
    worst = float(ratio.min()) if r else 1.0
    conds.append(ConditionRecord("i", "a(l)_1 != 0 for all l", worst > tol.match_tol,
                                 worst, tol.match_tol))

    # (ii)
    heads = A[:p_bar]
    worst_cos = 0.0
    for l1, l2 in combinations(range(r), 2):
        u, v = heads[:, l1], heads[:, l2]
        nu, nv = np.linalg.norm(u), np.linalg.norm(v)
        c = 1.0 if nu == 0 or nv == 0 else abs(float(u @ v)) / (nu * nv)
        worst_cos = max(worst_cos, float(c))
    if r == 1 and np.linalg.norm(heads[:, 0]) == 0:
        worst_cos = 1.0
    conds.append(ConditionRecord("ii", f"first {p_bar} entries of a(l) pairwise independent",
                                 worst_cos < 1 - tol.match_tol, worst_cos, 1 - tol.match_tol))

    conds.append(_full_column_rank("iii", "{d(l) ⊗ b(l)} linearly independent",
                                   _kron_columns(A[:p + 1], decomp.B), tol))
    conds.append(_full_column_rank("iv", "{f(l) ⊗ c(l)} linearly independent",
                                   _kron_columns(A[:q - p], decomp.C), tol))
    conds.append(_full_column_rank("v", "{b(l) ⊗ c(l)} linearly independent",
                                   _kron_columns(decomp.B, decomp.C), tol))

    T = assemble(decomp)
    target = r * comb(q - 1, p)
    for label, mode, name in (("vi", STANDARD, "M"), ("vii", SWAPPED, "M'")):
        k, margin = rank_margin(build_koszul(T, p, q, mode).matrix, tol)
        conds.append(ConditionRecord(label, f"rank {name} = r * C(q-1, p)", k == target, k, target,
                                     margin))

    conds.append(_full_column_rank("viii", "N full column rank", build_N(decomp, p, q, STANDARD), tol))
    conds.append(_full_column_rank("ix", "N' full column rank", build_N(decomp, p, q, SWAPPED), tol))
    conds.append(_full_column_rank("x", "P full column rank", build_P(decomp, p, q, STANDARD), tol))
    conds.append(_full_column_rank("xi", "P' full column rank", build_P(decomp, p, q, SWAPPED), tol))

    alpha = alpha_ratio(n2, n3)
    q_req = (4 + 5 * alpha) * (1 + 1 / alpha)
    r_bound = (n2 + n3) * (1 - (3 + alpha) / q) - q ** 3 / 4
    is_default = p == default_p(q, n2, n3)
    regime = GenericRegime(alpha, q_req, r_bound, is_default,
                           is_default and q >= q_req and r <= r_bound)
    return UniquenessCertificate(tuple(conds), p, q, p_bar, r, regime)
