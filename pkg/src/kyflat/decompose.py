"""Overcomplete third-order tensor decomposition from two Koszul-Young flattenings.

Pipeline
--------
1. Build ``M(T; p, q)``, intersect its column span with the sparsity pattern
   ``Z_{p,q} ⊗ R^{n2}`` and map the result through ``phi ⊗ I``. This yields the
   span of the rank-1 matrices ``d(l) b(l)^T`` where ``d(l)`` is the first
   ``p+1`` entries of ``a(l)``.
2. Extract those rank-1 matrices.
3. Repeat with modes 2 and 3 exchanged and ``q-p-1`` in place of ``p`` to get
   ``f(l) c(l)^T`` with ``f(l)`` the first ``q-p`` entries of ``a(l)``.
4. Pair the two sides by matching the shared first ``p_bar`` entries.
5. Solve for the mode-1 factors slice by slice.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import comb
from typing import Optional, Sequence

import numpy as np

from .combinat import SubsetIndexer
from .errors import AlgorithmFailure
from .flattening import STANDARD, SWAPPED, build_koszul, default_p
from .linalg import (DEFAULT_TOL, SubspaceBasis, TolerancePolicy, column_space, intersect,
                     numerical_rank, solve_linear)
from .rank1_extract import MatrixSubspace, factor_rank1, find_rank1_elements
from .tensor_core import CPDecomposition, Tensor3


class UnsupportedPlanError(ValueError):
    """The plan falls outside what the Koszul-Young decomposer handles."""


@dataclass(frozen=True)
class DecompositionPlan:
    q: int
    p: int
    r: int
    tol: TolerancePolicy = field(default=DEFAULT_TOL)

    @property
    def p_bar(self) -> int:
        return min(self.p + 1, self.q - self.p)

    def validate(self, dims: Sequence[int]) -> None:
        if self.q > dims[0]:
            raise ValueError(f"q={self.q} exceeds n1={dims[0]}")
        if not 0 <= self.p <= self.q - 1:
            raise ValueError(f"need 0 <= p <= q-1, got p={self.p}, q={self.q}")
        if self.r < 1:
            raise ValueError("r must be at least 1")

    def to_dict(self) -> dict:
        return {"q": self.q, "p": self.p, "p_bar": self.p_bar, "r": self.r,
                "tolerances": self.tol.to_dict()}


@dataclass(frozen=True)
class SparsityPattern:
    """Rows ``S`` of a ``C(q,p)`` vector allowed to be nonzero: ``S ⊆ [p+1]``."""

    p: int
    q: int

    @property
    def allowed_rows(self) -> tuple[tuple[int, ...], ...]:
        full = tuple(range(1, self.p + 2))
        return tuple(tuple(x for x in full if x != i) for i in full)

    def row_indices(self) -> list[int]:
        idx = SubsetIndexer(self.q, self.p)
        return [idx.rank(S) for S in self.allowed_rows]

    def subspace(self, n: int) -> SubspaceBasis:
        """``Z_{p,q} ⊗ R^n`` as a coordinate subspace in subset-major order."""
        rows = [s * n + j for s in sorted(self.row_indices()) for j in range(n)]
        return SubspaceBasis.coordinate(comb(self.q, self.p) * n, rows)


def phi(p: int, q: int, v: np.ndarray, tol: float = 1e-8) -> np.ndarray:
    """Map ``v`` in ``Z_{p,q}`` to ``R^{p+1}``: ``e_{[p+1] minus {i}} -> (-1)^(i-1) e_i``.

    ``v`` has length ``C(q, p)``, or shape ``(C(q, p), n)`` to apply ``phi ⊗ I``.
    """
    v = np.asarray(v, dtype=float)
    idx = SubsetIndexer(q, p)
    if v.shape[0] != idx.count:
        raise ValueError(f"expected leading dimension {idx.count}, got {v.shape[0]}")
    rows = [idx.rank(S) for S in SparsityPattern(p, q).allowed_rows]
    outside = np.delete(v, rows, axis=0)
    if outside.size and np.linalg.norm(outside) > tol * max(1.0, np.linalg.norm(v)):
        raise ValueError("vector is not supported on the Z_{p,q} sparsity pattern")
    signs = np.array([(-1) ** (i - 1) for i in range(1, p + 2)], dtype=float)
    out = v[rows]
    return out * (signs if v.ndim == 1 else signs[:, None])


@dataclass
class SideResult:
    prefixes: list[np.ndarray]
    mode_vectors: list[np.ndarray]
    flattening_rank: int
    intersection_dim: int


def _extract(T: Tensor3, p: int, q: int, mode: str, r: int, tol: TolerancePolicy,
             seed: int) -> SideResult:
    work = T if mode == STANDARD else T.permute((1, 3, 2))
    pw = p if mode == STANDARD else q - p - 1
    n = work.dims[1]
    label = "M" if mode == STANDARD else "M'"
    cond = "(viii)" if mode == STANDARD else "(ix)"

    M = build_koszul(work, pw, q).matrix
    span = column_space(M, tol)
    inter = intersect(span, SparsityPattern(pw, q).subspace(n), tol)
    if inter.dim != r:
        raise AlgorithmFailure(
            f"fail: wrong intersection dimension {inter.dim} (expected {r}) for {label}",
            step=f"subspace intersection ({mode})", condition=cond)
    mats = [phi(pw, q, inter.basis[:, k].reshape(-1, n)) for k in range(r)]
    try:
        found = find_rank1_elements(MatrixSubspace((pw + 1, n), mats), r, tol, seed=seed)
    except AlgorithmFailure as exc:
        exc.step = f"rank-1 extraction ({mode})"
        exc.condition = "(x)" if mode == STANDARD else "(xi)"
        raise
    if len(found) != r:
        raise AlgorithmFailure(f"fail: rank-1 count {len(found)} != {r}",
                               step=f"rank-1 extraction ({mode})")
    prefixes, vectors = zip(*(factor_rank1(Z) for Z in found))
    return SideResult(list(prefixes), list(vectors), span.dim, inter.dim)


def extract_side(T: Tensor3, p: int, q: int, mode: str, r: int,
                 tol: TolerancePolicy = DEFAULT_TOL, seed: int = 0) -> list[tuple[np.ndarray, np.ndarray]]:
    """Recover ``r`` pairs ``(prefix, mode_vector)`` from one flattening.

    Standard mode returns ``(d, b)`` with ``d`` of length ``p+1``; swapped mode
    returns ``(f, c)`` with ``f`` of length ``q-p``. Each pair is correct up to
    reordering and scaling.
    """
    res = _extract(T, p, q, mode, r, tol, seed)
    return list(zip(res.prefixes, res.mode_vectors))


def _abs_cos(u: np.ndarray, v: np.ndarray) -> float:
    nu, nv = np.linalg.norm(u), np.linalg.norm(v)
    if nu == 0 or nv == 0:
        return 0.0
    return abs(float(u @ v)) / (nu * nv)


def pair_sides(d_list: Sequence[np.ndarray], f_list: Sequence[np.ndarray], p_bar: int,
               tol: TolerancePolicy = DEFAULT_TOL) -> list[int]:
    """Permutation ``tau`` with ``f[tau[l]][:p_bar]`` a scalar multiple of ``d[l][:p_bar]``."""
    if len(d_list) != len(f_list):
        raise ValueError("both sides must have the same number of terms")
    r = len(d_list)
    tau = []
    for ell, d in enumerate(d_list):
        hits = [k for k, f in enumerate(f_list)
                if _abs_cos(np.asarray(d)[:p_bar], np.asarray(f)[:p_bar]) >= 1 - tol.match_tol]
        if len(hits) != 1:
            raise AlgorithmFailure(
                f"fail: ambiguous pairing: term {ell + 1} has {len(hits)} matches",
                step="pairing", condition="(ii)")
        tau.append(hits[0])
    if len(set(tau)) != r:
        raise AlgorithmFailure("fail: ambiguous pairing: matching is not a bijection",
                               step="pairing", condition="(ii)")
    return tau


def make_plan(T: Tensor3, q: int, p: Optional[int] = None, r: Optional[int] = None,
              tol: TolerancePolicy = DEFAULT_TOL, notes: Optional[dict] = None) -> DecompositionPlan:
    """Fill in ``p`` (balanced default) and ``r`` (detected from the flattening rank).

    When ``r`` is given and rank detection disagrees, the user's value wins and
    the discrepancy is recorded in ``notes``.
    """
    n1, n2, n3 = T.dims
    if q > n1:
        raise ValueError(f"q={q} exceeds n1={n1}")
    if p is None:
        p = default_p(q, n2, n3)
    if not 0 <= p <= q - 1:
        raise ValueError(f"need 0 <= p <= q-1, got p={p}, q={q}")
    frank = numerical_rank(build_koszul(T, p, q).matrix, tol)
    divisor = comb(q - 1, p)
    detected = frank // divisor if frank % divisor == 0 else None
    if notes is not None:
        notes.update(flattening_rank=frank, divisor=divisor, detected_rank=detected)
    if r is None:
        if detected is None:
            raise AlgorithmFailure(
                f"rank detection abstained: flattening rank {frank} is not a multiple of {divisor}",
                step="rank detection", condition="(vi)")
        if detected == 0:
            raise AlgorithmFailure("rank detection found the zero tensor", step="rank detection")
        r = detected
    elif notes is not None and detected != r:
        notes["rank_discrepancy"] = {"user_r": r, "detected_r": detected}
    return DecompositionPlan(q=q, p=p, r=r, tol=tol)


def decompose(T: Tensor3, plan: DecompositionPlan, seed: int = 0,
              diagnostics: Optional[dict] = None) -> CPDecomposition:
    """Recover the rank-``plan.r`` decomposition of ``T``.

    Raises :class:`~kyflat.errors.AlgorithmFailure` with a step label when any
    stage reaches a "fail" outcome.
    """
    plan.validate(T.dims)
    if plan.p_bar < 2:
        return _decompose_trivial(T, plan)
    n1, n2, n3 = T.dims
    tol = plan.tol

    std = _extract(T, plan.p, plan.q, STANDARD, plan.r, tol, seed)
    swp = _extract(T, plan.p, plan.q, SWAPPED, plan.r, tol, seed)
    tau = pair_sides(std.prefixes, swp.prefixes, plan.p_bar, tol)

    B = np.stack(std.mode_vectors, axis=1)
    C = np.stack([swp.mode_vectors[k] for k in tau], axis=1)
    K = np.einsum("jl,kl->jkl", B, C).reshape(n2 * n3, plan.r)
    sol = solve_linear(K, T.data.reshape(n1, n2 * n3).T, tol)
    if diagnostics is not None:
        diagnostics.update(
            plan=plan.to_dict(),
            flattening_rank=std.flattening_rank,
            flattening_rank_swapped=swp.flattening_rank,
            intersection_dim=std.intersection_dim,
            intersection_dim_swapped=swp.intersection_dim,
            pairing=list(tau),
            residual=sol.residual,
        )
    if not sol.is_unique:
        raise AlgorithmFailure("fail: non-unique linear system", step="linear solve", condition="(v)")
    if sol.residual > tol.solve_residual_tol:
        raise AlgorithmFailure(f"fail: residual too large ({sol.residual:.3g})",
                               step="linear solve")
    return CPDecomposition(sol.solution.T, B, C).normalized()


def _decompose_trivial(T: Tensor3, plan: DecompositionPlan) -> CPDecomposition:
    raise UnsupportedPlanError(
        f"p_bar = min(p+1, q-p) = {plan.p_bar} < 2: the flattening degenerates to a trivial "
        "flattening and the two sides cannot be paired. Choose p with 1 <= p <= q-2 "
        "(e.g. the balanced default) and q >= 3, or use a trivial-flattening (Jennrich-type) "
        "decomposer for this regime.")
