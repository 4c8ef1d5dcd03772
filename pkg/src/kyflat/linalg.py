"""Numerical kernels with a single, explicit tolerance policy.

Every "has rank exactly k" decision in the package goes through
:func:`numerical_rank`, so changing :class:`TolerancePolicy` moves all of them
together.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.linalg

from .errors import DiagonalizationError


@dataclass(frozen=True)
class TolerancePolicy:
    """Tolerances for rank, scalar-multiple and residual decisions.

    Attributes
    ----------
    rank_rel_tol:
        A singular value counts if it exceeds ``rank_rel_tol * max(m, n) * sigma_max``.
    match_tol:
        Two vectors are scalar multiples if ``|cos| >= 1 - match_tol``; also used
        for eigenvalue gaps and the rank-1 test.
    solve_residual_tol:
        Largest acceptable relative residual of a linear solve.
    """

    rank_rel_tol: float = 1e-9
    match_tol: float = 1e-6
    solve_residual_tol: float = 1e-8

    def __post_init__(self):
        for name in ("rank_rel_tol", "match_tol", "solve_residual_tol"):
            v = getattr(self, name)
            if not 0 < v < 1:
                raise ValueError(f"{name} must lie in (0, 1), got {v}")

    def to_dict(self) -> dict:
        return {"rank_rel_tol": self.rank_rel_tol, "match_tol": self.match_tol,
                "solve_residual_tol": self.solve_residual_tol}


DEFAULT_TOL = TolerancePolicy()


def svd(A: np.ndarray, full_matrices: bool = False, compute_uv: bool = True):
    """``numpy.linalg.svd`` with a fallback to LAPACK ``gesvd`` when ``gesdd`` fails to converge."""
    try:
        return np.linalg.svd(A, full_matrices=full_matrices, compute_uv=compute_uv)
    except np.linalg.LinAlgError:
        return scipy.linalg.svd(A, full_matrices=full_matrices, compute_uv=compute_uv,
                                lapack_driver="gesvd")


@dataclass(frozen=True)
class SubspaceBasis:
    """Orthonormal column basis of a subspace of ``R^ambient_dim``."""

    ambient_dim: int
    basis: np.ndarray

    def __post_init__(self):
        B = np.asarray(self.basis, dtype=float).reshape(self.ambient_dim, -1)
        object.__setattr__(self, "basis", B)

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    @classmethod
    def zero(cls, ambient_dim: int) -> "SubspaceBasis":
        return cls(ambient_dim, np.zeros((ambient_dim, 0)))

    @classmethod
    def coordinate(cls, ambient_dim: int, indices: Sequence[int]) -> "SubspaceBasis":
        """Span of the 0-based standard basis vectors ``indices``."""
        B = np.zeros((ambient_dim, len(indices)))
        B[list(indices), np.arange(len(indices))] = 1.0
        return cls(ambient_dim, B)

    def projector(self) -> np.ndarray:
        return self.basis @ self.basis.T

    def contains(self, v: np.ndarray, tol: float = 1e-8) -> bool:
        v = np.asarray(v, dtype=float)
        resid = v - self.basis @ (self.basis.T @ v)
        return bool(np.linalg.norm(resid) <= tol * max(1.0, np.linalg.norm(v)))


def rank_threshold(singular_values: np.ndarray, shape: tuple[int, int],
                   tol: TolerancePolicy = DEFAULT_TOL) -> float:
    if singular_values.size == 0:
        return 0.0
    return tol.rank_rel_tol * max(shape) * float(singular_values[0])


def _rank_from_sv(s: np.ndarray, shape, tol: TolerancePolicy) -> int:
    if s.size == 0 or s[0] == 0:
        return 0
    return int(np.sum(s > rank_threshold(s, shape, tol)))


def singular_values(A: np.ndarray) -> np.ndarray:
    A = np.asarray(A, dtype=float)
    if A.size == 0:
        return np.zeros(0)
    return svd(A, compute_uv=False)


def numerical_rank(A: np.ndarray, tol: TolerancePolicy = DEFAULT_TOL) -> int:
    """Number of singular values above ``rank_rel_tol * max(m, n) * sigma_max``."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    return _rank_from_sv(singular_values(A), A.shape, tol)


def rank_margin(A: np.ndarray, tol: TolerancePolicy = DEFAULT_TOL) -> tuple[int, float]:
    """Numerical rank and the ratio of the smallest retained singular value to the threshold.

    The margin is ``inf`` when the threshold is zero (zero matrix or empty).
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    s = singular_values(A)
    k = _rank_from_sv(s, A.shape, tol)
    thr = rank_threshold(s, A.shape, tol)
    if k == 0 or thr == 0:
        return k, float("inf")
    return k, float(s[k - 1] / thr)


def column_space(A: np.ndarray, tol: TolerancePolicy = DEFAULT_TOL) -> SubspaceBasis:
    A = np.atleast_2d(np.asarray(A, dtype=float))
    m = A.shape[0]
    if A.size == 0:
        return SubspaceBasis.zero(m)
    U, s, _ = svd(A)
    k = _rank_from_sv(s, A.shape, tol)
    return SubspaceBasis(m, U[:, :k])


def null_space(A: np.ndarray, tol: TolerancePolicy = DEFAULT_TOL) -> np.ndarray:
    """Orthonormal basis (as columns) of the right null space of ``A``."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    n = A.shape[1]
    if A.shape[0] == 0:
        return np.eye(n)
    # full_matrices is only needed to get a complete Vt for wide matrices
    _, s, Vt = svd(A, full_matrices=A.shape[0] < n)
    k = _rank_from_sv(s, A.shape, tol)
    return Vt[k:].T.copy()


def intersect(U: SubspaceBasis, V: SubspaceBasis, tol: TolerancePolicy = DEFAULT_TOL) -> SubspaceBasis:
    """Orthonormal basis of ``U ∩ V`` from the null space of ``[U | -V]``.

    A null vector ``(x, y)`` gives the common vector ``U x = V y``.
    """
    if U.ambient_dim != V.ambient_dim:
        raise ValueError(f"ambient dimensions differ: {U.ambient_dim} vs {V.ambient_dim}")
    if U.dim == 0 or V.dim == 0:
        return SubspaceBasis.zero(U.ambient_dim)
    W = null_space(np.hstack([U.basis, -V.basis]), tol)
    if W.shape[1] == 0:
        return SubspaceBasis.zero(U.ambient_dim)
    common = 0.5 * (U.basis @ W[:U.dim] + V.basis @ W[U.dim:])
    Q, _, _ = svd(common)
    return SubspaceBasis(U.ambient_dim, Q[:, :W.shape[1]])


@dataclass(frozen=True)
class LinearSolution:
    solution: np.ndarray
    residual: float
    is_unique: bool
    rank: int


def solve_linear(A: np.ndarray, b: np.ndarray, tol: TolerancePolicy = DEFAULT_TOL) -> LinearSolution:
    """Minimum-norm least-squares solution of ``A x = b``.

    ``b`` may be a matrix of right-hand sides; the residual is then the
    Frobenius norm of the whole residual block, relative to ``max(1, ||b||)``.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    b = np.asarray(b, dtype=float)
    U, s, Vt = svd(A)
    k = _rank_from_sv(s, A.shape, tol)
    coeffs = (U[:, :k].T @ b)
    coeffs = coeffs / (s[:k] if b.ndim == 1 else s[:k, None])
    x = Vt[:k].T @ coeffs
    residual = float(np.linalg.norm(A @ x - b) / max(1.0, np.linalg.norm(b)))
    return LinearSolution(x, residual, k == A.shape[1], k)


def simultaneous_diagonalize(slices: Sequence[np.ndarray], tol: TolerancePolicy = DEFAULT_TOL,
                             seed: int = 0, retries: int = 3) -> list[np.ndarray]:
    """Recover ``z(1..r)`` from ``r`` matrices spanning ``span{z(m) z(m)^T}``.

    The matrices are first restricted to their joint column space (dimension
    ``r`` when the ``z`` are independent). Two random combinations ``G1, G2``
    then satisfy ``G1 G2^{-1} = Z diag(ratio) Z^{-1}``, whose eigenvectors are
    the ``z`` up to scale. Combinations are redrawn up to ``retries`` times when
    the eigenvalues are too close to separate.

    Returns
    -------
    list of ndarray
        ``r`` unit vectors, each with its largest-magnitude entry positive.
    """
    mats = [np.atleast_2d(np.asarray(G, dtype=float)) for G in slices]
    r = len(mats)
    if r == 0:
        return []
    N = mats[0].shape[0]
    if any(G.shape != (N, N) for G in mats):
        raise ValueError("slices must all be square with the same shape")

    Q = column_space(np.hstack(mats), tol).basis
    if Q.shape[1] != r:
        raise DiagonalizationError(
            f"joint column space has dimension {Q.shape[1]}, expected {r}",
            step="simultaneous diagonalization")
    reduced = np.stack([Q.T @ G @ Q for G in mats])

    rng = np.random.default_rng(seed)
    last_err: DiagonalizationError | None = None
    for _ in range(retries + 1):
        w1 = rng.standard_normal(r)
        w2 = rng.standard_normal(r)
        G1 = np.tensordot(w1, reduced, axes=1)
        G2 = np.tensordot(w2, reduced, axes=1)
        try:
            vals, vecs = np.linalg.eig(np.linalg.solve(G2.T, G1.T).T)
        except np.linalg.LinAlgError:
            last_err = DiagonalizationError("diagonalization unstable: singular combination",
                                            step="simultaneous diagonalization")
            continue
        scale = max(float(np.max(np.abs(vals))), np.finfo(float).tiny)
        if np.max(np.abs(vals.imag)) > tol.match_tol * scale:
            last_err = DiagonalizationError("not simultaneously diagonalizable: complex eigenvalues",
                                            step="simultaneous diagonalization")
            continue
        vals = vals.real
        if r > 1:
            srt = np.sort(vals)
            gap = float(np.min(np.diff(srt)))
            if gap < tol.match_tol * scale:
                last_err = DiagonalizationError(
                    f"diagonalization unstable: eigenvalue gap {gap:.3g} below tolerance",
                    step="simultaneous diagonalization")
                continue
        out = []
        for k in range(r):
            v = Q @ vecs[:, k].real
            v = v / np.linalg.norm(v)
            j = int(np.argmax(np.abs(v)))
            out.append(-v if v[j] < 0 else v)
        return out
    assert last_err is not None
    raise last_err
