"""Commuting extensions of matrix tuples via tensor decomposition.

A commuting extension of ``n x n`` matrices ``A_1..A_m`` is a tuple of pairwise
commuting ``r x r`` matrices whose upper-left ``n x n`` blocks are the ``A_i``.
Stacking ``M A_i`` into an ``m x n x n`` tensor turns the task into a rank-``r``
decomposition; the factors give the extension after a diagonal rescaling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .decompose import DecompositionPlan, decompose
from .errors import AlgorithmFailure
from .linalg import DEFAULT_TOL, TolerancePolicy, null_space, solve_linear
from .tensor_core import Tensor3

COND_LIMIT = 1e8


@dataclass(frozen=True)
class CommExtInstance:
    """Planted instance ``Z_i = R^{-1} D_i R`` with ``A_i`` the upper-left blocks.

    ``R``, ``D_list`` and ``Z_list`` are ``None`` for instances read from disk.
    """

    m: int
    n: int
    r: int
    A_list: tuple[np.ndarray, ...]
    R: Optional[np.ndarray] = field(default=None, repr=False)
    D_list: Optional[tuple[np.ndarray, ...]] = field(default=None, repr=False)
    Z_list: Optional[tuple[np.ndarray, ...]] = field(default=None, repr=False)


def _well_conditioned(rng: np.random.Generator, shape, limit: float = COND_LIMIT,
                      max_draws: int = 100) -> np.ndarray:
    for _ in range(max_draws):
        X = rng.standard_normal(shape)
        if np.linalg.cond(X) <= limit:
            return X
    raise RuntimeError(f"no draw with condition number below {limit:g} in {max_draws} tries")


def generate_instance(m: int, n: int, r: int, seed=None) -> CommExtInstance:
    """Draw ``R`` (resampled while ``cond(R) > 1e8``), then diagonal ``D_1..D_m``."""
    if not (m >= 1 and 1 <= n <= r):
        raise ValueError(f"need m >= 1 and 1 <= n <= r, got m={m}, n={n}, r={r}")
    rng = np.random.default_rng(seed)
    R = _well_conditioned(rng, (r, r))
    Rinv = np.linalg.inv(R)
    D = [np.diag(rng.standard_normal(r)) for _ in range(m)]
    Z = [Rinv @ Di @ R for Di in D]
    A = tuple(Zi[:n, :n].copy() for Zi in Z)
    return CommExtInstance(m, n, r, A, R, tuple(D), tuple(Z))


def lemma13_extend(U: np.ndarray, V: np.ndarray,
                   tol: TolerancePolicy = DEFAULT_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Extend ``U`` (n x r) and ``V`` (r x n) with ``U V = I_n`` to mutually inverse r x r matrices.

    ``V_tilde = [V | B]`` with ``B`` an orthonormal basis of ``ker(U)``, and
    ``U_tilde`` stacks ``U`` over the unique ``A^T`` with ``A^T V = 0`` and
    ``A^T B = I``.
    """
    U = np.atleast_2d(np.asarray(U, dtype=float))
    V = np.atleast_2d(np.asarray(V, dtype=float))
    n, r = U.shape
    if V.shape != (r, n):
        raise ValueError(f"V must have shape {(r, n)}, got {V.shape}")
    resid = np.linalg.norm(U @ V - np.eye(n))
    if resid > tol.solve_residual_tol * max(1.0, np.sqrt(n)):
        raise ValueError(f"U V differs from the identity (residual {resid:.3g})")
    if r == n:
        return U.copy(), V.copy()
    B = null_space(U, tol)
    if B.shape[1] != r - n:
        raise ValueError(f"ker(U) has dimension {B.shape[1]}, expected {r - n}")
    V_t = np.hstack([V, B])
    rhs = np.hstack([np.zeros((r - n, n)), np.eye(r - n)])
    At = np.linalg.solve(V_t.T, rhs.T).T
    return np.vstack([U, At]), V_t


@dataclass(frozen=True)
class ExtensionReport:
    commutator_residual: float
    extension_residual: float
    tol: float
    passed: bool

    def to_dict(self) -> dict:
        return {"commutator_residual": self.commutator_residual,
                "extension_residual": self.extension_residual,
                "tol": self.tol, "passed": self.passed}


def _as_scaled_ints(X: np.ndarray) -> tuple[np.ndarray, int]:
    """Exact representation ``X = N * 2**e`` with ``N`` an object array of Python ints."""
    mant, expo = np.frexp(X)
    shift = int(expo.min()) - 53 if X.size else 0
    ints = np.empty(X.shape, dtype=object)
    for idx, (mv, ev) in enumerate(zip(mant.ravel(), expo.ravel())):
        ints.flat[idx] = int(mv * 2.0 ** 53) << (int(ev) - 53 - shift)
    return ints, shift


def _exact_commutator_norm(X: np.ndarray, Y: np.ndarray) -> float:
    (NX, ex), (NY, ey) = _as_scaled_ints(X), _as_scaled_ints(Y)
    comm = NX.dot(NY) - NY.dot(NX)
    sq = sum(int(v) * int(v) for v in comm.ravel())
    if sq == 0:
        return 0.0
    return float(2.0 ** (0.5 * math.log2(sq) + ex + ey))


def verify_extension(A_list: Sequence[np.ndarray], Z_list: Sequence[np.ndarray],
                     tol: float = 1e-7, exact: bool = False) -> ExtensionReport:
    """Largest relative commutator and block-mismatch residuals; pass iff both are within ``tol``.

    With ``exact=True`` the commutators are formed in exact integer arithmetic
    (every double is a scaled integer), so an identically commuting tuple
    reports exactly zero instead of a rounding-level residual.
    """
    if len(A_list) != len(Z_list):
        raise ValueError("A_list and Z_list have different lengths")
    A_list = [np.atleast_2d(np.asarray(A, dtype=float)) for A in A_list]
    Z_list = [np.atleast_2d(np.asarray(Z, dtype=float)) for Z in Z_list]
    comm = 0.0
    for i in range(len(Z_list)):
        for j in range(i + 1, len(Z_list)):
            Zi, Zj = Z_list[i], Z_list[j]
            denom = np.linalg.norm(Zi) * np.linalg.norm(Zj)
            c = _exact_commutator_norm(Zi, Zj) if exact else np.linalg.norm(Zi @ Zj - Zj @ Zi)
            comm = max(comm, float(c / denom) if denom > 0 else float(c))
    ext = 0.0
    for A, Z in zip(A_list, Z_list):
        n = A.shape[0]
        if Z.shape[0] < n or Z.shape[1] < n:
            raise ValueError(f"extension of shape {Z.shape} cannot contain a {A.shape} block")
        d = np.linalg.norm(Z[:n, :n] - A)
        nA = np.linalg.norm(A)
        ext = max(ext, float(d / nA) if nA > 0 else float(d))
    return ExtensionReport(comm, ext, tol, comm <= tol and ext <= tol)


def block_extension(A_list: Sequence[np.ndarray]) -> list[np.ndarray]:
    """The dimension-``2n`` extension ``[[A, -A], [A, -A]]``; products of any two vanish."""
    return [np.block([[A, -A], [A, -A]]) for A in (np.asarray(A, dtype=float) for A in A_list)]


def solve_diagonal_scaling(Minv: np.ndarray, B: np.ndarray, C: np.ndarray,
                           tol: TolerancePolicy = DEFAULT_TOL) -> np.ndarray:
    """Diagonal of ``D_hat`` with ``M^{-1} B D_hat C = I_n``.

    The system is ``sum_l d_l vec(M^{-1} b(l) c(l)^T) = vec(I_n)``.
    """
    n, r = B.shape
    K = np.einsum("jl,lk->jkl", Minv @ B, C).reshape(n * n, r)
    sol = solve_linear(K, np.eye(n).reshape(-1), tol)
    if not sol.is_unique:
        raise AlgorithmFailure("fail: D_hat system singular or non-unique", step="diagonal solve")
    if sol.residual > tol.solve_residual_tol:
        raise AlgorithmFailure(f"fail: D_hat system singular or non-unique "
                               f"(residual {sol.residual:.3g})", step="diagonal solve")
    d = sol.solution
    if np.min(np.abs(d)) <= tol.match_tol * np.max(np.abs(d)):
        raise AlgorithmFailure("fail: D_hat has zero diagonal entry", step="diagonal solve")
    return d


def _extension_once(A_list, r, Mmat, q, p, tol, seed, diag):
    m = len(A_list)
    n = A_list[0].shape[0]
    T = Tensor3(np.stack([Mmat @ A for A in A_list]))
    dec = decompose(T, DecompositionPlan(q=q, p=p, r=r, tol=tol), seed=seed, diagnostics=diag)
    B, C = dec.B, dec.C.T
    Minv = np.linalg.inv(Mmat)
    d_hat = solve_diagonal_scaling(Minv, B, C, tol)
    U_t, V_t = lemma13_extend(Minv @ B * d_hat, C, tol)
    scale = dec.A / d_hat  # row i holds diag(D_hat^{-1} D_tilde_i)
    return [U_t @ (scale[i][:, None] * V_t) for i in range(m)]


def solve_commuting_extension(A_list: Sequence[np.ndarray], r: int, seed=0,
                              q: Optional[int] = None, p: Optional[int] = None,
                              tol: TolerancePolicy = DEFAULT_TOL, max_attempts: int = 3,
                              diagnostics: Optional[dict] = None) -> list[np.ndarray]:
    """Find ``r x r`` pairwise commuting matrices extending ``A_list``.

    Parameters
    ----------
    A_list : sequence of (n, n) arrays
    r : int
        Extension dimension, ``r >= n``.
    seed :
        Seeds the random mixing matrix ``M`` and the decomposition.
    q, p : int, optional
        Flattening parameters; default to the largest odd ``q <= m`` and
        ``p = (q - 1) / 2``.
    max_attempts : int
        Number of ``M`` draws tried before the last failure is re-raised.

    Raises
    ------
    AlgorithmFailure
        From the decomposition or the diagonal solve, after all attempts.
    """
    A_list = [np.atleast_2d(np.asarray(A, dtype=float)) for A in A_list]
    m = len(A_list)
    if m == 0:
        raise ValueError("A_list is empty")
    n = A_list[0].shape[0]
    if any(A.shape != (n, n) for A in A_list):
        raise ValueError("all matrices must be square with the same size")
    if r < n:
        raise ValueError(f"need r >= n, got r={r}, n={n}")
    if q is None:
        q = m if m % 2 else m - 1
    if p is None:
        p = (q - 1) // 2
    if q < 1 or q > m:
        raise ValueError(f"need 1 <= q <= m, got q={q}, m={m}")

    rng = np.random.default_rng(seed)
    attempts = []
    last: Optional[AlgorithmFailure] = None
    for k in range(max_attempts):
        Mmat = _well_conditioned(rng, (n, n))
        diag: dict = {}
        try:
            Z = _extension_once(A_list, r, Mmat, q, p, tol, int(rng.integers(2**31)), diag)
        except AlgorithmFailure as exc:
            attempts.append({"attempt": k + 1, "error": str(exc)})
            last = exc
            continue
        attempts.append({"attempt": k + 1, "error": None})
        if diagnostics is not None:
            diagnostics.update(q=q, p=p, attempts=attempts, decomposition=diag)
        return Z
    if diagnostics is not None:
        diagnostics.update(q=q, p=p, attempts=attempts)
    assert last is not None
    raise last
