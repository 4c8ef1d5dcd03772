"""Dense third-order tensors, CP decompositions, and recovery scoring."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

Dims = tuple[int, int, int]


def _frozen(x) -> np.ndarray:
    arr = np.array(x, dtype=float, copy=True)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class Tensor3:
    """A dense real ``n1 x n2 x n3`` tensor.

    ``data`` is stored as a read-only C-ordered array, so ``entries`` is the
    row-major flattening used by the JSON format.
    """

    data: np.ndarray

    def __post_init__(self):
        arr = _frozen(self.data)
        if arr.ndim != 3 or min(arr.shape) < 1:
            raise ValueError(f"expected a 3-way array with positive dims, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("tensor entries must be finite")
        object.__setattr__(self, "data", arr)

    @classmethod
    def from_entries(cls, dims: Sequence[int], entries: Sequence[float]) -> "Tensor3":
        dims = tuple(int(d) for d in dims)
        entries = np.asarray(entries, dtype=float)
        if entries.size != int(np.prod(dims)):
            raise ValueError(f"{entries.size} entries do not fill dims {dims}")
        return cls(entries.reshape(dims))

    @classmethod
    def zeros(cls, dims: Sequence[int]) -> "Tensor3":
        return cls(np.zeros(tuple(dims)))

    @property
    def dims(self) -> Dims:
        return tuple(self.data.shape)  # type: ignore[return-value]

    @property
    def entries(self) -> np.ndarray:
        return self.data.reshape(-1)

    def permute(self, order: Sequence[int]) -> "Tensor3":
        """Permute modes; ``order`` is 1-based, e.g. ``(1, 3, 2)`` swaps modes 2 and 3."""
        return Tensor3(np.transpose(self.data, [o - 1 for o in order]))

    def norm(self) -> float:
        return float(np.linalg.norm(self.data))

    def __add__(self, other: "Tensor3") -> "Tensor3":
        return Tensor3(self.data + other.data)


@dataclass(frozen=True)
class CPDecomposition:
    """``r`` rank-1 terms ``a(l) x b(l) x c(l)``, stored column-per-term.

    Parameters
    ----------
    A, B, C : array_like
        Factor matrices of shapes ``(n1, r)``, ``(n2, r)``, ``(n3, r)``.
    allow_zero : bool
        Accept zero component vectors. Off by default because a zero triple is a
        degenerate term; the uniqueness checker needs it to build failing cases.
    """

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    allow_zero: bool = field(default=False, compare=False)

    def __post_init__(self):
        mats = []
        for name, M in (("A", self.A), ("B", self.B), ("C", self.C)):
            M = _frozen(M)
            if M.ndim != 2:
                raise ValueError(f"factor {name} must be a matrix, got shape {M.shape}")
            if not np.all(np.isfinite(M)):
                raise ValueError(f"factor {name} has non-finite entries")
            mats.append(M)
        r = {M.shape[1] for M in mats}
        if len(r) != 1:
            raise ValueError(f"factor matrices disagree on r: {[M.shape[1] for M in mats]}")
        if not self.allow_zero:
            for name, M in zip("abc", mats):
                zero = np.flatnonzero(~np.any(M != 0, axis=0))
                if zero.size:
                    raise ValueError(f"term {int(zero[0]) + 1} has a zero {name}-vector")
        for name, M in zip("ABC", mats):
            object.__setattr__(self, name, M)

    @classmethod
    def from_vectors(cls, a_vectors, b_vectors, c_vectors, dims: Sequence[int] | None = None,
                     allow_zero: bool = False) -> "CPDecomposition":
        if not len(a_vectors) == len(b_vectors) == len(c_vectors):
            raise ValueError("a, b, c lists must have equal length")
        r = len(a_vectors)
        if dims is None:
            if r == 0:
                raise ValueError("dims are required for an empty decomposition")
            dims = (len(a_vectors[0]), len(b_vectors[0]), len(c_vectors[0]))
        for ell in range(r):
            for mode, (name, vecs) in enumerate(zip("abc", (a_vectors, b_vectors, c_vectors))):
                if len(vecs[ell]) != dims[mode]:
                    raise ValueError(
                        f"term {ell + 1}: {name}-vector has length {len(vecs[ell])}, expected {dims[mode]}"
                    )
        mats = [np.array(v, dtype=float).reshape(r, d).T for v, d in
                zip((a_vectors, b_vectors, c_vectors), dims)]
        return cls(*mats, allow_zero=allow_zero)

    @property
    def r(self) -> int:
        return self.A.shape[1]

    @property
    def dims(self) -> Dims:
        return (self.A.shape[0], self.B.shape[0], self.C.shape[0])

    @property
    def a_vectors(self) -> list[np.ndarray]:
        return list(self.A.T)

    @property
    def b_vectors(self) -> list[np.ndarray]:
        return list(self.B.T)

    @property
    def c_vectors(self) -> list[np.ndarray]:
        return list(self.C.T)

    def terms(self):
        return zip(self.A.T, self.B.T, self.C.T)

    def concat(self, other: "CPDecomposition") -> "CPDecomposition":
        return CPDecomposition(np.hstack([self.A, other.A]), np.hstack([self.B, other.B]),
                               np.hstack([self.C, other.C]),
                               allow_zero=self.allow_zero or other.allow_zero)

    def permuted(self, order: Sequence[int]) -> "CPDecomposition":
        """Reorder terms; ``order`` lists 0-based source indices."""
        order = list(order)
        return CPDecomposition(self.A[:, order], self.B[:, order], self.C[:, order],
                               allow_zero=self.allow_zero)

    def swap_bc(self) -> "CPDecomposition":
        return CPDecomposition(self.A, self.C, self.B, allow_zero=self.allow_zero)

    def normalized(self) -> "CPDecomposition":
        """Unit-norm ``b`` and ``c`` with largest-magnitude entry positive; scale folded into ``a``."""
        B, sb = _unit_columns(self.B)
        C, sc = _unit_columns(self.C)
        return CPDecomposition(self.A * (sb * sc), B, C, allow_zero=self.allow_zero)


@dataclass(frozen=True)
class RecoveryReport:
    matched_permutation: tuple[int, ...]
    per_term_relative_error: tuple[float, ...]
    max_relative_error: float
    reconstruction_relative_error: float
    ambiguous: bool

    def to_dict(self) -> dict:
        return {
            "matched_permutation": list(self.matched_permutation),
            "per_term_relative_error": list(self.per_term_relative_error),
            "max_relative_error": self.max_relative_error,
            "reconstruction_relative_error": self.reconstruction_relative_error,
            "ambiguous": self.ambiguous,
        }


def sign_normalize(v: np.ndarray) -> np.ndarray:
    """Flip ``v`` so that its largest-magnitude entry is positive."""
    v = np.asarray(v, dtype=float)
    if v.size == 0:
        return v
    k = int(np.argmax(np.abs(v)))
    return -v if v[k] < 0 else v


def _unit_columns(M: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    norms = np.linalg.norm(M, axis=0)
    safe = np.where(norms > 0, norms, 1.0)
    out = M / safe
    signs = np.ones(M.shape[1])
    for k in range(M.shape[1]):
        if norms[k] > 0:
            j = int(np.argmax(np.abs(out[:, k])))
            signs[k] = -1.0 if out[j, k] < 0 else 1.0
    return out * signs, norms * signs


def assemble(decomp: CPDecomposition, dims: Sequence[int] | None = None) -> Tensor3:
    """Return ``sum_l a(l) x b(l) x c(l)``."""
    if dims is not None:
        dims = tuple(int(d) for d in dims)
        for mode, (name, M) in enumerate(zip("abc", (decomp.A, decomp.B, decomp.C))):
            if M.shape[0] != dims[mode]:
                bad = 1 if decomp.r else 0
                raise ValueError(
                    f"term {bad}: {name}-vector has length {M.shape[0]}, expected {dims[mode]}"
                )
    else:
        dims = decomp.dims
    if decomp.r == 0:
        return Tensor3.zeros(dims)
    return Tensor3(np.einsum("il,jl,kl->ijk", decomp.A, decomp.B, decomp.C))


def slice_tensor(T: Tensor3, mode: int, index: int) -> np.ndarray:
    """Matrix obtained by fixing ``mode`` (1, 2 or 3) at 1-based ``index``."""
    if mode not in (1, 2, 3):
        raise ValueError(f"mode must be 1, 2 or 3, got {mode}")
    n = T.dims[mode - 1]
    if not 1 <= index <= n:
        raise IndexError(f"index {index} out of range for mode {mode} of size {n}")
    return np.array(np.take(T.data, index - 1, axis=mode - 1))


def random_generic_decomposition(dims: Sequence[int], r: int, seed=None) -> CPDecomposition:
    """I.i.d. standard normal factors; ``seed`` is anything ``numpy.random.default_rng`` accepts."""
    if r < 1:
        raise ValueError("r must be at least 1")
    rng = np.random.default_rng(seed)
    n1, n2, n3 = dims
    return CPDecomposition(rng.standard_normal((n1, r)), rng.standard_normal((n2, r)),
                           rng.standard_normal((n3, r)))


def random_factors(dims: Sequence[int], r: int, seed=None) -> list[np.ndarray]:
    """Gaussian factor matrices for an order-``len(dims)`` rank-``r`` tensor."""
    rng = np.random.default_rng(seed)
    return [rng.standard_normal((n, r)) for n in dims]


def assemble_factors(factors: Sequence[np.ndarray]) -> np.ndarray:
    """Order-k analogue of :func:`assemble` returning a plain array."""
    out = np.zeros(tuple(F.shape[0] for F in factors))
    for cols in zip(*(F.T for F in factors)):
        term = cols[0]
        for v in cols[1:]:
            term = np.multiply.outer(term, v)
        out += term
    return out


def _unit_rank1(a, b, c):
    """Unit-norm factors of the rank-1 tensor ``a x b x c`` (positive scaling only)."""
    vecs = [np.asarray(v, dtype=float) for v in (a, b, c)]
    norms = [np.linalg.norm(v) for v in vecs]
    if min(norms) == 0:
        return None
    return [v / n for v, n in zip(vecs, norms)]


def rank1_distance(t1, t2) -> float:
    """Frobenius distance between two rank-1 tensors after scaling each to unit norm.

    Only positive rescaling is removed, so ``x`` and ``-x`` are at distance 2.
    """
    u = _unit_rank1(*t1)
    v = _unit_rank1(*t2)
    if u is None or v is None:
        return 0.0 if u is None and v is None else 1.0
    # Move sign flips of the first two factors onto the third so that
    # equal tensors give small factor differences; then expand
    # X - Y = du⊗v1⊗w1 + u2⊗dv⊗w1 + u2⊗v2⊗dw exactly, avoiding 1 - <X,Y>.
    v = list(v)
    for k in range(2):
        if u[k] @ v[k] < 0:
            v[k] = -v[k]
            v[2] = -v[2]
    parts = [
        (u[0] - v[0], u[1], u[2]),
        (v[0], u[1] - v[1], u[2]),
        (v[0], v[1], u[2] - v[2]),
    ]
    sq = sum(np.prod([x @ y for x, y in zip(s, t)]) for s in parts for t in parts)
    return float(np.sqrt(max(0.0, sq)))


def match_and_score(truth: CPDecomposition, found: CPDecomposition,
                    ambiguity_threshold: float = 0.5) -> RecoveryReport:
    """Greedy best-first matching of found terms to truth terms.

    ``matched_permutation[k]`` is the 0-based truth index matched to found term
    ``k``. Per-term errors are distances between unit-normalized rank-1 tensors,
    so any rescaling of the factors that preserves the term is free.
    """
    if truth.r != found.r:
        raise ValueError(f"rank mismatch: truth has r={truth.r}, found has r={found.r}")
    if truth.dims != found.dims:
        raise ValueError(f"dims mismatch: {truth.dims} vs {found.dims}")
    r = truth.r
    truth_terms = list(truth.terms())
    found_terms = list(found.terms())
    dist = np.array([[rank1_distance(f, t) for t in truth_terms] for f in found_terms]).reshape(r, r)

    perm = [-1] * r
    used_f, used_t = set(), set()
    for flat in np.argsort(dist, axis=None, kind="stable"):
        k, ell = divmod(int(flat), r)
        if k in used_f or ell in used_t:
            continue
        perm[k] = ell
        used_f.add(k)
        used_t.add(ell)
        if len(used_f) == r:
            break
    errors = tuple(float(dist[k, perm[k]]) for k in range(r))

    T = assemble(truth)
    diff = assemble(found).data - T.data
    denom = max(T.norm(), np.finfo(float).tiny)
    recon = float(np.linalg.norm(diff) / denom) if T.norm() > 0 else float(np.linalg.norm(diff))
    max_err = max(errors, default=0.0)
    return RecoveryReport(tuple(perm), errors, max_err, recon, max_err > ambiguity_threshold)
