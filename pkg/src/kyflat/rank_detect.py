"""Tensor rank detection and certified rank lower bounds from the Koszul-Young flattening."""

from __future__ import annotations

from dataclasses import asdict, dataclass
from math import comb
from typing import Optional

from .flattening import build_koszul, default_p
from .linalg import DEFAULT_TOL, TolerancePolicy, numerical_rank
from .tensor_core import Tensor3


@dataclass(frozen=True)
class RankReport:
    """Outcome of rank detection.

    ``detected_rank`` is ``None`` when the flattening rank is not a multiple of
    ``divisor``; the detector abstains rather than rounding.
    """

    flattening_rank: int
    divisor: int
    detected_rank: Optional[int]
    certified_lower_bound: int
    p: int
    q: int
    alpha: float
    detection_bound: float
    within_guarantee: bool

    def to_dict(self) -> dict:
        return asdict(self)


def alpha_ratio(n2: int, n3: int) -> float:
    return max(n2 / n3, n3 / n2)


def detection_bound(n2: int, n3: int, q: int) -> float:
    """Largest rank for which generic rank detection is guaranteed at this ``q``."""
    return (n2 + n3) * (1 - (1 + alpha_ratio(n2, n3)) / q) - q


def default_q(n1: int) -> int:
    """Largest odd ``q <= min(n1, 7)``."""
    q = min(n1, 7)
    return q if q % 2 == 1 else q - 1


def _ceil_div(a: int, b: int) -> int:
    return -(-a // b)


def certify_lower_bound(T: Tensor3, p: int, q: int, tol: TolerancePolicy = DEFAULT_TOL) -> int:
    """``ceil(rank M(T; p, q) / C(q-1, p))``; a valid lower bound on the rank of any tensor."""
    M = build_koszul(T, p, q).matrix
    return _ceil_div(numerical_rank(M, tol), comb(q - 1, p))


def detect_rank(T: Tensor3, q: Optional[int] = None, tol: TolerancePolicy = DEFAULT_TOL,
                p: Optional[int] = None) -> RankReport:
    n1, n2, n3 = T.dims
    if q is None:
        q = default_q(n1)
    if q < 1:
        raise ValueError("q must be at least 1")
    if q > n1:
        raise ValueError(
            f"q={q} exceeds n1={n1}; permute the tensor modes so the first mode is "
            f"the largest one you can afford, or lower q")
    if p is None:
        p = default_p(q, n2, n3)
    if p + 1 > q:
        raise ValueError(f"p={p} is too large for q={q}")
    divisor = comb(q - 1, p)
    frank = numerical_rank(build_koszul(T, p, q).matrix, tol)
    detected = frank // divisor if frank % divisor == 0 else None
    bound = detection_bound(n2, n3, q)
    within = detected is not None and p == default_p(q, n2, n3) and detected <= bound
    return RankReport(
        flattening_rank=frank,
        divisor=divisor,
        detected_rank=detected,
        certified_lower_bound=_ceil_div(frank, divisor),
        p=p,
        q=q,
        alpha=alpha_ratio(n2, n3),
        detection_bound=bound,
        within_guarantee=within,
    )
