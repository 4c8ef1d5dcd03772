"""Empirical rank-additivity sweeps over planted generic tensors.

For each grid point ``(dims, q, r, seed)`` a generic rank-``r`` tensor is drawn
and the rank of ``M(T; p, q)`` is compared with ``r * C(q-1, p)``.
"""

from __future__ import annotations

import csv
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from math import comb
from typing import Optional, Sequence

from .flattening import build_koszul, default_p
from .linalg import DEFAULT_TOL, TolerancePolicy, numerical_rank
from .rank_detect import detection_bound
from .tensor_core import assemble, random_generic_decomposition

CSV_FIELDS = ("n1", "n2", "n3", "q", "p", "r", "seed", "flattening_rank", "expected",
              "additive", "wall_time")
DEFAULT_ENTRY_BUDGET = 40_000_000


@dataclass(frozen=True)
class SweepConfig:
    """Grid of sweep points.

    ``r_range`` is an inclusive ``(lo, hi)`` pair. Each ``q`` larger than a
    grid point's ``n1`` is skipped for that point. ``p`` defaults to the
    balanced choice per ``(q, n2, n3)``.
    """

    dims: tuple[tuple[int, int, int], ...]
    q_values: tuple[int, ...]
    r_range: tuple[int, int]
    seeds: tuple[int, ...] = (0, 1, 2)
    p: Optional[int] = None
    tol: TolerancePolicy = field(default=DEFAULT_TOL)
    output: Optional[str] = None
    workers: int = 1
    entry_budget: int = DEFAULT_ENTRY_BUDGET

    def __post_init__(self):
        object.__setattr__(self, "dims", tuple(tuple(int(x) for x in d) for d in self.dims))
        object.__setattr__(self, "q_values", tuple(int(q) for q in self.q_values))
        object.__setattr__(self, "seeds", tuple(int(s) for s in self.seeds))
        if not self.dims or not self.q_values or not self.seeds:
            raise ValueError("dims, q_values and seeds must be nonempty")
        if any(len(d) != 3 or min(d) < 1 for d in self.dims):
            raise ValueError(f"each dims entry needs three positive sizes, got {self.dims}")
        lo, hi = self.r_range
        if not 1 <= lo <= hi:
            raise ValueError(f"r range must satisfy 1 <= lo <= hi, got {self.r_range}")
        if self.workers < 1:
            raise ValueError("workers must be at least 1")

    def points(self):
        lo, hi = self.r_range
        for n1, n2, n3 in self.dims:
            for q in self.q_values:
                if q > n1:
                    continue
                p = default_p(q, n2, n3) if self.p is None else self.p
                for r in range(lo, hi + 1):
                    for s in self.seeds:
                        yield (n1, n2, n3), q, p, r, s


def matrix_entries(dims: Sequence[int], q: int, p: int) -> int:
    _, n2, n3 = dims
    return comb(q, p) * n2 * comb(q, p + 1) * n3


def _run_point(args) -> dict:
    dims, q, p, r, seed, tol = args
    n1, n2, n3 = dims
    t0 = time.perf_counter()
    T = assemble(random_generic_decomposition(dims, r, seed=[seed, r, n1, n2, n3]))
    frank = numerical_rank(build_koszul(T, p, q).matrix, tol)
    expected = r * comb(q - 1, p)
    return {"n1": n1, "n2": n2, "n3": n3, "q": q, "p": p, "r": r, "seed": seed,
            "flattening_rank": frank, "expected": expected, "additive": frank == expected,
            "wall_time": round(time.perf_counter() - t0, 6)}


def summarize(rows: Sequence[dict]) -> list[dict]:
    """Largest ``r`` that was additive for every seed, per ``(dims, q, p)``.

    Also reports the pigeonhole ceiling ``min(C(q,p) n2, C(q,p+1) n3) / C(q-1,p)``
    and the generic detection bound for comparison.
    """
    groups: dict = {}
    for row in rows:
        key = (row["n1"], row["n2"], row["n3"], row["q"], row["p"])
        groups.setdefault(key, {}).setdefault(row["r"], []).append(row["additive"])
    out = []
    for (n1, n2, n3, q, p), by_r in groups.items():
        good = [r for r, flags in by_r.items() if all(flags)]
        out.append({
            "dims": [n1, n2, n3], "q": q, "p": p,
            "max_additive_r": max(good) if good else 0,
            "pigeonhole_cap": min(comb(q, p) * n2, comb(q, p + 1) * n3) / comb(q - 1, p),
            "detection_bound": detection_bound(n2, n3, q),
        })
    return out


def cmd_sweep(config: SweepConfig) -> tuple[list[dict], list[dict]]:
    """Run the grid; write CSV to ``config.output`` if set. Returns ``(rows, summary)``.

    Raises
    ------
    ValueError
        If any flattening would exceed ``config.entry_budget`` entries.
    """
    points = list(config.points())
    too_big = {(d, q, p) for d, q, p, _, _ in points
               if matrix_entries(d, q, p) > config.entry_budget}
    if too_big:
        d, q, p = sorted(too_big)[0]
        raise ValueError(f"flattening for dims={d}, q={q}, p={p} has {matrix_entries(d, q, p)} "
                         f"entries, above the budget of {config.entry_budget}")
    jobs = [(d, q, p, r, s, config.tol) for d, q, p, r, s in points]
    if config.workers > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            rows = list(pool.map(_run_point, jobs, chunksize=4))
    else:
        rows = [_run_point(j) for j in jobs]
    if config.output:
        write_csv(rows, config.output)
    return rows, summarize(rows)


def write_csv(rows: Sequence[dict], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=CSV_FIELDS)
        w.writeheader()
        for row in rows:
            w.writerow({**row, "additive": str(row["additive"]).lower()})
