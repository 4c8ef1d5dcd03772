import csv

import pytest

from kyflat.sweep import CSV_FIELDS, SweepConfig, cmd_sweep, matrix_entries, summarize


def small_config(**kw):
    base = dict(dims=((5, 8, 8),), q_values=(3, 5), r_range=(1, 12), seeds=(0, 1, 2))
    base.update(kw)
    return SweepConfig(**base)


def test_grid_and_csv(tmp_path):
    out = tmp_path / "sweep.csv"
    rows, summary = cmd_sweep(small_config(output=str(out)))
    assert len(rows) == 2 * 12 * 3
    with open(out) as fh:
        reader = csv.DictReader(fh)
        assert tuple(reader.fieldnames) == CSV_FIELDS
        body = list(reader)
    assert len(body) == 72 and {row["additive"] for row in body} <= {"true", "false"}
    for row in rows:
        assert row["expected"] == row["r"] * {3: 2, 5: 6}[row["q"]]
        assert row["flattening_rank"] <= row["expected"]
    for s in summary:
        assert s["max_additive_r"] <= s["pigeonhole_cap"]


def test_pigeonhole_cap():
    rows, summary = cmd_sweep(small_config(q_values=(3,), r_range=(14, 18), seeds=(0,)))
    # q=3, p=1 on n=8: min(3*8, 3*8)/2 = 12 < 14, so nothing is additive
    assert not any(row["additive"] for row in rows)
    assert summary[0]["pigeonhole_cap"] == 12 and summary[0]["max_additive_r"] == 0


def test_summary_requires_all_seeds():
    rows = [dict(n1=3, n2=4, n3=4, q=3, p=1, r=r, seed=s, additive=(r < 3 or s == 0))
            for r in range(1, 5) for s in range(2)]
    (s,) = summarize(rows)
    assert s["max_additive_r"] == 2


def test_skips_q_above_n1():
    cfg = small_config(dims=((3, 8, 8),), q_values=(3, 5), r_range=(1, 2), seeds=(0,))
    assert {pt[1] for pt in cfg.points()} == {3}


def test_budget_guard():
    with pytest.raises(ValueError, match="budget"):
        cmd_sweep(small_config(entry_budget=matrix_entries((5, 8, 8), 5, 2) - 1))


def test_workers_match_serial():
    cfg = dict(q_values=(3,), r_range=(1, 6), seeds=(0, 1))
    serial, _ = cmd_sweep(small_config(**cfg))
    parallel, _ = cmd_sweep(small_config(workers=2, **cfg))
    strip = lambda rows: [{k: v for k, v in r.items() if k != "wall_time"} for r in rows]
    assert strip(serial) == strip(parallel)


@pytest.mark.parametrize("kw", [dict(dims=()), dict(r_range=(5, 4)), dict(r_range=(0, 3)),
                                dict(workers=0), dict(dims=((5, 8),))])
def test_config_validation(kw):
    with pytest.raises(ValueError):
        small_config(**kw)


@pytest.mark.parametrize("n", [15, 20])
def test_koszul_beats_trivial_threshold(n):
    cfg = SweepConfig(dims=((5, n, n),), q_values=(5,), r_range=(n + 1, n + 3), seeds=(0, 1, 2))
    _, (summary,) = cmd_sweep(cfg)
    assert summary["max_additive_r"] > n
