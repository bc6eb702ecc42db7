import csv
import json

import pytest

from mmcast.config import ExperimentConfig, RadioParams
from mmcast.harness import (
    RESULT_FIELDS,
    aggregate,
    derive_seed,
    mean_ci,
    read_results,
    results_csv_text,
    run_cell,
    run_experiment,
    run_rows,
    summary_csv_text,
)


def _config(tmp_path, **kw):
    base = dict(n_values=(2, 4), w_values_deg=(30.0, 90.0), replications=3, base_seed=7, out_dir=str(tmp_path))
    base.update(kw)
    return ExperimentConfig(**base)


def test_mean_ci_examples():
    assert mean_ci([1.0, 3.0]) == pytest.approx((2.0, 2 ** 0.5, 1.96))
    assert mean_ci([4.0, 4.0, 4.0]) == (4.0, 0.0, 0.0)
    assert mean_ci([5.0]) == (5.0, 0.0, 0.0)


def test_aggregate_groups_and_skips_blanks():
    rows = [
        {"algorithm": "oms", "n": "2", "w_deg": "45.0", "completion_time_s": "1.0"},
        {"algorithm": "oms", "n": "2", "w_deg": "45.0", "completion_time_s": "3.0"},
        {"algorithm": "oms", "n": "2", "w_deg": "45.0", "completion_time_s": ""},
        {"algorithm": "exact", "n": "2", "w_deg": "45.0", "completion_time_s": "2.0"},
    ]
    out = aggregate(rows, metrics=("completion_time_s",))
    assert [(s.algorithm, s.count) for s in out] == [("oms", 2), ("exact", 1)]
    assert out[0].mean == 2.0 and out[0].ci95_halfwidth == pytest.approx(1.96)
    assert out[1].ci95_halfwidth == 0.0


def test_seed_derivation():
    a = derive_seed(0, 4, 45.0, 3)
    assert a == derive_seed(0, 4, 90.0, 3)
    assert len({a, derive_seed(1, 4, 45.0, 3), derive_seed(0, 5, 45.0, 3), derive_seed(0, 4, 45.0, 4)}) == 4
    assert 0 <= a < 2 ** 63


def test_cell_rows(tmp_path):
    cfg = _config(tmp_path)
    rows = run_cell(cfg, 4, 30.0, 1)
    assert [r["algorithm"] for r in rows] == list(cfg.algorithms)
    seed = int(rows[0]["seed"])
    assert seed == derive_seed(7, 4, 30.0, 1)
    for r in rows:
        assert list(r) == list(RESULT_FIELDS)
        assert float(r["completion_time_s"]) > 0
    assert rows[0]["optimal_proven"] == "true"
    assert all(r["optimal_proven"] == "" for r in rows[1:])


def test_experiment_files(tmp_path):
    cfg = _config(tmp_path)
    res = run_experiment(cfg)
    header = (tmp_path / "results.csv").read_text().splitlines()[0]
    assert header == ",".join(RESULT_FIELDS)
    rows = read_results(res.paths["results"])
    assert len(rows) == 2 * 2 * 3 * len(cfg.algorithms)
    with open(res.paths["summary"], newline="") as fh:
        summary = list(csv.DictReader(fh))
    assert {r["count"] for r in summary if r["metric"] == "completion_time_s"} == {"3"}
    meta = json.loads(res.paths["metadata"].read_text())
    assert meta["config"]["base_seed"] == 7
    assert summary_csv_text(res.summary) == res.paths["summary"].read_text()
    assert results_csv_text(res.rows) == res.paths["results"].read_text()


def test_repeatable_and_parallel_equivalent(tmp_path):
    cfg = _config(tmp_path, replications=2)
    first = run_rows(cfg)
    assert run_rows(cfg) == first
    assert run_rows(cfg, parallel=2) == first


def test_seed_independent_of_algorithm_list(tmp_path):
    full = run_rows(_config(tmp_path))
    only = run_rows(_config(tmp_path, algorithms=("mmdimu",)))
    assert [r for r in full if r["algorithm"] == "mmdimu"] == only


def test_trace_output(tmp_path):
    cfg = _config(tmp_path, n_values=(3,), w_values_deg=(45.0,), replications=1, trace=True)
    run_experiment(cfg)
    traces = sorted(p.name for p in (tmp_path / "traces").iterdir())
    assert traces == sorted(f"{a}_n3_w45_r0.json" for a in cfg.algorithms)


def test_unreachable_rows_are_blank(tmp_path):
    cfg = _config(tmp_path, n_values=(6,), w_values_deg=(45.0,), replications=1, radio=RadioParams(snr_floor_db=60.0))
    rows = run_rows(cfg)
    assert all(r["completion_time_s"] == "" for r in rows)
    assert all(r["seed"] != "" for r in rows)
    assert aggregate(rows) == []
