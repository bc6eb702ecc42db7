"""Seeded experiment sweeps, CSV output and confidence-interval aggregation."""

from __future__ import annotations

import csv
import io
import json
import logging
import math
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from .baselines import run_adapt, run_fhomb, run_oms
from .config import ExperimentConfig
from .exact import SolverBudget, solve_exact
from .metrics import compute_metrics
from .mmdimu import run_mmdimu
from .schedule import Schedule, ScheduleError, UnreachableError, save_schedule, validate
from .topology import Scenario, generate_scenario, save_scenario

log = logging.getLogger(__name__)

RESULT_FIELDS = (
    "algorithm",
    "n",
    "w_deg",
    "replication",
    "seed",
    "completion_time_s",
    "slots",
    "total_tx",
    "relay_tx",
    "concurrent_tx",
    "relay_ratio",
    "concurrent_ratio",
    "interference_pct_omni",
    "interference_pct_dir",
    "optimal_proven",
)
SUMMARY_FIELDS = ("algorithm", "n", "w_deg", "metric", "mean", "ci95_halfwidth", "count")
METRICS = RESULT_FIELDS[5:14]
Z95 = 1.96


def derive_seed(base_seed: int, n: int, w_deg: float, replication: int) -> int:
    """Scenario seed for one cell.

    The beamwidth only changes the lobe grid, so it is deliberately left
    out: the same node layout is reused across beamwidths, which pairs the
    beamwidth sweep the same way algorithms are paired within a cell.
    """
    del w_deg
    state = np.random.SeedSequence([int(base_seed), int(n), int(replication)]).generate_state(2, np.uint32)
    return int(state[0]) << 31 | int(state[1]) >> 1


def run_algorithm(
    name: str,
    scenario: Scenario,
    config: ExperimentConfig,
    seed: int,
) -> tuple[Schedule, Optional[bool]]:
    rx = config.rx_mode
    if name == "exact":
        budget = SolverBudget(max_nodes=config.max_nodes, max_seconds=config.max_seconds)
        res = solve_exact(scenario, rx, budget)
        return res.schedule, res.proof_of_optimality
    if name == "mmdimu":
        return run_mmdimu(scenario, rx, seed=seed), None
    if name == "oms":
        return run_oms(scenario, rx), None
    if name == "fhomb":
        return run_fhomb(scenario, rx, slot_len_s=config.fhomb_slot_len_s), None
    if name == "adapt":
        return run_adapt(scenario, rx), None
    raise ValueError(f"unknown algorithm {name!r}")


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _trace_name(alg: str, n: int, w: float, r: int) -> str:
    return f"{alg}_n{n}_w{w:g}_r{r}.json"


def run_cell(config: ExperimentConfig, n: int, w_deg: float, replication: int) -> list[dict[str, str]]:
    """Every selected algorithm on one seeded scenario; one CSV row per algorithm."""
    seed = derive_seed(config.base_seed, n, w_deg, replication)
    scenario = generate_scenario(n, w_deg, seed, area_side=config.area_side, radio=config.radio)
    out_dir = Path(config.out_dir)
    rows = []
    for alg in config.algorithms:
        row = {"algorithm": alg, "n": str(n), "w_deg": _fmt(float(w_deg)), "replication": str(replication), "seed": str(seed)}
        try:
            schedule, proven = run_algorithm(alg, scenario, config, seed)
        except UnreachableError as exc:
            log.warning("%s n=%d w=%g r=%d: unreachable nodes %s", alg, n, w_deg, replication, exc.nodes)
            rows.append({k: row.get(k, "") for k in RESULT_FIELDS})
            continue
        violations = validate(schedule, scenario, config.rx_mode)
        if violations:
            dump = out_dir / "failures"
            dump.mkdir(parents=True, exist_ok=True)
            save_schedule(schedule, dump / _trace_name(alg, n, w_deg, replication))
            save_scenario(scenario, dump / f"scenario_n{n}_w{w_deg:g}_r{replication}.json")
            raise ScheduleError(violations, schedule)
        if config.trace:
            traces = out_dir / "traces"
            traces.mkdir(parents=True, exist_ok=True)
            save_schedule(schedule, traces / _trace_name(alg, n, w_deg, replication))
        m = compute_metrics(schedule, scenario)
        row.update(
            completion_time_s=_fmt(m.completion_time_s),
            slots=str(m.slots_used),
            total_tx=str(m.total_transmissions),
            relay_tx=str(m.relay_transmissions),
            concurrent_tx=str(m.concurrent_transmissions),
            relay_ratio=_fmt(m.relay_ratio),
            concurrent_ratio=_fmt(m.concurrent_ratio),
            interference_pct_omni=_fmt(m.interference_pct_omni),
            interference_pct_dir=_fmt(m.interference_pct_directional),
            optimal_proven=_fmt(proven),
        )
        rows.append(row)
    return rows


def _cell_task(args: tuple[ExperimentConfig, int, float, int]) -> list[dict[str, str]]:
    return run_cell(*args)


def cells(config: ExperimentConfig) -> list[tuple[int, float, int]]:
    return [(n, w, r) for n in config.n_values for w in config.w_values_deg for r in range(config.replications)]


def run_rows(config: ExperimentConfig, parallel: int = 1) -> list[dict[str, str]]:
    tasks = [(config, n, w, r) for n, w, r in cells(config)]
    if parallel <= 1:
        chunks = map(_cell_task, tasks)
        return [row for chunk in chunks for row in chunk]
    with ProcessPoolExecutor(max_workers=parallel) as pool:
        chunks = pool.map(_cell_task, tasks, chunksize=max(1, len(tasks) // (4 * parallel)))
        return [row for chunk in chunks for row in chunk]


@dataclass(frozen=True)
class SummaryRow:
    algorithm: str
    n: str
    w_deg: str
    metric: str
    mean: float
    std: float
    ci95_halfwidth: float
    count: int


def mean_ci(values: Sequence[float]) -> tuple[float, float, float]:
    """Mean, sample standard deviation and normal-approximation 95% half-width."""
    mean = math.fsum(values) / len(values)
    if len(values) < 2:
        return mean, 0.0, 0.0
    std = statistics.stdev(values)
    return mean, std, Z95 * std / math.sqrt(len(values))


def aggregate(
    rows: Iterable[dict[str, str]],
    group_keys: Sequence[str] = ("algorithm", "n", "w_deg"),
    metrics: Sequence[str] = METRICS,
) -> list[SummaryRow]:
    """Per group and metric: mean, sample std and 95% CI half-width.

    Rows with an empty value are skipped (unreachable runs). Groups keep the
    order in which they first appear.
    """
    groups: dict[tuple[str, ...], list[dict[str, str]]] = {}
    for row in rows:
        groups.setdefault(tuple(str(row[k]) for k in group_keys), []).append(row)
    out = []
    for key, members in groups.items():
        ident = dict(zip(group_keys, key))
        for metric in metrics:
            values = [float(r[metric]) for r in members if r.get(metric, "") != ""]
            if not values:
                continue
            mean, std, half = mean_ci(values)
            out.append(
                SummaryRow(
                    algorithm=ident.get("algorithm", ""),
                    n=ident.get("n", ""),
                    w_deg=ident.get("w_deg", ""),
                    metric=metric,
                    mean=mean,
                    std=std,
                    ci95_halfwidth=half,
                    count=len(values),
                )
            )
    return out


def results_csv_text(rows: Iterable[dict[str, str]]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=RESULT_FIELDS, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue()


def summary_csv_text(summary: Iterable[SummaryRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SUMMARY_FIELDS)
    for s in summary:
        writer.writerow([s.algorithm, s.n, s.w_deg, s.metric, repr(s.mean), repr(s.ci95_halfwidth), s.count])
    return buf.getvalue()


def read_results(path: str | Path) -> list[dict[str, str]]:
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


@dataclass
class ExperimentResult:
    rows: list[dict[str, str]]
    summary: list[SummaryRow]
    paths: dict[str, Path] = field(default_factory=dict)


def run_experiment(config: ExperimentConfig, parallel: int = 1, write: bool = True) -> ExperimentResult:
    rows = run_rows(config, parallel)
    summary = aggregate(rows)
    result = ExperimentResult(rows=rows, summary=summary)
    if write:
        out = Path(config.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        paths = {
            "results": out / config.results_csv,
            "summary": out / config.summary_csv,
            "metadata": out / "metadata.json",
        }
        paths["results"].write_text(results_csv_text(rows), encoding="utf-8")
        paths["summary"].write_text(summary_csv_text(summary), encoding="utf-8")
        meta = {
            "config": config.to_dict(),
            "ci_method": "normal approximation, mean +/- 1.96 * s / sqrt(R)",
            "seed_derivation": "SeedSequence([base_seed, n, replication]), shared across beamwidths",
        }
        paths["metadata"].write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        result.paths = paths
    return result
