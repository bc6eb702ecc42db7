"""Brute-force reference for the exact solver on tiny instances.

Every slot, each informed node picks one column of its coverage matrix or
stays idle; the slot lasts as long as its slowest column. All such slot
sequences that inform at least one new node per slot are enumerated
depth first. Nothing here is shared with :mod:`mmcast.exact` beyond the
link budget.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from itertools import product

from .channel import transmission_time
from .topology import Scenario, SizeError, build_cn_matrix, build_target_matrix

ORACLE_MAX_N = 4


@dataclass(frozen=True)
class OracleReport:
    n: int
    exact_time_s: float
    oracle_time_s: float
    optimal_schedules: int
    match: bool


def _options(scenario: Scenario, rx_mode: str) -> list[list[tuple[int, float]]]:
    """Per node: ``(coverage mask, time)`` for every feasible column."""
    n = scenario.n
    U = build_target_matrix(n)
    out = []
    for m in range(n + 1):
        C, feasible = build_cn_matrix(scenario, m, rx_mode)
        opts = []
        for col in range(U.shape[1]):
            if not feasible[col]:
                continue
            targets = [i + 1 for i in range(n) if U[i, col]]
            t, _ = transmission_time(scenario, m, targets, rx_mode)
            if math.isinf(t):
                continue
            cover = sum(1 << i for i in range(n) if C[i, col])
            opts.append((cover, t))
        out.append(opts)
    return out


def enumerate_optimum(scenario: Scenario, rx_mode: str = "omni") -> tuple[float, int]:
    """Minimum completion time and the number of slot sequences attaining it."""
    n = scenario.n
    if n > ORACLE_MAX_N:
        raise SizeError(f"oracle limited to n <= {ORACLE_MAX_N}")
    options = _options(scenario, rx_mode)
    full = (1 << n) - 1

    @lru_cache(maxsize=None)
    def best(informed: int) -> tuple[float, int]:
        if informed == full:
            return 0.0, 1
        holders = [0] + [i + 1 for i in range(n) if informed >> i & 1]
        choices = [[(0, 0.0)] + options[m] for m in holders]
        value, count = math.inf, 0
        for combo in product(*choices):
            cover, dur = 0, 0.0
            for c, t in combo:
                cover |= c
                dur = max(dur, t)
            nxt = informed | cover
            if nxt == informed:
                continue
            rest, ways = best(nxt)
            total = dur + rest
            if math.isclose(total, value, rel_tol=1e-12):
                count += ways
            elif total < value:
                value, count = total, ways
        return value, count

    return best(0)


def check_against_oracle(scenario: Scenario, rx_mode: str = "omni") -> OracleReport:
    from .exact import solve_exact

    value, count = enumerate_optimum(scenario, rx_mode)
    result = solve_exact(scenario, rx_mode)
    return OracleReport(
        n=scenario.n,
        exact_time_s=result.completion_time_s,
        oracle_time_s=value,
        optimal_schedules=count,
        match=math.isclose(result.completion_time_s, value, rel_tol=1e-9),
    )


