"""Export of the slot-indexed scheduling model in CPLEX LP text format.

Variables ``p_m_k_s`` are 1 when node ``m`` transmits column ``k`` of its
target matrix in slot ``s``; ``d_s`` is the length of slot ``s`` and is
bounded below by every active transmission time, so ``min sum d_s``
linearises the per-slot maximum.
"""

from __future__ import annotations

import math
from typing import Optional

from .channel import transmission_time
from .topology import Scenario, build_cn_matrix, build_target_matrix


def _p(m: int, k: int, s: int) -> str:
    return f"p_{m}_{k}_{s}"


def _terms(pairs: list[tuple[float, str]]) -> str:
    out = []
    for coef, var in pairs:
        sign = "-" if coef < 0 else "+"
        mag = abs(coef)
        body = var if mag == 1 else f"{mag!r} {var}"
        out.append(f"{sign} {body}")
    text = " ".join(out)
    return text[2:] if text.startswith("+ ") else text


def export_lp(
    scenario: Scenario,
    s_max: int,
    rx_mode: str = "omni",
    w: Optional[float] = None,
) -> str:
    if s_max < 1:
        raise ValueError(f"s_max must be >= 1, got {s_max}")
    if w is not None:
        scenario = scenario.with_beamwidth(w)
    n = scenario.n
    U = build_target_matrix(n)
    K = U.shape[1]
    slots = range(1, s_max + 1)
    nodes = range(n + 1)
    cover = {}
    times = {}
    fixed: set[str] = set()
    for m in nodes:
        C, feasible = build_cn_matrix(scenario, m, rx_mode)
        cover[m] = C
        for k in range(1, K + 1):
            if not feasible[k - 1]:
                fixed.update(_p(m, k, s) for s in slots)
                continue
            targets = [i + 1 for i in range(n) if U[i, k - 1]]
            t, _ = transmission_time(scenario, m, targets, rx_mode)
            if math.isinf(t):
                fixed.update(_p(m, k, s) for s in slots)
            else:
                times[m, k] = t
        if m > 0:
            fixed.update(_p(m, k, 1) for k in range(1, K + 1))

    rows: list[str] = []

    def row(name: str, pairs: list[tuple[float, str]], sense: str, rhs: float) -> None:
        rows.append(f" {name}: {_terms(pairs)} {sense} {rhs!r}")

    for s in slots:
        for (m, k), t in sorted(times.items()):
            row(f"dur_{m}_{k}_{s}", [(1.0, f"d_{s}"), (-t, _p(m, k, s))], ">=", 0.0)
    row("source_first", [(1.0, _p(0, k, 1)) for k in range(1, K + 1)], "=", 1.0)
    for s in slots:
        for m in nodes:
            row(f"one_col_{m}_{s}", [(1.0, _p(m, k, s)) for k in range(1, K + 1)], "<=", 1.0)
    for s in slots:
        if s == 1:
            continue
        for m in range(1, n + 1):
            lhs = [(1.0, _p(m, k, s)) for k in range(1, K + 1)]
            earlier = [
                (-1.0, _p(j, k, q))
                for q in range(1, s)
                for j in nodes
                if j != m
                for k in range(1, K + 1)
                if cover[j][m - 1, k - 1]
            ]
            row(f"causal_{m}_{s}", lhs + earlier, "<=", 0.0)
    for u in range(1, n + 1):
        terms = [
            (1.0, _p(j, k, s))
            for s in slots
            for j in nodes
            if j != u
            for k in range(1, K + 1)
            if cover[j][u - 1, k - 1]
        ]
        if terms:
            row(f"cover_{u}", terms, ">=", 1.0)
        else:
            rows.append(f" cover_{u}: 0 {_p(0, 1, 1)} >= 1.0")

    p_vars = [_p(m, k, s) for m in nodes for k in range(1, K + 1) for s in slots]
    lines = [
        f"\\ multicast schedule model: n={n}, lobes={scenario.lobe_count}, s_max={s_max}",
        "Minimize",
        " obj: " + _terms([(1.0, f"d_{s}") for s in slots]),
        "Subject To",
        *rows,
        "Bounds",
        *(f" d_{s} >= 0" for s in slots),
        *(f" {v} = 0" for v in p_vars if v in fixed),
        "Binary",
        *(f" {v}" for v in p_vars),
        "End",
        "",
    ]
    return "\n".join(lines)
