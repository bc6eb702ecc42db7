"""Distributed multi-hop heuristic.

Each round every waiting node attaches to its nearest informed node; each
informed node with attached children then serves the subset with the
largest ``served x rate``. Nodes served in a round transmit from the next.
"""

from __future__ import annotations

from typing import Iterable, Optional

import numpy as np

from . import channel
from .schedule import Schedule, Transmission, UnreachableError, make_transmission
from .topology import Scenario, linkable


def _best_config(scenario: Scenario, pn: int, cands: list[int], rx_mode: str) -> tuple[int, ...]:
    snr = channel.single_lobe_snr_matrix(scenario, rx_mode)[pn]
    radio = scenario.radio
    lobe = {u: int(scenario.lobes[pn, u]) for u in cands}
    best_key: Optional[tuple[float, int]] = None
    best: tuple[int, ...] = ()
    for theta in sorted({float(snr[u]) for u in cands}, reverse=True):
        counts: dict[int, int] = {}
        for u in cands:
            if snr[u] >= theta:
                counts[lobe[u]] = counts.get(lobe[u], 0) + 1
        ranked = sorted(counts, key=lambda l: (-counts[l], l))
        served = 0
        for a, l in enumerate(ranked, start=1):
            served += counts[l]
            key = (served * channel.rate_bps(theta - channel.power_split_db(a), radio), served)
            if best_key is None or key > best_key:
                chosen = set(ranked[:a])
                best_key = key
                best = tuple(u for u in cands if snr[u] >= theta and lobe[u] in chosen)
    return best


def max_throughput_subset(
    scenario: Scenario,
    pn: int,
    candidates: Iterable[int],
    rx_mode: str = "omni",
    w: Optional[float] = None,
) -> tuple[frozenset[int], float, float]:
    """Children of ``pn`` maximising ``served x rate`` in one transmission.

    Any lobe configuration is dominated by fixing the weakest target SNR
    ``theta`` and the number of active lobes ``A``: every candidate at or
    above ``theta`` in the ``A`` most populated lobes can then be served at
    no loss of rate. Enumerating ``(theta, A)`` is therefore exhaustive.
    Ties favour serving more nodes.
    """
    if w is not None:
        scenario = scenario.with_beamwidth(w)
    cands = sorted(set(int(c) for c in candidates))
    if not cands:
        raise ValueError("candidates must be non-empty")
    t = make_transmission(scenario, pn, _best_config(scenario, pn, cands, rx_mode), rx_mode)
    return t.cns, t.rate_bps, t.duration_s


def run_mmdimu(
    scenario: Scenario,
    rx_mode: str = "omni",
    seed: int = 0,
    w: Optional[float] = None,
) -> Schedule:
    if w is not None:
        scenario = scenario.with_beamwidth(w)
    rng = np.random.default_rng(seed)
    ok = linkable(scenario, rx_mode)
    dist = scenario.distances
    waiting = list(range(1, scenario.n + 1))
    pns = [0]
    slots: list[tuple[Transmission, ...]] = []
    while waiting:
        groups: dict[int, list[int]] = {}
        for u in waiting:
            reach = [p for p in pns if ok[p, u]]
            if not reach:
                continue
            near = min(float(dist[p, u]) for p in reach)
            ties = [p for p in reach if dist[p, u] == near]
            p = ties[int(rng.integers(len(ties)))] if len(ties) > 1 else ties[0]
            groups.setdefault(p, []).append(u)
        if not groups:
            raise UnreachableError(waiting)
        slot = []
        for p in sorted(groups):
            cns = _best_config(scenario, p, groups[p], rx_mode)
            slot.append(make_transmission(scenario, p, cns, rx_mode))
        slots.append(tuple(slot))
        served = {c for t in slot for c in t.cns}
        waiting = [u for u in waiting if u not in served]
        pns = sorted(set(pns) | served)
    return Schedule(slots=tuple(slots), algorithm="mmdimu", meta={"seed": seed})
