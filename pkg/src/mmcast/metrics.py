"""Schedule statistics: relay and concurrent transmissions, interference."""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Any

from .schedule import Schedule, Transmission
from .topology import Scenario, angle_in_arc


@dataclass(frozen=True)
class MetricsReport:
    completion_time_s: float
    slots_used: int
    total_transmissions: int
    relay_transmissions: int
    concurrent_transmissions: int
    relay_ratio: float
    concurrent_ratio: float
    interference_pct_omni: float
    interference_pct_directional: float

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


def count_relay(schedule: Schedule) -> int:
    return sum(1 for t in schedule.transmissions() if t.pn != 0)


def count_concurrent(schedule: Schedule) -> int:
    return sum(len(slot) for slot in schedule.slots if len(slot) >= 2)


def _covers(scenario: Scenario, t: Transmission, node: int) -> bool:
    """Whether ``node`` lies inside the radiated sector of ``t``."""
    if node == t.pn:
        return False
    if t.beam is not None:
        start, width = t.beam
        return angle_in_arc(float(scenario.bearings_deg[t.pn, node]), start, width)
    return int(scenario.lobes[t.pn, node]) in t.lobes


def _facing(scenario: Scenario, victim: int, own_pn: int, other_pn: int) -> bool:
    """Whether ``other_pn`` falls inside ``victim``'s receive beam aimed at ``own_pn``."""
    bearings = scenario.bearings_deg[victim]
    off = (float(bearings[other_pn]) - float(bearings[own_pn]) + 180.0) % 360.0 - 180.0
    return abs(off) <= scenario.beamwidth_deg / 2.0


def _interferes(scenario: Scenario, src: Transmission, dst: Transmission, rx_mode: str) -> bool:
    for c in sorted(dst.cns):
        if not _covers(scenario, src, c):
            continue
        if rx_mode == "omni" or _facing(scenario, c, dst.pn, src.pn):
            return True
    return False


def interference_pct(schedule: Schedule, scenario: Scenario, rx_mode: str = "omni") -> float:
    """Share of ordered co-slot transmission pairs ``(a, b)`` where ``a`` radiates onto a child of ``b``.

    With directional reception the child must also be facing ``a``'s parent.
    """
    if rx_mode not in ("omni", "directional"):
        raise ValueError(f"unknown rx_mode {rx_mode!r}")
    pairs = hits = 0
    for slot in schedule.slots:
        for i, a in enumerate(slot):
            for j, b in enumerate(slot):
                if i == j:
                    continue
                pairs += 1
                hits += _interferes(scenario, a, b, rx_mode)
    return 100.0 * hits / pairs if pairs else 0.0


def compute_metrics(schedule: Schedule, scenario: Scenario) -> MetricsReport:
    total = sum(len(slot) for slot in schedule.slots)
    relay = count_relay(schedule)
    concurrent = count_concurrent(schedule)
    return MetricsReport(
        completion_time_s=schedule.total_time_s,
        slots_used=schedule.n_slots,
        total_transmissions=total,
        relay_transmissions=relay,
        concurrent_transmissions=concurrent,
        relay_ratio=relay / total if total else 0.0,
        concurrent_ratio=concurrent / total if total else 0.0,
        interference_pct_omni=interference_pct(schedule, scenario, "omni"),
        interference_pct_directional=interference_pct(schedule, scenario, "directional"),
    )
