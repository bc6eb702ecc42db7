"""Single-hop reference schedulers in which only the source transmits.

``run_oms`` serves the SNR-sorted prefix with the best instantaneous sum
throughput, ``run_fhomb`` delivers the frame piecewise over fixed-length
slots, and ``run_adapt`` serves angular groups with a steerable beam whose
width adapts to the group.
"""

from __future__ import annotations

from typing import Optional

from . import channel
from .schedule import (
    Schedule,
    Transmission,
    UnreachableError,
    beam_rate_bps,
    make_beam_transmission,
    make_transmission,
    unreachable_nodes,
)
from .topology import Scenario


def _prepare(scenario: Scenario, rx_mode: str, w: Optional[float]) -> Scenario:
    if w is not None:
        scenario = scenario.with_beamwidth(w)
    lost = unreachable_nodes(scenario, rx_mode, source_only=True)
    if lost:
        raise UnreachableError(lost)
    return scenario


def _by_snr(scenario: Scenario, nodes, rx_mode: str) -> list[int]:
    snr = channel.single_lobe_snr_matrix(scenario, rx_mode)[0]
    return sorted(nodes, key=lambda u: (-snr[u], u))


def _prefix_rates(scenario: Scenario, order: list[int], rx_mode: str) -> list[float]:
    """Rate of serving ``order[:k]`` for each ``k``: weakest member after the lobe split."""
    snr = channel.single_lobe_snr_matrix(scenario, rx_mode)[0]
    lobes: set[int] = set()
    out = []
    for u in order:
        lobes.add(int(scenario.lobes[0, u]))
        out.append(channel.rate_bps(float(snr[u]) - channel.power_split_db(len(lobes)), scenario.radio))
    return out


def run_oms(scenario: Scenario, rx_mode: str = "omni", w: Optional[float] = None) -> Schedule:
    scenario = _prepare(scenario, rx_mode, w)
    left = _by_snr(scenario, range(1, scenario.n + 1), rx_mode)
    slots = []
    while left:
        rates = _prefix_rates(scenario, left, rx_mode)
        k = max(range(1, len(left) + 1), key=lambda k: (k * rates[k - 1], k))
        slots.append((make_transmission(scenario, 0, left[:k], rx_mode),))
        left = left[k:]
    return Schedule(slots=tuple(slots), algorithm="oms")


def run_fhomb(
    scenario: Scenario,
    rx_mode: str = "omni",
    slot_len_s: float = 0.1,
    w: Optional[float] = None,
) -> Schedule:
    """Fixed-slot multicast with partial delivery.

    Every slot the prefix policy with the smallest estimated completion
    time is served: its own finishing time at the prefix rate plus the time
    for everyone else to finish by an all-lobe broadcast. Consecutive slots
    with the same policy are emitted as one record carrying the bits
    delivered; the final slot stops once its nodes are done.
    """
    if slot_len_s <= 0:
        raise ValueError("slot_len_s must be positive")
    scenario = _prepare(scenario, rx_mode, w)
    B = scenario.radio.frame_bits
    remaining = {u: B for u in range(1, scenario.n + 1)}
    done_tol = B * 1e-12
    records: list[Transmission] = []
    run_nodes: Optional[tuple[int, ...]] = None
    run_bits = 0.0

    def flush() -> None:
        if run_nodes is not None:
            records.append(make_transmission(scenario, 0, run_nodes, rx_mode, bits=run_bits))

    while remaining:
        order = _by_snr(scenario, remaining, rx_mode)
        rates = _prefix_rates(scenario, order, rx_mode)
        best: Optional[tuple[float, int]] = None
        for k in range(1, len(order) + 1):
            own = max(remaining[u] for u in order[:k]) / rates[k - 1]
            rest = order[k:]
            tail = 0.0
            if rest:
                bc = _prefix_rates(scenario, rest, rx_mode)[-1]
                tail = max(remaining[u] for u in rest) / bc
            est = own + tail
            if best is None or est < best[0] or (est == best[0] and k > best[1]):
                best = (est, k)
        k = best[1]
        chosen = tuple(sorted(order[:k]))
        rate = rates[k - 1]
        span = min(slot_len_s, max(remaining[u] for u in chosen) / rate)
        if chosen != run_nodes:
            flush()
            run_nodes, run_bits = chosen, 0.0
        run_bits += span * rate
        for u in chosen:
            remaining[u] -= span * rate
            if remaining[u] <= done_tol:
                del remaining[u]
    flush()
    return Schedule(
        slots=tuple((t,) for t in records),
        algorithm="fhomb",
        meta={"slot_len_s": slot_len_s},
    )


def _span(bearings: list[float]) -> float:
    return (bearings[-1] - bearings[0]) % 360.0


def run_adapt(scenario: Scenario, rx_mode: str = "omni", w: Optional[float] = None) -> Schedule:
    """Hierarchical angular grouping with adjustable beamwidth.

    Starting from the smallest arc holding every node, a group is split at
    its widest internal gap whenever serving the halves back to back is
    strictly faster. Each leaf is one beam ``max(w, span)`` wide, centred
    on the group.
    """
    scenario = _prepare(scenario, rx_mode, w)
    w_deg = scenario.beamwidth_deg
    bearing = scenario.bearings_deg[0]
    B = scenario.radio.frame_bits
    nodes = sorted(range(1, scenario.n + 1), key=lambda u: (float(bearing[u]), u))
    angles = [float(bearing[u]) for u in nodes]
    gaps = [(angles[(i + 1) % len(angles)] - angles[i]) % 360.0 for i in range(len(angles))]
    if len(nodes) > 1:
        cut = max(range(len(gaps)), key=lambda i: (gaps[i], -i)) + 1
        nodes = nodes[cut:] + nodes[:cut]

    def width(group: list[int]) -> float:
        return min(360.0, max(w_deg, _span([float(bearing[u]) for u in group])))

    def cost(group: list[int]) -> float:
        _, rate = beam_rate_bps(scenario, 0, group, width(group), rx_mode)
        return B / rate

    def split(group: list[int]) -> list[list[int]]:
        if len(group) == 1:
            return [group]
        inner = [(float(bearing[group[i + 1]]) - float(bearing[group[i]])) % 360.0 for i in range(len(group) - 1)]
        i = max(range(len(inner)), key=lambda j: (inner[j], -j)) + 1
        left, right = group[:i], group[i:]
        if cost(left) + cost(right) < cost(group):
            return split(left) + split(right)
        return [group]

    slots = []
    for leaf in split(nodes):
        bw = width(leaf)
        start = float(bearing[leaf[0]])
        start -= (bw - _span([float(bearing[u]) for u in leaf])) / 2.0
        slots.append((make_beam_transmission(scenario, 0, leaf, start, bw, rx_mode),))
    return Schedule(slots=tuple(slots), algorithm="adapt")

