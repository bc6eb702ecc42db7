"""Schedules, completion time, and the feasibility checker every scheduler must pass."""

from __future__ import annotations

import json
import math
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Iterator, Optional

from . import channel
from .topology import Scenario, angle_in_arc, linkable

REL_TOL = 1e-9


@dataclass(frozen=True)
class Transmission:
    """One parent node serving a set of child nodes during one slot.

    ``bits`` is the payload carried; it equals the frame size except for
    schedulers that deliver a frame in pieces. ``beam`` is ``(start_deg,
    width_deg)`` for a single steerable beam; ``None`` means the fixed lobe
    grid with power split across ``lobes``.
    """

    pn: int
    tns: frozenset[int]
    cns: frozenset[int]
    lobes: frozenset[int]
    rate_bps: float
    duration_s: float
    bits: float
    beam: Optional[tuple[float, float]] = None

    def to_dict(self) -> dict[str, Any]:
        d = {
            "pn": self.pn,
            "tns": sorted(self.tns),
            "cns": sorted(self.cns),
            "lobes": sorted(self.lobes),
            "rate_bps": self.rate_bps,
            "duration_s": self.duration_s,
            "bits": self.bits,
        }
        if self.beam is not None:
            d["beam"] = list(self.beam)
        return d

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "Transmission":
        return cls(
            pn=int(d["pn"]),
            tns=frozenset(int(x) for x in d["tns"]),
            cns=frozenset(int(x) for x in d["cns"]),
            lobes=frozenset(int(x) for x in d["lobes"]),
            rate_bps=float(d["rate_bps"]),
            duration_s=float(d["duration_s"]),
            bits=float(d["bits"]),
            beam=tuple(d["beam"]) if d.get("beam") is not None else None,
        )


def make_transmission(
    scenario: Scenario,
    pn: int,
    cns: Iterable[int],
    rx_mode: str = "omni",
    bits: Optional[float] = None,
) -> Transmission:
    """Build a lobe-grid transmission serving exactly ``cns``.

    The target of each occupied lobe is its weakest child; power is split
    over the occupied lobes.
    """
    cns = frozenset(int(c) for c in cns)
    if not cns:
        raise ValueError("a transmission needs at least one child node")
    snr = channel.single_lobe_snr_matrix(scenario, rx_mode)[pn]
    per_lobe: dict[int, int] = {}
    for u in sorted(cns):
        lobe = int(scenario.lobes[pn, u])
        cur = per_lobe.get(lobe)
        if cur is None or snr[u] < snr[cur]:
            per_lobe[lobe] = u
    worst = min(float(snr[t]) for t in per_lobe.values()) - channel.power_split_db(len(per_lobe))
    rate = channel.rate_bps(worst, scenario.radio)
    bits = scenario.radio.frame_bits if bits is None else float(bits)
    return Transmission(
        pn=int(pn),
        tns=frozenset(per_lobe.values()),
        cns=cns,
        lobes=frozenset(per_lobe),
        rate_bps=rate,
        duration_s=bits / rate if rate > 0 else math.inf,
        bits=bits,
    )


def beam_rate_bps(scenario: Scenario, pn: int, cns: Iterable[int], width_deg: float, rx_mode: str) -> tuple[int, float]:
    """Target and rate of a single full-power beam ``width_deg`` wide."""
    snr = channel.single_lobe_snr_matrix(scenario, rx_mode)[pn]
    tn = min(sorted(cns), key=lambda u: snr[u])
    gain_delta = channel.tx_antenna_gain_db(width_deg) - channel.tx_antenna_gain_db(scenario.beamwidth_deg)
    return tn, channel.rate_bps(float(snr[tn]) + gain_delta, scenario.radio)


def make_beam_transmission(
    scenario: Scenario,
    pn: int,
    cns: Iterable[int],
    start_deg: float,
    width_deg: float,
    rx_mode: str = "omni",
) -> Transmission:
    cns = frozenset(int(c) for c in cns)
    tn, rate = beam_rate_bps(scenario, pn, cns, width_deg, rx_mode)
    bits = scenario.radio.frame_bits
    return Transmission(
        pn=int(pn),
        tns=frozenset([tn]),
        cns=cns,
        lobes=frozenset(),
        rate_bps=rate,
        duration_s=bits / rate if rate > 0 else math.inf,
        bits=bits,
        beam=(float(start_deg) % 360.0, float(width_deg)),
    )


@dataclass(frozen=True)
class Schedule:
    slots: tuple[tuple[Transmission, ...], ...]
    algorithm: str = ""
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "slots", tuple(tuple(s) for s in self.slots))

    @property
    def slot_durations(self) -> list[float]:
        return [max(t.duration_s for t in slot) if slot else 0.0 for slot in self.slots]

    @property
    def total_time_s(self) -> float:
        return math.fsum(self.slot_durations)

    @property
    def n_slots(self) -> int:
        return len(self.slots)

    def transmissions(self) -> Iterator[Transmission]:
        for slot in self.slots:
            yield from slot

    def to_dict(self) -> dict[str, Any]:
        return {
            "algorithm": self.algorithm,
            "total_time_s": self.total_time_s,
            "slots": [
                {"duration_s": dur, "transmissions": [t.to_dict() for t in slot]}
                for dur, slot in zip(self.slot_durations, self.slots)
            ],
            "meta": self.meta,
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "Schedule":
        slots = tuple(
            tuple(Transmission.from_dict(t) for t in slot["transmissions"]) for slot in d["slots"]
        )
        return cls(slots=slots, algorithm=d.get("algorithm", ""), meta=d.get("meta", {}))


def save_schedule(schedule: Schedule, path: str | Path) -> None:
    Path(path).write_text(json.dumps(schedule.to_dict(), indent=1), encoding="utf-8")


def load_schedule(path: str | Path) -> Schedule:
    return Schedule.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def completion_time(schedule: Schedule) -> float:
    """Sum over slots of the longest transmission in each slot."""
    if not schedule.slots:
        raise ValueError("empty schedule has no completion time")
    return schedule.total_time_s


@dataclass(frozen=True)
class Violation:
    rule: str
    slot: Optional[int]
    message: str

    def __str__(self) -> str:
        where = f"slot {self.slot}: " if self.slot is not None else ""
        return f"[{self.rule}] {where}{self.message}"


def _close(a: float, b: float) -> bool:
    return math.isclose(a, b, rel_tol=REL_TOL, abs_tol=0.0)


def _check_transmission(scenario: Scenario, t: Transmission, s: int, rx_mode: str) -> list[Violation]:
    out: list[Violation] = []

    def bad(rule: str, msg: str) -> None:
        out.append(Violation(rule, s, f"pn {t.pn}: {msg}"))

    N = scenario.n
    radio = scenario.radio
    if not 0 <= t.pn <= N:
        bad("transmission", "unknown parent node")
        return out
    if not t.cns:
        bad("transmission", "empty child set")
        return out
    if any(not 1 <= c <= N for c in t.cns):
        bad("transmission", f"unknown child nodes {sorted(t.cns)}")
        return out
    if t.pn in t.cns:
        bad("transmission", "parent listed as its own child")
        return out
    if not t.tns <= t.cns:
        bad("transmission", f"targets {sorted(t.tns - t.cns)} are not children")
    ok = linkable(scenario, rx_mode)
    unusable = [c for c in sorted(t.cns) if not ok[t.pn, c]]
    if unusable:
        bad("transmission", f"children {unusable} are not reachable over a usable link")
    snr = channel.single_lobe_snr_matrix(scenario, rx_mode)[t.pn]

    if t.beam is None:
        tn_lobes = [int(scenario.lobes[t.pn, n]) for n in t.tns]
        if len(set(tn_lobes)) != len(tn_lobes):
            out.append(Violation("lobe-target", s, f"pn {t.pn}: more than one target in a lobe"))
        if set(tn_lobes) != set(t.lobes):
            bad("transmission", f"active lobes {sorted(t.lobes)} differ from target lobes {sorted(set(tn_lobes))}")
        for c in sorted(t.cns):
            lobe = int(scenario.lobes[t.pn, c])
            if lobe not in t.lobes:
                bad("transmission", f"child {c} outside the active lobes")
                continue
            tn = [n for n in t.tns if scenario.lobes[t.pn, n] == lobe]
            if tn and snr[c] < snr[tn[0]] - 1e-12:
                bad("transmission", f"child {c} is weaker than target {tn[0]} of lobe {lobe}")
        if t.tns and t.lobes:
            worst = min(float(snr[n]) for n in t.tns) - channel.power_split_db(len(t.lobes))
            expect = channel.rate_bps(worst, radio)
            if not _close(t.rate_bps, expect):
                bad("transmission", f"rate {t.rate_bps:.6g} != achievable {expect:.6g}")
    else:
        start, width = t.beam
        if width < scenario.beamwidth_deg - 1e-9 or width > 360.0:
            bad("transmission", f"beam width {width} outside [{scenario.beamwidth_deg}, 360]")
        bearings = scenario.bearings_deg[t.pn]
        for c in sorted(t.cns):
            if not angle_in_arc(float(bearings[c]) + 1e-9, start, width + 2e-9):
                bad("transmission", f"child {c} outside beam")
        if len(t.tns) != 1:
            out.append(Violation("lobe-target", s, f"pn {t.pn}: a single beam has exactly one target"))
        elif t.tns <= t.cns:
            (tn,) = t.tns
            if any(snr[c] < snr[tn] - 1e-12 for c in t.cns):
                bad("transmission", f"target {tn} is not the weakest child")
            _, expect = beam_rate_bps(scenario, t.pn, t.tns, width, rx_mode)
            if not _close(t.rate_bps, expect):
                bad("transmission", f"rate {t.rate_bps:.6g} != achievable {expect:.6g}")

    if t.rate_bps > radio.max_rate_bps * (1 + 1e-12):
        bad("transmission", f"rate {t.rate_bps} exceeds W*rho_max")
    if not t.rate_bps > 0:
        bad("transmission", "non-positive rate")
    elif not _close(t.duration_s, t.bits / t.rate_bps):
        bad("transmission", f"duration {t.duration_s} != bits/rate {t.bits / t.rate_bps}")
    if not 0 < t.bits <= radio.frame_bits * (1 + REL_TOL):
        bad("transmission", f"payload {t.bits} outside (0, frame size]")
    return out


def validate(schedule: Schedule, scenario: Scenario, rx_mode: str = "omni") -> list[Violation]:
    """Every constraint violation in ``schedule``; an empty list means feasible.

    A node counts as holding the frame once the payloads it has received add
    up to the frame size, so partial-delivery schedules are checked with the
    same rules.
    """
    violations: list[Violation] = []
    B = scenario.radio.frame_bits
    received: dict[int, float] = defaultdict(float)
    holders = {0}

    if not schedule.slots:
        violations.append(Violation("coverage", None, "schedule has no slots"))

    for s, slot in enumerate(schedule.slots, start=1):
        if not slot:
            violations.append(Violation("slot", s, "empty slot"))
            continue
        pns = [t.pn for t in slot]
        if s == 1 and pns != [0]:
            violations.append(Violation("source-first", s, f"slot 1 parents are {pns}, expected only node 0"))
        dup = sorted({p for p in pns if pns.count(p) > 1})
        if dup:
            violations.append(Violation("slot", s, f"nodes {dup} transmit more than once"))
        seen: set[int] = set()
        for t in slot:
            twice = seen & t.cns
            if twice:
                violations.append(Violation("slot", s, f"nodes {sorted(twice)} are children of two parents"))
            seen |= t.cns
        for t in slot:
            if s >= 2 and t.pn not in holders:
                violations.append(Violation("causality", s, f"node {t.pn} transmits before holding the frame"))
            violations.extend(_check_transmission(scenario, t, s, rx_mode))
        for t in slot:
            for c in t.cns:
                received[c] += t.bits
        holders |= {c for c, b in received.items() if b >= B * (1 - REL_TOL)}

    missing = [n for n in range(1, scenario.n + 1) if n not in holders]
    if missing:
        violations.append(Violation("coverage", None, f"nodes {missing} never receive the full frame"))
    return violations


def is_valid(schedule: Schedule, scenario: Scenario, rx_mode: str = "omni") -> bool:
    return not validate(schedule, scenario, rx_mode)


class ScheduleError(RuntimeError):
    def __init__(self, violations: list[Violation], schedule: Optional[Schedule] = None):
        self.violations = violations
        self.schedule = schedule
        super().__init__("; ".join(str(v) for v in violations[:5]))


class UnreachableError(RuntimeError):
    """Some receivers cannot be reached over usable links."""

    def __init__(self, nodes: Iterable[int]):
        self.nodes = sorted(nodes)
        super().__init__(f"unreachable nodes: {self.nodes}")


def unreachable_nodes(scenario: Scenario, rx_mode: str = "omni", source_only: bool = False) -> list[int]:
    """Receivers with no usable path from the source (or no direct link if ``source_only``)."""
    ok = linkable(scenario, rx_mode)
    if source_only:
        return [n for n in range(1, scenario.n + 1) if not ok[0, n]]
    seen = {0}
    stack = [0]
    while stack:
        m = stack.pop()
        for n in range(1, scenario.n + 1):
            if n not in seen and ok[m, n]:
                seen.add(n)
                stack.append(n)
    return [n for n in range(1, scenario.n + 1) if n not in seen]
