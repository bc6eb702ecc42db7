"""Minimum-completion-time multicast schedules by best-first branch and bound.

The search runs over *informed sets*: which receivers already hold the
frame. Future cost depends only on that set, so each set is kept once with
the best elapsed time reaching it (dominance), and a set is expanded in
order of elapsed time plus an admissible lower bound on the time still
needed.

Expanding a set enumerates every slot the informed nodes can run together.
For a parent ``m`` serving exactly the children ``Y``, the cheapest lobe
configuration puts one target in each lobe ``Y`` occupies (its weakest
member), so the time is a function of ``Y`` alone. The shortest slot that
informs at least ``Y`` is then a min-max subset convolution of those
per-parent tables, evaluated for all ``Y`` at once.
"""

from __future__ import annotations

import heapq
import math
import time
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np

from . import channel
from .config import MAX_EXACT_N
from .schedule import Schedule, UnreachableError, make_transmission, unreachable_nodes
from .topology import Scenario, SizeError, linkable


@dataclass(frozen=True)
class SolverBudget:
    """Search limits; ``None`` means unlimited."""

    max_nodes: Optional[int] = None
    max_seconds: Optional[float] = None


@dataclass(frozen=True)
class OptimalResult:
    schedule: Schedule
    completion_time_s: float
    proof_of_optimality: bool
    expanded: int


def _popcount(a: np.ndarray) -> np.ndarray:
    return np.bitwise_count(a.astype(np.uint64)).astype(np.int64)


@lru_cache(maxsize=None)
def _submask_pairs(r: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """All ``(Y, A)`` with ``A`` a submask of ``Y`` over ``r`` bits, grouped by ``Y``.

    Returns ``(Y, A, starts)`` where ``starts[y]`` is the first pair of ``Y = y``.
    """
    ys = np.zeros(1, dtype=np.int64)
    as_ = np.zeros(1, dtype=np.int64)
    for i in range(r):
        bit = 1 << i
        ys = np.concatenate([ys, ys | bit, ys | bit])
        as_ = np.concatenate([as_, as_, as_ | bit])
    order = np.argsort(ys, kind="stable")
    ys, as_ = ys[order], as_[order]
    starts = np.searchsorted(ys, np.arange(1 << r))
    for arr in (ys, as_, starts):
        arr.setflags(write=False)
    return ys, as_, starts


def _deposit(bits: list[int]) -> np.ndarray:
    """Map local masks over ``len(bits)`` positions onto the global bit positions."""
    dep = np.zeros(1 << len(bits), dtype=np.int64)
    for i, b in enumerate(bits):
        dep[1 << i : 2 << i] = dep[: 1 << i] | (1 << b)
    return dep


def _bits_of(mask: int, n: int) -> list[int]:
    return [b for b in range(n) if mask >> b & 1]


class ServiceTable:
    """``time[m, Y]``: shortest time for node ``m`` to deliver the frame to exactly ``Y``.

    ``Y`` is a bitmask over receivers (bit ``i`` is node ``i + 1``); entries
    are ``inf`` when ``Y`` holds ``m`` itself or a node ``m`` cannot reach.
    """

    def __init__(self, scenario: Scenario, rx_mode: str = "omni"):
        n = scenario.n
        self.scenario = scenario
        self.rx_mode = rx_mode
        self.n = n
        self.full = (1 << n) - 1
        snr = channel.single_lobe_snr_matrix(scenario, rx_mode)
        ok = linkable(scenario, rx_mode)
        radio = scenario.radio
        size = 1 << n
        table = np.empty((n + 1, size))
        for m in range(n + 1):
            vals = np.where(ok[m, 1:], snr[m, 1:], -np.inf)
            _, lobe_ids = np.unique(scenario.lobes[m, 1:], return_inverse=True)
            min_snr = np.empty(size)
            min_snr[0] = np.inf
            lobe_mask = np.zeros(size, dtype=np.int64)
            for b in range(n):
                min_snr[1 << b : 2 << b] = np.minimum(min_snr[: 1 << b], vals[b])
                lobe_mask[1 << b : 2 << b] = lobe_mask[: 1 << b] | (1 << int(lobe_ids[b]))
            active = np.maximum(_popcount(lobe_mask), 1)
            rate = channel.rate_bps(min_snr - 10.0 * np.log10(active), radio)
            with np.errstate(divide="ignore"):
                table[m] = radio.frame_bits / rate
            table[m, 0] = 0.0
        table.setflags(write=False)
        self.time = table

    def single_link(self) -> np.ndarray:
        """``t1[v, u]`` for receivers ``u`` (column ``u - 1``)."""
        return self.time[:, [1 << b for b in range(self.n)]]


class _Search:
    def __init__(self, table: ServiceTable):
        self.table = table
        self.n = table.n
        self.full = table.full
        self.lower_bound = _lower_bounds(table)

    def slot_table(self, informed: int) -> tuple[np.ndarray, np.ndarray]:
        """Shortest slot informing at least each subset of the uninformed receivers.

        Returns ``(dep, H)``: ``H[y]`` for the local mask ``y`` whose global
        receivers are ``dep[y]``.
        """
        rest = _bits_of(self.full & ~informed, self.n)
        dep = _deposit(rest)
        times = self.table.time
        H = times[0][dep]
        ys, as_, starts = _submask_pairs(len(rest))
        for b in _bits_of(informed, self.n):
            G = times[b + 1][dep]
            if np.isinf(G[1:]).all():
                continue
            H = np.minimum.reduceat(np.maximum(H[as_], G[ys ^ as_]), starts)
        return dep, H

    def run(self, budget: SolverBudget) -> tuple[float, list[tuple[int, int]], bool, int]:
        n, full = self.n, self.full
        h = self.lower_bound
        best_g = np.full(1 << n, np.inf)
        best_g[0] = 0.0
        pred: dict[int, tuple[int, int]] = {}
        incumbent = math.inf
        incumbent_last: Optional[tuple[int, int]] = None
        heap = [(float(h[0]), 0.0, 0)]
        expanded = 0
        start = time.perf_counter()
        proven = True

        while heap:
            f, g, informed = heapq.heappop(heap)
            if g > best_g[informed]:
                continue
            if f >= incumbent:
                break
            if (budget.max_nodes is not None and expanded >= budget.max_nodes) or (
                budget.max_seconds is not None and time.perf_counter() - start > budget.max_seconds
            ):
                proven = False
                break
            expanded += 1
            dep, H = self.slot_table(informed)
            cost = g + H[1:]
            nxt = informed | dep[1:]
            finite = np.isfinite(cost)
            done = finite & (nxt == full)
            if done.any():
                i = int(np.flatnonzero(done)[np.argmin(cost[done])])
                if cost[i] < incumbent:
                    incumbent = float(cost[i])
                    incumbent_last = (informed, int(dep[i + 1]))
            est = cost + h[nxt]
            cand = np.flatnonzero(finite & ~done & (cost < best_g[nxt]) & (est < incumbent))
            if len(cand):
                best_g[nxt[cand]] = cost[cand]
                for i in cand.tolist():
                    j = int(nxt[i])
                    pred[j] = (informed, int(dep[i + 1]))
                    heapq.heappush(heap, (float(est[i]), float(cost[i]), j))

        if incumbent_last is None:
            path = self.greedy_path(0)
            return _path_cost(self, path), path, False, expanded
        path = [incumbent_last]
        node = incumbent_last[0]
        while node != 0:
            path.append(pred[node])
            node = pred[node][0]
        path.reverse()
        return incumbent, path, proven, expanded

    def greedy_path(self, informed: int) -> list[tuple[int, int]]:
        """Fallback: repeatedly run the slot with the most new nodes per second."""
        path = []
        while informed != self.full:
            dep, H = self.slot_table(informed)
            counts = _popcount(dep[1:])
            with np.errstate(divide="ignore"):
                score = np.where(np.isfinite(H[1:]), counts / H[1:], -np.inf)
            i = int(np.argmax(score))
            if not np.isfinite(H[i + 1]):
                raise UnreachableError(_bits_to_nodes(self.full & ~informed))
            path.append((informed, int(dep[i + 1])))
            informed |= int(dep[i + 1])
        return path


def _bits_to_nodes(mask: int) -> list[int]:
    return [b + 1 for b in range(mask.bit_length()) if mask >> b & 1]


def _path_cost(search: _Search, path: list[tuple[int, int]]) -> float:
    total = 0.0
    for informed, new in path:
        dep, H = search.slot_table(informed)
        total += float(H[int(np.flatnonzero(dep == new)[0])])
    return total


def _lower_bounds(table: ServiceTable) -> np.ndarray:
    """Admissible bound on the remaining time for every informed set.

    Two bounds, both valid: every uninformed node is reached in some slot
    lasting at least its cheapest single link from any node; and the next
    slot lasts at least the cheapest single link from a current holder.
    """
    n, size = table.n, 1 << table.n
    t1 = table.single_link()
    cheapest = t1.min(axis=0)
    worst_rest = np.zeros(size)
    for b in range(n):
        worst_rest[1 << b : 2 << b] = np.maximum(worst_rest[: 1 << b], cheapest[b])
    from_holders = np.empty((size, n))
    from_holders[0] = t1[0]
    for b in range(n):
        from_holders[1 << b : 2 << b] = np.minimum(from_holders[: 1 << b], t1[b + 1])
    masks = np.arange(size)
    informed_bit = (masks[:, None] >> np.arange(n)[None, :]) & 1
    next_slot = np.where(informed_bit == 1, np.inf, from_holders).min(axis=1)
    next_slot[size - 1] = 0.0
    bound = np.maximum(worst_rest[(size - 1) ^ masks], next_slot)
    bound.setflags(write=False)
    return bound


def lower_bound(scenario: Scenario, informed: set[int], rx_mode: str = "omni") -> float:
    """The search's pruning bound for a set of informed receivers."""
    table = ServiceTable(scenario, rx_mode)
    mask = sum(1 << (u - 1) for u in informed if u != 0)
    return float(_lower_bounds(table)[mask])


def _assign_parents(search: _Search, informed: int, new: int) -> list[tuple[int, int]]:
    """Split the newly informed set among holders.

    Minimises the slot length; ties go to the split with the least total
    airtime, then to the first found.
    """
    n = search.n
    times = search.table.time
    targets = _bits_of(new, n)
    dep = _deposit(targets)
    pns = [0] + [b + 1 for b in _bits_of(informed, n)]
    ys, as_, starts = _submask_pairs(len(targets))
    stages_max = [times[pns[0]][dep]]
    stages_sum = [times[pns[0]][dep].copy()]
    for p in pns[1:]:
        G = times[p][dep]
        prev_max, prev_sum = stages_max[-1], stages_sum[-1]
        mx = np.maximum(prev_max[as_], G[ys ^ as_])
        sm = prev_sum[as_] + G[ys ^ as_]
        best_mx = np.minimum.reduceat(mx, starts)
        sm = np.where(mx == best_mx[ys], sm, np.inf)
        stages_max.append(best_mx)
        stages_sum.append(np.minimum.reduceat(sm, starts))

    out = []
    local = (1 << len(targets)) - 1
    for k in range(len(pns) - 1, 0, -1):
        G = times[pns[k]][dep]
        prev_max, prev_sum = stages_max[k - 1], stages_sum[k - 1]
        goal = (stages_max[k][local], stages_sum[k][local])
        sub = local
        choice = None
        while True:
            rest = local ^ sub
            cand = (max(prev_max[rest], G[sub]), prev_sum[rest] + G[sub])
            if cand[0] == goal[0] and cand[1] == goal[1]:
                choice = sub
                break
            if sub == 0:
                break
            sub = (sub - 1) & local
        if choice is None:
            raise AssertionError("parent assignment backtrack failed")
        if choice:
            out.append((pns[k], int(dep[choice])))
        local ^= choice
    if local:
        out.append((0, int(dep[local])))
    return sorted(out)


def solve_exact(
    scenario: Scenario,
    rx_mode: str = "omni",
    budget: SolverBudget = SolverBudget(),
    w: Optional[float] = None,
    cap: int = MAX_EXACT_N,
) -> OptimalResult:
    """Optimal schedule, or the best one found if the budget runs out."""
    if w is not None:
        scenario = scenario.with_beamwidth(w)
    if scenario.n > cap:
        raise SizeError(f"exact solver limited to n <= {cap}, got {scenario.n}")
    lost = unreachable_nodes(scenario, rx_mode)
    if lost:
        raise UnreachableError(lost)
    search = _Search(ServiceTable(scenario, rx_mode))
    total, path, proven, expanded = search.run(budget)

    slots = []
    for informed, new in path:
        slot = [
            make_transmission(scenario, pn, _bits_to_nodes(mask), rx_mode)
            for pn, mask in _assign_parents(search, informed, new)
        ]
        slots.append(tuple(slot))
    schedule = Schedule(
        slots=tuple(slots),
        algorithm="exact",
        meta={"proof_of_optimality": proven, "expanded": expanded},
    )
    return OptimalResult(
        schedule=schedule,
        completion_time_s=schedule.total_time_s,
        proof_of_optimality=proven,
        expanded=expanded,
    )


def optimal_cost_to_go(scenario: Scenario, rx_mode: str = "omni") -> np.ndarray:
    """Exact remaining time from every informed set, by backward induction.

    Used to check that the search bound never overestimates.
    """
    search = _Search(ServiceTable(scenario, rx_mode))
    size = 1 << search.n
    value = np.full(size, np.inf)
    value[size - 1] = 0.0
    for informed in range(size - 2, -1, -1):
        dep, H = search.slot_table(informed)
        value[informed] = np.min(H[1:] + value[informed | dep[1:]])
    return value
