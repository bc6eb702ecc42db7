"""Scenario generation and the geometry-derived combinatorial structures.

Node 0 is the source and sits at the centre of the square; nodes ``1..n``
are receivers. Each node splits the plane into ``lobe_count`` equal sectors
numbered from 1, counterclockwise from the +x axis, with half-open
intervals ``[(l-1)w, lw)``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Any, Iterable, Optional

import numpy as np

from .config import ConfigError, RadioParams, lobe_count_for

TARGET_MATRIX_CAP = 16


class SizeError(ValueError):
    """Problem size beyond what a dense construction supports."""


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Scenario:
    """Immutable world state shared by every scheduler run on it."""

    n: int
    positions: np.ndarray
    area_side: float
    lobe_count: int
    shadowing_db: np.ndarray
    radio: RadioParams = field(default_factory=RadioParams)
    seed: int = 0
    blocked: frozenset = frozenset()
    _cache: dict = field(default_factory=dict, init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "positions", _frozen(self.positions))
        object.__setattr__(self, "shadowing_db", _frozen(self.shadowing_db))
        blocked = frozenset(tuple(sorted((int(a), int(b)))) for a, b in self.blocked)
        object.__setattr__(self, "blocked", blocked)
        if self.n < 1:
            raise ConfigError("scenario needs at least one receiver")
        if self.lobe_count < 1:
            raise ConfigError("lobe_count must be >= 1")
        if self.positions.shape != (self.n + 1, 2):
            raise ConfigError(f"positions must have shape ({self.n + 1}, 2)")
        if self.shadowing_db.shape != (self.n + 1, self.n + 1):
            raise ConfigError("shadowing matrix has the wrong shape")
        if not np.array_equal(self.shadowing_db, self.shadowing_db.T):
            raise ConfigError("shadowing matrix must be symmetric")
        if np.any(np.diag(self.shadowing_db) != 0):
            raise ConfigError("shadowing diagonal must be zero")
        if len(np.unique(self.positions, axis=0)) != self.n + 1:
            raise ConfigError("two nodes share a position")

    @property
    def beamwidth_deg(self) -> float:
        return 360.0 / self.lobe_count

    @property
    def nodes(self) -> range:
        return range(self.n + 1)

    @cached_property
    def distances(self) -> np.ndarray:
        diff = self.positions[:, None, :] - self.positions[None, :, :]
        d = np.hypot(diff[..., 0], diff[..., 1])
        d.setflags(write=False)
        return d

    @cached_property
    def bearings_deg(self) -> np.ndarray:
        """``bearings_deg[m, n]``: direction of ``n`` seen from ``m`` in [0, 360)."""
        diff = self.positions[None, :, :] - self.positions[:, None, :]
        b = np.degrees(np.arctan2(diff[..., 1], diff[..., 0])) % 360.0
        b[b >= 360.0] = 0.0
        b.setflags(write=False)
        return b

    @cached_property
    def lobes(self) -> np.ndarray:
        """``lobes[m, n]``: 1-based lobe of node ``m`` containing ``n`` (0 on the diagonal)."""
        idx = np.floor(self.bearings_deg / self.beamwidth_deg).astype(np.int64)
        idx = np.clip(idx, 0, self.lobe_count - 1) + 1
        np.fill_diagonal(idx, 0)
        idx.setflags(write=False)
        return idx

    def is_blocked(self, a: int, b: int) -> bool:
        return (min(a, b), max(a, b)) in self.blocked

    def with_beamwidth(self, w_deg: float) -> "Scenario":
        """Same nodes and shadowing under a different lobe grid."""
        return Scenario(
            n=self.n,
            positions=self.positions,
            area_side=self.area_side,
            lobe_count=lobe_count_for(w_deg),
            shadowing_db=self.shadowing_db,
            radio=self.radio,
            seed=self.seed,
            blocked=self.blocked,
        )

    def with_radio(self, radio: RadioParams) -> "Scenario":
        return Scenario(
            n=self.n,
            positions=self.positions,
            area_side=self.area_side,
            lobe_count=self.lobe_count,
            shadowing_db=self.shadowing_db,
            radio=radio,
            seed=self.seed,
            blocked=self.blocked,
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "seed": int(self.seed),
            "n": int(self.n),
            "area_side_m": float(self.area_side),
            "lobe_count": int(self.lobe_count),
            "positions": self.positions.tolist(),
            "shadowing": self.shadowing_db.tolist(),
            "radio": self.radio.to_dict(),
            "blocked": [list(p) for p in sorted(self.blocked)],
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "Scenario":
        return cls(
            n=int(data["n"]),
            positions=np.asarray(data["positions"], dtype=float),
            area_side=float(data["area_side_m"]),
            lobe_count=int(data["lobe_count"]),
            shadowing_db=np.asarray(data["shadowing"], dtype=float),
            radio=RadioParams.from_dict(data.get("radio", {})),
            seed=int(data.get("seed", 0)),
            blocked=frozenset(tuple(p) for p in data.get("blocked", [])),
        )

    def same_as(self, other: "Scenario") -> bool:
        return self.to_dict() == other.to_dict()


def generate_scenario(
    n: int,
    w_deg: float,
    seed: int,
    *,
    area_side: float = 200.0,
    radio: Optional[RadioParams] = None,
) -> Scenario:
    """Uniform receivers in a square around a centred source.

    Shadowing is drawn once per unordered pair and mirrored, so links are
    reciprocal.
    """
    if n < 1:
        raise ConfigError("n must be >= 1")
    if area_side <= 0:
        raise ConfigError("area_side must be positive")
    lobe_count = lobe_count_for(w_deg)
    radio = radio or RadioParams()
    rng = np.random.default_rng(seed)
    positions = np.empty((n + 1, 2))
    positions[0] = (area_side / 2.0, area_side / 2.0)
    positions[1:] = rng.uniform(0.0, area_side, size=(n, 2))
    iu = np.triu_indices(n + 1, k=1)
    shadow = np.zeros((n + 1, n + 1))
    shadow[iu] = rng.normal(0.0, radio.sigma_db, size=len(iu[0]))
    shadow = shadow + shadow.T
    return Scenario(
        n=n,
        positions=positions,
        area_side=area_side,
        lobe_count=lobe_count,
        shadowing_db=shadow,
        radio=radio,
        seed=seed,
    )


def scenario_from_positions(
    positions: Iterable[tuple[float, float]],
    w_deg: float,
    *,
    radio: Optional[RadioParams] = None,
    shadowing_db: Optional[np.ndarray] = None,
    area_side: Optional[float] = None,
    blocked: Iterable[tuple[int, int]] = (),
    seed: int = 0,
) -> Scenario:
    """Hand-built scenario; the first position is the source."""
    pos = np.asarray(list(positions), dtype=float)
    n = len(pos) - 1
    if shadowing_db is None:
        shadowing_db = np.zeros((n + 1, n + 1))
    if area_side is None:
        area_side = float(np.max(np.abs(pos))) * 2 or 1.0
    return Scenario(
        n=n,
        positions=pos,
        area_side=area_side,
        lobe_count=lobe_count_for(w_deg),
        shadowing_db=shadowing_db,
        radio=radio or RadioParams(),
        seed=seed,
        blocked=frozenset(tuple(b) for b in blocked),
    )


def save_scenario(scenario: Scenario, path: str | Path) -> None:
    Path(path).write_text(json.dumps(scenario.to_dict(), indent=1), encoding="utf-8")


def load_scenario(path: str | Path) -> Scenario:
    return Scenario.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def lobe_of(scenario: Scenario, m: int, n: int) -> int:
    if m == n:
        raise ValueError("a node has no lobe towards itself")
    return int(scenario.lobes[m, n])


@dataclass(frozen=True)
class LobeGeometry:
    """``membership[m][l]`` is the set of nodes node ``m`` reaches through lobe ``l``."""

    lobe_count: int
    membership: tuple[dict[int, frozenset[int]], ...]

    def lobe_members(self, m: int, lobe: int) -> frozenset[int]:
        return self.membership[m].get(lobe, frozenset())


def linkable(scenario: Scenario, rx_mode: str = "omni") -> np.ndarray:
    """Boolean matrix of usable links: not blocked and above the SNR floor, if any."""
    key = ("linkable", rx_mode)
    if key not in scenario._cache:
        from .channel import single_lobe_snr_matrix

        ok = np.ones((scenario.n + 1, scenario.n + 1), dtype=bool)
        np.fill_diagonal(ok, False)
        for a, b in scenario.blocked:
            ok[a, b] = ok[b, a] = False
        floor = scenario.radio.snr_floor_db
        if floor is not None:
            ok &= single_lobe_snr_matrix(scenario, rx_mode) >= floor
        ok.setflags(write=False)
        scenario._cache[key] = ok
    return scenario._cache[key]


def lobe_geometry(scenario: Scenario, rx_mode: str = "omni") -> LobeGeometry:
    ok = linkable(scenario, rx_mode)
    membership = []
    for m in scenario.nodes:
        lobes: dict[int, set[int]] = {}
        for n in scenario.nodes:
            if ok[m, n]:
                lobes.setdefault(int(scenario.lobes[m, n]), set()).add(n)
        membership.append({l: frozenset(v) for l, v in sorted(lobes.items())})
    return LobeGeometry(scenario.lobe_count, tuple(membership))


def build_target_matrix(n: int, cap: int = TARGET_MATRIX_CAP) -> np.ndarray:
    """Binary ``n x (2**n - 1)`` matrix whose column ``k`` (1-based) encodes the bits of ``k``.

    Row ``i`` (node ``i + 1``) of column ``k`` is bit ``i`` of ``k``, i.e. the
    reversed binary expansion.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if n > cap:
        raise SizeError(f"target matrix for n={n} exceeds cap {cap}")
    k = np.arange(1, 2**n, dtype=np.int64)
    rows = np.arange(n, dtype=np.int64)[:, None]
    return ((k[None, :] >> rows) & 1).astype(np.uint8)


def column_index(column: Iterable[int]) -> int:
    """Inverse of :func:`build_target_matrix`: the 1-based ``k`` of a column."""
    return sum(int(bit) << i for i, bit in enumerate(column))


def build_observation_matrix(scenario: Scenario, m: int, rx_mode: str = "omni") -> np.ndarray:
    """``N_m``: row ``n-1`` has a single 1 in the lobe of ``m`` that holds node ``n``."""
    ok = linkable(scenario, rx_mode)
    out = np.zeros((scenario.n, scenario.lobe_count), dtype=np.uint8)
    for n in range(1, scenario.n + 1):
        if ok[m, n]:
            out[n - 1, scenario.lobes[m, n] - 1] = 1
    return out


def build_cn_matrix(
    scenario: Scenario, m: int, rx_mode: str = "omni", cap: int = TARGET_MATRIX_CAP
) -> tuple[np.ndarray, np.ndarray]:
    """``C_m`` and the feasibility flag of every column of the target matrix.

    Column ``k`` covers each target plus every node in the same lobe whose
    SNR from ``m`` is at least the target's. Columns naming two targets in one
    lobe, ``m`` itself, or an unusable link are flagged infeasible and left
    all-zero.
    """
    from .channel import single_lobe_snr_matrix

    U = build_target_matrix(scenario.n, cap)
    snr = single_lobe_snr_matrix(scenario, rx_mode)[m]
    ok = linkable(scenario, rx_mode)[m]
    members: dict[int, list[int]] = {}
    for u in range(1, scenario.n + 1):
        if ok[u]:
            members.setdefault(int(scenario.lobes[m, u]), []).append(u)

    K = U.shape[1]
    C = np.zeros_like(U)
    feasible = np.zeros(K, dtype=bool)
    for col in range(K):
        targets = [i + 1 for i in np.flatnonzero(U[:, col])]
        if any(not ok[t] for t in targets):
            continue
        lobes_used = [int(scenario.lobes[m, t]) for t in targets]
        if len(set(lobes_used)) != len(lobes_used):
            continue
        feasible[col] = True
        for t, lobe in zip(targets, lobes_used):
            for u in members[lobe]:
                if snr[u] >= snr[t]:
                    C[u - 1, col] = 1
    return C, feasible


def bearing_deg(scenario: Scenario, m: int, n: int) -> float:
    return float(scenario.bearings_deg[m, n])


def angle_in_arc(angle: float, start: float, width: float) -> bool:
    """True if ``angle`` lies in the half-open arc ``[start, start + width)`` (degrees)."""
    if width >= 360.0:
        return True
    return (angle - start) % 360.0 < width


def rotate_positions(positions: np.ndarray, center: int, degrees: float) -> np.ndarray:
    """Rotate every position counterclockwise about node ``center``."""
    c, s = math.cos(math.radians(degrees)), math.sin(math.radians(degrees))
    origin = positions[center]
    rel = positions - origin
    out = np.empty_like(rel)
    out[:, 0] = c * rel[:, 0] - s * rel[:, 1]
    out[:, 1] = s * rel[:, 0] + c * rel[:, 1]
    return out + origin
