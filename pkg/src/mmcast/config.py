"""Radio parameters and experiment configuration."""

from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

ALGORITHMS = ("exact", "mmdimu", "oms", "fhomb", "adapt")
RX_MODES = ("omni", "directional")
MAX_EXACT_N = 12


class ConfigError(ValueError):
    """Raised for invalid scenario or experiment parameters."""


def lobe_count_for(w_deg: float) -> int:
    """Number of equal lobes for beamwidth ``w_deg``; ``w_deg`` must divide 360."""
    if not (0 < w_deg <= 360):
        raise ConfigError(f"beamwidth must be in (0, 360], got {w_deg}")
    count = round(360.0 / w_deg)
    if count < 1 or not math.isclose(count * w_deg, 360.0, rel_tol=0, abs_tol=1e-9):
        raise ConfigError(f"beamwidth {w_deg} does not divide 360")
    return count


@dataclass(frozen=True)
class RadioParams:
    """Link-budget constants. Defaults are the 73 GHz outdoor setup."""

    carrier_ghz: float = 73.0
    bandwidth_hz: float = 1e9
    tx_power_dbm: float = 14.9
    noise_figure_pn_db: float = 4.0
    noise_figure_cn_db: float = 7.0
    thermal_noise_dbm_hz: float = -174.0
    alpha_db: float = 32.4
    beta: float = 2.0
    sigma_db: float = 1.9
    rho_max_bps_hz: float = 4.6
    delta_db: float = 1.6
    frame_bits: float = 1e9
    snr_floor_db: Optional[float] = None

    def __post_init__(self) -> None:
        if self.bandwidth_hz <= 0 or self.frame_bits <= 0:
            raise ConfigError("bandwidth_hz and frame_bits must be positive")
        if self.rho_max_bps_hz <= 0:
            raise ConfigError("rho_max_bps_hz must be positive")
        if self.sigma_db < 0:
            raise ConfigError("sigma_db must be non-negative")
        if self.carrier_ghz <= 0:
            raise ConfigError("carrier_ghz must be positive")

    @property
    def max_rate_bps(self) -> float:
        return self.bandwidth_hz * self.rho_max_bps_hz

    def to_dict(self) -> dict[str, Any]:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "RadioParams":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown radio keys: {sorted(unknown)}")
        return cls(**data)


@dataclass(frozen=True)
class ExperimentConfig:
    """One sweep over node counts and beamwidths.

    ``n`` and ``w_deg`` are the scenario parameters used by
    :func:`mmcast.topology.generate_scenario`; the harness fills them per cell.
    """

    algorithms: tuple[str, ...] = ALGORITHMS
    n_values: tuple[int, ...] = (2, 4, 6, 8, 10)
    w_values_deg: tuple[float, ...] = (45.0,)
    replications: int = 200
    base_seed: int = 0
    rx_mode: str = "omni"
    area_side: float = 200.0
    radio: RadioParams = field(default_factory=RadioParams)
    fhomb_slot_len_s: float = 0.1
    max_nodes: Optional[int] = None
    max_seconds: Optional[float] = None
    out_dir: str = "results"
    results_csv: str = "results.csv"
    summary_csv: str = "summary.csv"
    trace: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "algorithms", tuple(self.algorithms))
        object.__setattr__(self, "n_values", tuple(int(n) for n in self.n_values))
        object.__setattr__(self, "w_values_deg", tuple(float(w) for w in self.w_values_deg))
        bad = [a for a in self.algorithms if a not in ALGORITHMS]
        if bad or not self.algorithms:
            raise ConfigError(f"unknown algorithms {bad}; choose from {ALGORITHMS}")
        if not self.n_values or min(self.n_values) < 1:
            raise ConfigError("n_values must be non-empty and >= 1")
        if not self.w_values_deg:
            raise ConfigError("w_values_deg must be non-empty")
        for w in self.w_values_deg:
            lobe_count_for(w)
        if self.replications < 1:
            raise ConfigError("replications must be >= 1")
        if self.rx_mode not in RX_MODES:
            raise ConfigError(f"rx_mode must be one of {RX_MODES}")
        if self.area_side <= 0:
            raise ConfigError("area_side must be positive")
        if self.fhomb_slot_len_s <= 0:
            raise ConfigError("fhomb_slot_len_s must be positive")
        if "exact" in self.algorithms and max(self.n_values) > MAX_EXACT_N:
            raise ConfigError(f"exact solver limited to n <= {MAX_EXACT_N}")

    def to_dict(self) -> dict[str, Any]:
        data = dataclasses.asdict(self)
        data["algorithms"] = list(self.algorithms)
        data["n_values"] = list(self.n_values)
        data["w_values_deg"] = list(self.w_values_deg)
        return data

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "ExperimentConfig":
        data = dict(data)
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        if "radio" in data and not isinstance(data["radio"], RadioParams):
            data["radio"] = RadioParams.from_dict(data["radio"] or {})
        return cls(**data)


def load_config(path: str | Path) -> ExperimentConfig:
    with open(path, encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be an object")
    return ExperimentConfig.from_dict(data)
