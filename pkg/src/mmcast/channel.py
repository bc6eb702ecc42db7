"""Link budget: path loss, sector gains, SNR, Shannon rate and transmission time."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np

from .config import RadioParams
from .topology import Scenario


class FeasibilityError(ValueError):
    """A target set that the lobe structure cannot serve in one transmission."""


def path_loss_db(d: float, radio: RadioParams, shadow_db: float = 0.0) -> float:
    """Log-distance path loss ``alpha + 10 beta log10(d) + 20 log10(f_c) + shadow``."""
    if not d > 0:
        raise ValueError(f"distance must be positive, got {d}")
    return (
        radio.alpha_db
        + 10.0 * radio.beta * math.log10(d)
        + 20.0 * math.log10(radio.carrier_ghz)
        + shadow_db
    )


def tx_antenna_gain_db(w_deg: float) -> float:
    """Ideal cone gain ``2 / (1 - cos(w/2))`` of a sector ``w_deg`` wide, in dB."""
    if not (0 < w_deg <= 360):
        raise ValueError(f"beamwidth must be in (0, 360], got {w_deg}")
    return 10.0 * math.log10(2.0 / (1.0 - math.cos(math.radians(w_deg) / 2.0)))


def power_split_db(active_lobe_count: int) -> float:
    return 10.0 * math.log10(active_lobe_count)


def noise_power_dbm(radio: RadioParams) -> float:
    # receivers are CNs, so the CN noise figure applies
    return radio.thermal_noise_dbm_hz + 10.0 * math.log10(radio.bandwidth_hz) + radio.noise_figure_cn_db


def rx_gain_db(scenario: Scenario, rx_mode: str) -> float:
    if rx_mode == "omni":
        return 0.0
    if rx_mode == "directional":
        return tx_antenna_gain_db(scenario.beamwidth_deg)
    raise ValueError(f"unknown rx_mode {rx_mode!r}")


def snr_db(
    scenario: Scenario,
    m: int,
    n: int,
    active_lobe_count: int = 1,
    rx_mode: str = "omni",
    tx_beamwidth_deg: Optional[float] = None,
) -> float:
    """SNR at ``n`` of a transmission from ``m`` that splits power over the active lobes."""
    if m == n:
        raise ValueError("a node cannot transmit to itself")
    if active_lobe_count < 1:
        raise ValueError("active_lobe_count must be >= 1")
    radio = scenario.radio
    w = scenario.beamwidth_deg if tx_beamwidth_deg is None else tx_beamwidth_deg
    pl = path_loss_db(float(scenario.distances[m, n]), radio, float(scenario.shadowing_db[m, n]))
    return (
        radio.tx_power_dbm
        - power_split_db(active_lobe_count)
        + tx_antenna_gain_db(w)
        + rx_gain_db(scenario, rx_mode)
        - pl
        - noise_power_dbm(radio)
    )


def single_lobe_snr_matrix(scenario: Scenario, rx_mode: str = "omni") -> np.ndarray:
    """Full-power single-lobe SNR for every ordered pair; ``-inf`` on the diagonal."""
    key = ("snr", rx_mode)
    cached = scenario._cache.get(key)
    if cached is not None:
        return cached
    radio = scenario.radio
    d = scenario.distances.copy()
    np.fill_diagonal(d, 1.0)
    pl = (
        radio.alpha_db
        + 10.0 * radio.beta * np.log10(d)
        + 20.0 * math.log10(radio.carrier_ghz)
        + scenario.shadowing_db
    )
    snr = (
        radio.tx_power_dbm
        + tx_antenna_gain_db(scenario.beamwidth_deg)
        + rx_gain_db(scenario, rx_mode)
        - pl
        - noise_power_dbm(radio)
    )
    np.fill_diagonal(snr, -np.inf)
    snr.setflags(write=False)
    scenario._cache[key] = snr
    return snr


def rate_bps(snr, radio: RadioParams):
    """``W * min(log2(1 + 10**((snr - delta)/10)), rho_max)``; accepts scalars or arrays."""
    if np.ndim(snr) == 0:
        se = math.log2(1.0 + 10.0 ** (0.1 * (float(snr) - radio.delta_db))) if snr != -math.inf else 0.0
        return radio.bandwidth_hz * min(se, radio.rho_max_bps_hz)
    snr = np.asarray(snr, dtype=float)
    with np.errstate(over="ignore"):
        se = np.log2(1.0 + np.power(10.0, 0.1 * (snr - radio.delta_db)))
    return radio.bandwidth_hz * np.minimum(se, radio.rho_max_bps_hz)


def transmission_time(
    scenario: Scenario, m: int, targets: Iterable[int], rx_mode: str = "omni"
) -> tuple[float, float]:
    """Time to deliver one frame from ``m`` to the target set, and the rate used.

    Power is split equally across the lobes the targets occupy; the weakest
    target after the split sets the rate.
    """
    targets = sorted(set(targets))
    if not targets:
        raise ValueError("target set must be non-empty")
    lobes = [int(scenario.lobes[m, t]) for t in targets]
    if m in targets:
        raise FeasibilityError(f"node {m} cannot target itself")
    if len(set(lobes)) != len(lobes):
        raise FeasibilityError(f"two targets of node {m} share a lobe: {targets}")
    snr = single_lobe_snr_matrix(scenario, rx_mode)[m]
    worst = min(float(snr[t]) for t in targets) - power_split_db(len(lobes))
    rate = rate_bps(worst, scenario.radio)
    time = scenario.radio.frame_bits / rate if rate > 0 else math.inf
    return time, rate


@dataclass(frozen=True)
class LinkBudget:
    distance_m: float
    path_loss_db: float
    tx_gain_db: float
    rx_gain_db: float
    snr_db: float
    rate_bps: float


def link_budget(scenario: Scenario, m: int, n: int, rx_mode: str = "omni") -> LinkBudget:
    d = float(scenario.distances[m, n])
    gamma = snr_db(scenario, m, n, 1, rx_mode)
    return LinkBudget(
        distance_m=d,
        path_loss_db=path_loss_db(d, scenario.radio, float(scenario.shadowing_db[m, n])),
        tx_gain_db=tx_antenna_gain_db(scenario.beamwidth_deg),
        rx_gain_db=rx_gain_db(scenario, rx_mode),
        snr_db=gamma,
        rate_bps=rate_bps(gamma, scenario.radio),
    )
