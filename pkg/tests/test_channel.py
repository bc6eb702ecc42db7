import math

import numpy as np
import pytest

from mmcast import channel
from mmcast.config import RadioParams
from mmcast.topology import generate_scenario, scenario_from_positions

RADIO = RadioParams()


def test_path_loss_examples():
    assert channel.path_loss_db(1.0, RADIO) == pytest.approx(69.666, abs=1e-3)
    assert channel.path_loss_db(10.0, RADIO) - channel.path_loss_db(1.0, RADIO) == pytest.approx(20.0, abs=1e-12)
    assert channel.path_loss_db(100.0, RADIO, 1.9) - channel.path_loss_db(100.0, RADIO) == pytest.approx(1.9, abs=1e-12)
    with pytest.raises(ValueError):
        channel.path_loss_db(0.0, RADIO)


def test_gain_examples():
    assert channel.tx_antenna_gain_db(360.0) == pytest.approx(0.0, abs=1e-12)
    assert channel.tx_antenna_gain_db(90.0) == pytest.approx(8.34, abs=5e-3)
    ws = [360, 180, 90, 45, 22.5, 15, 7.5]
    gains = [channel.tx_antenna_gain_db(w) for w in ws]
    assert all(a < b for a, b in zip(gains, gains[1:]))
    for bad in (0, -5, 400):
        with pytest.raises(ValueError):
            channel.tx_antenna_gain_db(bad)


def test_noise_power():
    assert channel.noise_power_dbm(RADIO) == pytest.approx(-77.0, abs=1e-9)


def _unit_scenario(w=360.0):
    # one metre apart, zero shadowing; w=360 gives 0 dB transmit gain
    return scenario_from_positions([(0.0, 0.0), (1.0, 0.0), (0.0, 5.0)], w)


def test_snr_hand_chain():
    s = _unit_scenario()
    assert channel.snr_db(s, 0, 1) == pytest.approx(22.234, abs=0.01)
    two = channel.snr_db(s, 0, 1, active_lobe_count=2)
    assert channel.snr_db(s, 0, 1) - two == pytest.approx(10 * math.log10(2), abs=1e-12)
    with pytest.raises(ValueError):
        channel.snr_db(s, 1, 1)


def test_directional_receive_gain():
    s = _unit_scenario(90.0)
    diff = channel.snr_db(s, 0, 1, rx_mode="directional") - channel.snr_db(s, 0, 1)
    assert diff == pytest.approx(channel.tx_antenna_gain_db(90.0), abs=1e-12)
    assert diff == pytest.approx(8.34, abs=5e-3)


def test_rate_examples():
    se = math.log2(1 + 10 ** (0.1 * (22.234 - 1.6)))
    assert se == pytest.approx(6.87, abs=0.01)
    assert channel.rate_bps(22.234, RADIO) == 4.6e9
    assert channel.rate_bps(1.6, RADIO) == pytest.approx(1e9, rel=1e-12)
    assert channel.rate_bps(-np.inf, RADIO) == 0.0
    assert channel.rate_bps(-300.0, RADIO) < 1e-20
    arr = channel.rate_bps(np.array([-np.inf, 1.6, 22.234]), RADIO)
    assert arr.tolist() == [0.0, pytest.approx(1e9), 4.6e9]


def test_transmission_time_examples():
    s = _unit_scenario()
    t, r = channel.transmission_time(s, 0, [1])
    assert r == 4.6e9
    assert t == pytest.approx(0.2174, abs=1e-4)

    s = scenario_from_positions([(0.0, 0.0), (40.0, 1.0), (-10.0, 1.0)], 45.0)
    snr = channel.single_lobe_snr_matrix(s)[0]
    assert snr[1] < snr[2]
    t, r = channel.transmission_time(s, 0, [2, 1])
    assert r == channel.rate_bps(snr[1] - 10 * math.log10(2), s.radio)
    assert (t, r) == channel.transmission_time(s, 0, [1, 2])


def test_transmission_time_errors():
    s = scenario_from_positions([(0.0, 0.0), (10.0, 1.0), (20.0, 2.0)], 45.0)
    with pytest.raises(channel.FeasibilityError):
        channel.transmission_time(s, 0, [1, 2])
    with pytest.raises(channel.FeasibilityError):
        channel.transmission_time(s, 1, [1])
    with pytest.raises(ValueError):
        channel.transmission_time(s, 0, [])


def test_extra_lobe_never_faster():
    for seed in range(10):
        s = generate_scenario(6, 45.0, seed)
        lobes = s.lobes[0]
        by_lobe = {}
        for u in range(1, s.n + 1):
            by_lobe.setdefault(int(lobes[u]), u)
        reps = list(by_lobe.values())
        for k in range(1, len(reps)):
            assert channel.transmission_time(s, 0, reps[: k + 1])[0] >= channel.transmission_time(s, 0, reps[:k])[0]


def test_matrix_matches_scalar_and_is_capped():
    s = generate_scenario(8, 30.0, 5)
    M = channel.single_lobe_snr_matrix(s)
    for m in s.nodes:
        for n in s.nodes:
            if m == n:
                assert M[m, n] == -np.inf
            else:
                assert M[m, n] == pytest.approx(channel.snr_db(s, m, n), abs=1e-9)
    rates = channel.rate_bps(M, s.radio)
    assert rates.max() <= s.radio.max_rate_bps


def test_snr_decreases_with_distance():
    s = scenario_from_positions([(0, 0), (5, 0), (50, 0), (500, 0)], 45.0)
    snr = channel.single_lobe_snr_matrix(s)[0]
    assert snr[1] > snr[2] > snr[3]


def test_link_budget():
    s = _unit_scenario()
    lb = channel.link_budget(s, 0, 1)
    assert lb.distance_m == 1.0
    assert lb.path_loss_db == pytest.approx(69.666, abs=1e-3)
    assert lb.rate_bps == 4.6e9
    assert lb.tx_gain_db == pytest.approx(0.0, abs=1e-12) and lb.rx_gain_db == 0.0
