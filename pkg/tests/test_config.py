import json

import pytest

from mmcast.config import ConfigError, ExperimentConfig, RadioParams, load_config, lobe_count_for


def test_lobe_count():
    assert lobe_count_for(45) == 8
    assert lobe_count_for(15.0) == 24
    assert lobe_count_for(360) == 1


@pytest.mark.parametrize("w", [0, -10, 50, 361, 7.5 + 1e-3])
def test_lobe_count_rejects(w):
    with pytest.raises(ConfigError):
        lobe_count_for(w)


def test_radio_defaults():
    r = RadioParams()
    assert r.carrier_ghz == 73.0
    assert r.max_rate_bps == 4.6e9
    assert RadioParams.from_dict(r.to_dict()) == r


@pytest.mark.parametrize("field,value", [("bandwidth_hz", 0), ("frame_bits", -1), ("rho_max_bps_hz", 0), ("sigma_db", -0.1)])
def test_radio_rejects(field, value):
    with pytest.raises(ConfigError):
        RadioParams(**{field: value})


def test_experiment_validation():
    with pytest.raises(ConfigError):
        ExperimentConfig(replications=0)
    with pytest.raises(ConfigError):
        ExperimentConfig(w_values_deg=(50,))
    with pytest.raises(ConfigError):
        ExperimentConfig(algorithms=("exact",), n_values=(13,))
    with pytest.raises(ConfigError):
        ExperimentConfig(algorithms=("magic",))
    with pytest.raises(ConfigError):
        ExperimentConfig(rx_mode="sideways")
    ExperimentConfig(algorithms=("mmdimu",), n_values=(100,))


def test_load_config_roundtrip(tmp_path):
    cfg = ExperimentConfig(algorithms=("mmdimu", "oms"), n_values=(2, 3), replications=3, base_seed=7)
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg.to_dict()))
    assert load_config(path) == cfg


def test_load_config_errors(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ConfigError):
        load_config(bad)
    bad.write_text(json.dumps({"replications": 2, "colour": "red"}))
    with pytest.raises(ConfigError):
        load_config(bad)
