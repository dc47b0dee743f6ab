import json

import pytest

from gromarket.config import PRESETS, ExperimentConfig, preset
from gromarket.payoff import ConfigError


@pytest.mark.parametrize("name", sorted(PRESETS))
def test_presets_round_trip(name):
    cfg = preset(name)
    again = ExperimentConfig.from_dict(json.loads(cfg.dumps()))
    assert again.to_dict() == cfg.to_dict()
    proc, rules, y0 = cfg.build()
    assert len(rules) == len(y0) >= 2


def base():
    return {"process": {"kind": "iid", "rate": 1.0,
                        "atoms": [{"payoff": [1.0], "prob": 1.0}]},
            "investors": [{"initial_wealth": 1.0, "strategy": {"kind": "gro"}},
                          {"initial_wealth": 1.0, "strategy": {"kind": "constant",
                                                               "weights": [0.5]}}]}


def test_validation_messages():
    d = base()
    d["process"]["atoms"] = [{"payoff": [1.0], "prob": 0.5}, {"payoff": [2.0], "prob": 0.3}]
    with pytest.raises(ConfigError, match="probabilities must sum to 1"):
        ExperimentConfig.from_dict(d)

    d = base()
    d["investors"] = d["investors"][:1]
    with pytest.raises(ConfigError, match="at least 2"):
        ExperimentConfig.from_dict(d)
    d["diagnostic"] = True
    ExperimentConfig.from_dict(d)

    d = base()
    d["extra"] = 1
    with pytest.raises(ConfigError, match="unknown"):
        ExperimentConfig.from_dict(d)

    d = base()
    d["investors"][1]["strategy"]["weights"] = [1.5]
    with pytest.raises(ConfigError, match=r"investors\[1\]"):
        ExperimentConfig.from_dict(d)

    d = base()
    d["horizon"] = 0
    with pytest.raises(ConfigError, match="horizon"):
        ExperimentConfig.from_dict(d)


def test_load_reports_json_position(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text('{\n  "process": ,\n}')
    with pytest.raises(ConfigError, match=r"bad.json:2:"):
        ExperimentConfig.load(p)


def test_thresholds_merge_with_defaults():
    d = base()
    d["thresholds"] = {"drift_tol": 1e-8}
    cfg = ExperimentConfig.from_dict(d)
    assert cfg.thresholds["drift_tol"] == 1e-8
    assert cfg.thresholds["dominance_r"] == 0.99
