"""Experiment configuration: a single versioned JSON document."""

from __future__ import annotations

import copy
import json
from dataclasses import dataclass, field

from .payoff import ConfigError, process_from_dict
from .strategies import rule_from_dict

SCHEMA_VERSION = 1

DEFAULT_THRESHOLDS = {
    "drift_tol": 1e-9,
    "dominance_r": 0.99,
    "dominance_fraction": 63 / 64,
    "survival_floor": 1e-6,
    "growth_factor": 10.0,
    "ruin_fraction": 0.01,
}


@dataclass
class ExperimentConfig:
    process: dict
    investors: list
    horizon: int = 100
    seed: int = 0
    paths: int = 1
    out_dir: str = "out"
    name: str = "experiment"
    diagnostic: bool = False
    thresholds: dict = field(default_factory=lambda: dict(DEFAULT_THRESHOLDS))
    schema_version: int = SCHEMA_VERSION

    def __post_init__(self):
        if self.schema_version != SCHEMA_VERSION:
            raise ConfigError(f"schema_version: unsupported version {self.schema_version!r}")
        if not isinstance(self.investors, list) or not self.investors:
            raise ConfigError("investors: must be a non-empty list")
        if len(self.investors) < 2 and not self.diagnostic:
            raise ConfigError("investors: at least 2 investors required (set diagnostic for M=1)")
        for i, inv in enumerate(self.investors):
            try:
                y = float(inv["initial_wealth"])
                inv["strategy"]["kind"]
            except (KeyError, TypeError, ValueError):
                raise ConfigError(f"investors[{i}]: need initial_wealth and strategy.kind") from None
            if not y > 0:
                raise ConfigError(f"investors[{i}].initial_wealth: must be positive")
        for key in ("horizon", "paths"):
            v = getattr(self, key)
            if not isinstance(v, int) or v < 1:
                raise ConfigError(f"{key}: must be a positive integer")
        if not isinstance(self.seed, int) or self.seed < 0:
            raise ConfigError("seed: must be a non-negative integer")
        self.thresholds = {**DEFAULT_THRESHOLDS, **self.thresholds}
        self.build()

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        d = copy.deepcopy(d)
        known = set(cls.__dataclass_fields__)
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown config fields: {sorted(unknown)}")
        if "process" not in d or "investors" not in d:
            raise ConfigError("config needs 'process' and 'investors'")
        return cls(**d)

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        with open(path) as fh:
            text = fh.read()
        try:
            d = json.loads(text)
        except json.JSONDecodeError as e:
            raise ConfigError(f"{path}:{e.lineno}:{e.colno}: {e.msg}") from None
        if not isinstance(d, dict):
            raise ConfigError(f"{path}: top level must be a JSON object")
        return cls.from_dict(d)

    def to_dict(self) -> dict:
        return {k: copy.deepcopy(getattr(self, k)) for k in self.__dataclass_fields__}

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def build(self):
        """Instantiate ``(process, rules, initial_wealth)``."""
        try:
            proc = process_from_dict(self.process)
        except ConfigError as e:
            raise ConfigError(f"process: {e}") from None
        rules = []
        for i, inv in enumerate(self.investors):
            try:
                rules.append(rule_from_dict(inv["strategy"], proc))
            except (ConfigError, KeyError, TypeError, ValueError) as e:
                raise ConfigError(f"investors[{i}].strategy: {e}") from None
        return proc, rules, [float(inv["initial_wealth"]) for inv in self.investors]


PRESETS: dict[str, dict] = {
    "amir-decay": {
        "name": "amir-decay",
        "process": {"kind": "wealth_proportional", "fraction": 0.5, "rate": 1.0},
        "investors": [
            {"initial_wealth": 1.0, "strategy": {"kind": "gro"}},
            {"initial_wealth": 1.0, "strategy": {"kind": "schedule", "formula": "example6-opponent"}},
        ],
        "horizon": 10000,
    },
    "all-gro": {
        "name": "all-gro",
        "process": {"kind": "markov", "initial_state": "calm",
                    "rates": {"calm": 1.02, "storm": 0.0},
                    "transitions": {
                        "calm": [{"next": "calm", "payoff": [1.0, 0.5], "prob": 0.6},
                                 {"next": "storm", "payoff": [0.0, 1.5], "prob": 0.4}],
                        "storm": [{"next": "calm", "payoff": [2.0, 0.2], "prob": 0.5},
                                  {"next": "storm", "payoff": [0.3, 0.3], "prob": 0.5}]}},
        "investors": [{"initial_wealth": w, "strategy": {"kind": "gro"}} for w in (1.0, 2.0, 0.5)],
        "horizon": 1000,
    },
    "dominance": {
        "name": "dominance",
        "process": {"kind": "iid", "rate": 1.0,
                    "atoms": [{"payoff": [0.5], "prob": 0.5}, {"payoff": [2.0], "prob": 0.5}]},
        "investors": [
            {"initial_wealth": 1.0, "strategy": {"kind": "gro"}},
            {"initial_wealth": 1.0, "strategy": {"kind": "gro_shift", "eps": 0.2}},
        ],
        "horizon": 5000,
        "paths": 64,
    },
    "constant-payoff": {
        "name": "constant-payoff",
        "process": {"kind": "iid", "rate": 1.0, "atoms": [{"payoff": [2.0], "prob": 1.0}]},
        "investors": [{"initial_wealth": 0.5, "strategy": {"kind": "gro"}},
                      {"initial_wealth": 0.5, "strategy": {"kind": "gro"}}],
        "horizon": 10000,
    },
    "randomized-payoff": {
        "name": "randomized-payoff",
        "process": {"kind": "iid", "rate": 1.0,
                    "atoms": [{"payoff": [0.5], "prob": 0.5}, {"payoff": [2.0], "prob": 0.5}]},
        "investors": [{"initial_wealth": 0.5, "strategy": {"kind": "gro"}},
                      {"initial_wealth": 0.5, "strategy": {"kind": "gro"}}],
        "horizon": 10000,
        "paths": 32,
    },
}


def preset(name: str) -> ExperimentConfig:
    try:
        return ExperimentConfig.from_dict(PRESETS[name])
    except KeyError:
        raise ConfigError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None
