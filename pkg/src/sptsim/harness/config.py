"""Experiment configuration files.

A config is one YAML document::

    experiment: entropy          # entropy | resolved | teleport | classify-noise | oracle
    L: 4
    boundary: open               # open | periodic
    state: cluster               # cluster | trivial
    shots: 8192
    runs: 10
    seed: 2020
    noise: none                  # none, a mapping, or a noise YAML path (relative to this file)
    teleport:
      alpha: {start: 0.0, stop: 3.141592653589793, points: 21}   # or {values: [0.0, 0.6]}
      beta_mode: both            # plus | minus | both
      kind: symmetric            # symmetric | symmetry_breaking | none
      sign: 1
    symmetry:                    # optional, oracle experiment only
      elements: [e, a]
      table: [[e, a], [a, e]]
      characters: [[1, 1], [1, -1]]
      action: {a: Y1X2}
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Mapping

import numpy as np
import yaml

from ..circuits import INPUT_STATES, STATES, TELEPORT_KINDS
from ..noise import NoiseModel
from ..symmetry import BOUNDARIES

EXPERIMENTS = ("entropy", "resolved", "teleport", "classify-noise", "oracle")
BETA_MODES = ("plus", "minus", "both")


class ConfigError(ValueError):
    pass


@dataclass
class TeleportSettings:
    alpha_start: float = 0.0
    alpha_stop: float = math.pi
    alpha_points: int = 21
    beta_mode: str = "both"
    kind: str = "symmetric"
    sign: int = 1
    states: tuple[str, ...] = tuple(INPUT_STATES)
    alpha_values: tuple[float, ...] | None = None

    def alphas(self) -> list[float]:
        if self.alpha_values is not None:
            return [float(a) for a in self.alpha_values]
        return [float(a) for a in np.linspace(self.alpha_start, self.alpha_stop, self.alpha_points)]

    def beta_signs(self) -> list[int]:
        return {"plus": [1], "minus": [-1], "both": [1, -1]}[self.beta_mode]


@dataclass
class ExperimentConfig:
    experiment: str = "entropy"
    L: int = 4
    boundary: str = "open"
    state: str = "cluster"
    shots: int = 8192
    runs: int = 10
    seed: int = 2020
    noise: Any = None
    subsystem_sizes: list[int] | None = None
    teleport: TeleportSettings = field(default_factory=TeleportSettings)
    symmetry: dict | None = None

    def validate(self) -> "ExperimentConfig":
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"experiment must be one of {EXPERIMENTS}")
        if self.boundary not in BOUNDARIES:
            raise ConfigError(f"boundary must be one of {BOUNDARIES}")
        if self.state not in STATES:
            raise ConfigError(f"state must be one of {STATES}")
        if self.L < 2:
            raise ConfigError("L must be at least 2")
        if self.shots < 100:
            raise ConfigError("statistical outputs need at least 100 shots")
        if self.runs < 1:
            raise ConfigError("runs must be at least 1")
        t = self.teleport
        if not t.alphas():
            raise ConfigError("teleport alpha grid is empty")
        if t.beta_mode not in BETA_MODES:
            raise ConfigError(f"beta_mode must be one of {BETA_MODES}")
        if t.kind not in TELEPORT_KINDS:
            raise ConfigError(f"kind must be one of {TELEPORT_KINDS}")
        if t.sign not in (1, -1):
            raise ConfigError("sign must be +1 or -1")
        unknown = set(t.states) - set(INPUT_STATES)
        if unknown:
            raise ConfigError(f"unknown input states {sorted(unknown)}")
        for la in self.subsystem_sizes or []:
            if not 1 <= la <= self.L:
                raise ConfigError(f"subsystem size {la} outside 1..{self.L}")
        return self

    def sizes(self) -> list[int]:
        return list(self.subsystem_sizes or range(1, self.L + 1))

    def noise_model(self) -> NoiseModel | None:
        spec = self.noise_spec()
        return NoiseModel.from_config(spec) if spec else None

    def noise_spec(self) -> dict | None:
        if self.noise in (None, "none", ""):
            return None
        if isinstance(self.noise, Mapping):
            return dict(self.noise)
        return load_noise_file(self.noise)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["teleport"]["states"] = list(self.teleport.states)
        if self.teleport.alpha_values is not None:
            d["teleport"]["alpha_values"] = list(self.teleport.alpha_values)
        d["noise"] = self.noise_spec()
        return d

    @classmethod
    def from_mapping(cls, raw: Mapping) -> "ExperimentConfig":
        raw = dict(raw or {})
        tele = dict(raw.pop("teleport", None) or {})
        alpha = tele.pop("alpha", None) or {}
        settings = TeleportSettings(
            alpha_start=float(alpha.get("start", tele.pop("alpha_start", 0.0))),
            alpha_stop=float(alpha.get("stop", tele.pop("alpha_stop", math.pi))),
            alpha_points=int(alpha.get("points", tele.pop("alpha_points", 21))),
            beta_mode=tele.pop("beta_mode", "both"),
            kind=tele.pop("kind", "symmetric"),
            sign=int(tele.pop("sign", 1)),
            states=tuple(str(s) for s in tele.pop("states", INPUT_STATES)),
            alpha_values=tuple(float(a) for a in alpha["values"]) if "values" in alpha else None,
        )
        if tele:
            raise ConfigError(f"unknown teleport keys {sorted(tele)}")
        known = {f for f in cls.__dataclass_fields__ if f != "teleport"}
        extra = set(raw) - known
        if extra:
            raise ConfigError(f"unknown config keys {sorted(extra)}")
        cfg = cls(teleport=settings, **raw)
        cfg.L, cfg.shots, cfg.runs, cfg.seed = int(cfg.L), int(cfg.shots), int(cfg.runs), int(cfg.seed)
        return cfg.validate()


def load_noise_file(path) -> dict:
    try:
        data = yaml.safe_load(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read noise file {path}: {exc}") from exc
    if not isinstance(data, Mapping):
        raise ConfigError(f"noise file {path} is not a mapping")
    return dict(data.get("noise", data))


def load_config(path) -> ExperimentConfig:
    data = yaml.safe_load(Path(path).read_text()) or {}
    if not isinstance(data, Mapping):
        raise ConfigError(f"config file {path} is not a mapping")
    noise = data.get("noise")
    if isinstance(noise, str) and noise not in ("none", "") and not Path(noise).is_absolute():
        # noise files are looked up next to the config that names them
        data = {**data, "noise": str(Path(path).parent / noise)}
    return ExperimentConfig.from_mapping(data)
