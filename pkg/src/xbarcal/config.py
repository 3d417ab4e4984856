"""Experiment configuration loaded from JSON."""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass
from pathlib import Path

from .crossbar import CrossbarParams
from .devices import G_OFF, R_HRS, R_LRS, R_ON
from .errors import ConfigError


@dataclass(frozen=True)
class ExperimentConfig:
    rows: int = 4
    cols: int = 4
    r_lrs: float = R_LRS
    r_hrs: float = R_HRS
    r_on: float = R_ON
    g_off: float = G_OFF
    v_ref: float = 4.5
    v_d: float = 0.015
    v_calibref: float = 4.5
    eta: float = 0.25
    sigma_os: float = 1e-3
    noise_sigma: float = 200e-6
    n_samples: int = 10**6
    seed: int = 0
    integ_cap: float = 1e-12
    comp_threshold: float = 1.0

    def __post_init__(self):
        for f in dataclasses.fields(self):
            value = getattr(self, f.name)
            if isinstance(value, bool):
                raise ConfigError(f"{f.name} must be numeric, got {value!r}")
            if f.type == "int":
                if not isinstance(value, int):
                    raise ConfigError(f"{f.name} must be an integer, got {value!r}")
            elif not isinstance(value, (int, float)):
                raise ConfigError(f"{f.name} must be a number, got {value!r}")
        if self.rows < 1 or self.cols < 1:
            raise ConfigError("rows and cols must be >= 1")
        if self.n_samples < 1:
            raise ConfigError("n_samples must be >= 1")
        if self.seed < 0:
            raise ConfigError("seed must be >= 0")
        try:
            self.crossbar_params()
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def crossbar_params(self, **overrides) -> CrossbarParams:
        kw = {f.name: getattr(self, f.name) for f in dataclasses.fields(CrossbarParams) if hasattr(self, f.name)}
        kw.update(overrides)
        return CrossbarParams(**kw)

    def replace(self, **changes) -> "ExperimentConfig":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, doc: dict) -> "ExperimentConfig":
        if not isinstance(doc, dict):
            raise ConfigError("config must be a JSON object")
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(doc) - known)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        return cls(**doc)


def load_config(path: str | Path | None) -> ExperimentConfig:
    if path is None:
        return ExperimentConfig()
    try:
        doc = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    return ExperimentConfig.from_dict(doc)
