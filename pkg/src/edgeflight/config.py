"""Structured configuration: JSON file schema, validation, digest, presets.

A config file is a JSON object with up to six sections, each mapping directly
onto one parameter dataclass:

    {
      "scenario": {... ScenarioConfig fields ...},
      "sensor":   {"fov_deg": ..., "range_m": ...},
      "channel":  {... ChannelParams fields ...},
      "offload":  {... OffloadConfig fields ...},
      "planner":  {... PlanConfig fields ...},
      "sim":      {"tick_s": ..., "timeout_s": ..., "sticky_nlos": ...}
    }

Missing sections and missing fields take their defaults; unknown sections or
fields raise ConfigError. Two-element lists are accepted for the tuple-valued
scenario fields.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass, replace

from .channel import ChannelParams
from .errors import ConfigError
from .offload import OffloadConfig
from .planner import PlanConfig
from .scenario import ScenarioConfig
from .worldmap import SensorModel


@dataclass(frozen=True)
class SimParams:
    tick_s: float = 0.1
    timeout_s: float = 600.0
    sticky_nlos: bool = True

    def __post_init__(self):
        if self.tick_s <= 0 or self.timeout_s <= 0:
            raise ConfigError("tick and timeout must be positive")


@dataclass(frozen=True)
class Config:
    scenario: ScenarioConfig = ScenarioConfig()
    sensor: SensorModel = SensorModel()
    channel: ChannelParams = ChannelParams()
    offload: OffloadConfig = OffloadConfig()
    planner: PlanConfig = PlanConfig()
    sim: SimParams = SimParams()


_SECTIONS = {
    "scenario": ScenarioConfig,
    "sensor": SensorModel,
    "channel": ChannelParams,
    "offload": OffloadConfig,
    "planner": PlanConfig,
    "sim": SimParams,
}
_TUPLE_FIELDS = {"map_size_m", "endpoint_distance_m"}


def _build_section(cls, data: dict, name: str):
    fields = {f.name for f in dataclasses.fields(cls)}
    unknown = set(data) - fields
    if unknown:
        raise ConfigError(f"unknown keys in [{name}]: {sorted(unknown)}")
    kwargs = {}
    for k, v in data.items():
        if k in _TUPLE_FIELDS:
            if not (isinstance(v, (list, tuple)) and len(v) == 2):
                raise ConfigError(f"{name}.{k} must be a two-element list")
            v = (float(v[0]), float(v[1]))
        kwargs[k] = v
    try:
        return cls(**kwargs)
    except (TypeError, ValueError) as e:
        if isinstance(e, ConfigError):
            raise
        raise ConfigError(f"bad [{name}] section: {e}") from None


def config_from_dict(d: dict) -> Config:
    if not isinstance(d, dict):
        raise ConfigError("config root must be an object")
    unknown = set(d) - set(_SECTIONS)
    if unknown:
        raise ConfigError(f"unknown config sections: {sorted(unknown)}")
    parts = {
        name: _build_section(cls, d.get(name, {}), name)
        for name, cls in _SECTIONS.items()
    }
    return Config(**parts)


def config_to_dict(cfg: Config) -> dict:
    out = {}
    for name in _SECTIONS:
        section = dataclasses.asdict(getattr(cfg, name))
        for k, v in section.items():
            if isinstance(v, tuple):
                section[k] = list(v)
        out[name] = section
    return out


def load_config(path) -> Config:
    try:
        with open(path) as f:
            data = json.load(f)
    except OSError as e:
        raise ConfigError(f"cannot read config: {e}") from None
    except json.JSONDecodeError as e:
        raise ConfigError(f"config is not valid JSON: {e}") from None
    return config_from_dict(data)


def save_config(path, cfg: Config) -> None:
    with open(path, "w") as f:
        json.dump(config_to_dict(cfg), f, indent=2, sort_keys=True)
        f.write("\n")


def config_digest(cfg: Config) -> str:
    """Stable short hash of the full parameter set, for provenance headers."""
    canon = json.dumps(config_to_dict(cfg), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()[:12]


# ---- presets ----

def default_config(seed: int = 0) -> Config:
    return Config(scenario=ScenarioConfig(rng_seed=seed))


def flat_city_config(seed: int = 0) -> Config:
    """Degenerate all-LoS world with the speed governor unbound.

    Buildings are removed and the offload pipeline is configured so the update
    rate never caps speed below v_max; missions then expose pure kinematics.
    """
    return Config(
        scenario=ScenarioConfig(
            rayleigh_scale_m=0.0,
            endpoint_distance_m=(320.0, 320.0),
            rng_seed=seed,
        ),
        offload=OffloadConfig(
            frame_bits=2.0e5,
            feedback_bits=0.0,
            remote_processing_s=0.0,
        ),
    )


def example_config(seed: int = 7) -> Config:
    """A single-mission showcase: 320 m separation on the default city."""
    return Config(
        scenario=ScenarioConfig(endpoint_distance_m=(320.0, 320.0), rng_seed=seed)
    )


PRESETS = {
    "default": default_config,
    "flat": flat_city_config,
    "example": example_config,
}


def preset_config(name: str, seed: int | None = None) -> Config:
    try:
        factory = PRESETS[name]
    except KeyError:
        raise ConfigError(f"unknown preset {name!r}; pick from {sorted(PRESETS)}") from None
    cfg = factory() if seed is None else factory(seed)
    return cfg


def with_seed(cfg: Config, seed: int) -> Config:
    return replace(cfg, scenario=replace(cfg.scenario, rng_seed=seed))
