"""Engine configuration: every gain, tolerance and interpolation parameter
lives here so replays are fully determined by (scene, trace, config)."""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field


DEFAULT_MENU_ACTIONS = {
    "*": [["Properties", "properties"], ["Copy", "copy"], ["Delete", "delete"]],
}


class ConfigError(ValueError):
    pass


@dataclass
class EngineConfig:
    angular_gain: float = 0.05       # degrees of cursor rotation per input count
    pitch_limit: float = 89.0        # degrees
    panel_gain: float = 2.0          # panel pixels per input count
    idw_power: float = 2.0
    idw_epsilon: float = 1e-4        # radians
    k_nearest: int = 4
    default_depth: float = 2.0       # meters, used when nothing is visible
    silhouette_samples: int = 64
    scroll_depth_factor: float = 1.05
    depth_smoothing: float = 0.0     # [0,1); 0 disables smoothing
    snap_distance: float = 0.05      # meters
    # label class -> list of [label, action_id]; "*" is the fallback entry
    menu_actions: dict = field(default_factory=lambda: {k: [list(i) for i in v]
                                                        for k, v in DEFAULT_MENU_ACTIONS.items()})

    def __post_init__(self):
        numeric = ["angular_gain", "pitch_limit", "panel_gain", "idw_power",
                   "idw_epsilon", "k_nearest", "default_depth",
                   "silhouette_samples", "scroll_depth_factor", "snap_distance"]
        for name in numeric:
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be positive")
        if not 0.0 <= self.depth_smoothing < 1.0:
            raise ConfigError("depth_smoothing must be in [0, 1)")
        if self.pitch_limit >= 90.0:
            raise ConfigError("pitch_limit must be below 90 degrees")

    def with_overrides(self, overrides: dict) -> "EngineConfig":
        known = {f.name for f in dataclasses.fields(EngineConfig)}
        for key in overrides:
            if key not in known:
                raise ConfigError(f"unknown config field: {key}")
        return dataclasses.replace(self, **overrides)


def load_config_overrides(text: str) -> dict:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"config is not valid JSON: {e}") from e
    if not isinstance(data, dict):
        raise ConfigError("config document must be a JSON object")
    return data
