"""Processing-rate model tying link budgets to permissible flight speed.

A mapping/localization frame must be captured every 1/frames_per_meter meters,
so the achievable update rate caps speed. Remote processing pays one uplink
frame transfer, a fixed compute delay, and a downlink feedback transfer per
frame; local processing runs at a fixed low rate.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .errors import ConfigError


class ProcessingMode(Enum):
    REMOTE = "remote"
    LOCAL = "local"


@dataclass(frozen=True)
class OffloadConfig:
    frame_bits: float = 1.0e6
    frames_per_meter: float = 2.0
    feedback_bits: float = 5.0e4
    remote_processing_s: float = 0.02
    local_fps: float = 2.0
    v_max_mps: float = 15.0

    def __post_init__(self):
        if self.frame_bits <= 0 or self.frames_per_meter <= 0:
            raise ConfigError("frame size and frames per meter must be positive")
        if self.feedback_bits < 0 or self.remote_processing_s < 0:
            raise ConfigError("feedback bits and processing delay must be >= 0")
        if self.local_fps < 0 or self.v_max_mps <= 0:
            raise ConfigError("local fps must be >= 0 and v_max positive")


def remote_update_rate(uplink_bps: float, downlink_bps: float, oc: OffloadConfig) -> float:
    """Frames per second sustainable by the offload pipeline; 0 if a link is down."""
    if uplink_bps <= 0.0 or downlink_bps <= 0.0:
        return 0.0
    cycle = oc.frame_bits / uplink_bps + oc.remote_processing_s + oc.feedback_bits / downlink_bps
    return 1.0 / cycle


def select_mode(remote_fps: float, local_fps: float) -> tuple[ProcessingMode, float]:
    """Pick the mode with the higher achievable update rate; ties go remote."""
    if remote_fps >= local_fps:
        return ProcessingMode.REMOTE, remote_fps
    return ProcessingMode.LOCAL, local_fps


def speed_limit(effective_fps: float, oc: OffloadConfig) -> float:
    """Permissible speed so every meter of travel still gets its frames."""
    return min(effective_fps / oc.frames_per_meter, oc.v_max_mps)
