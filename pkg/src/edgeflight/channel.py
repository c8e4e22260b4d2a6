"""Air-to-ground link budget: path loss, LoS probability, SINR, capacity.

All functions broadcast over numpy arrays; angles in degrees, powers in dBm,
distances in meters, rates in bits per second.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import ConfigError

SPEED_OF_LIGHT = 299792458.0
THERMAL_NOISE_DBM_HZ = -174.0


class LinkState(Enum):
    LOS = "los"
    NLOS = "nlos"
    ASSUMED_LOS = "assumed_los"


@dataclass(frozen=True)
class ChannelParams:
    carrier_hz: float = 2.0e9
    bandwidth_hz: float = 1.0e6
    uav_tx_power_dbm: float = 30.0
    bs_tx_power_dbm: float = 30.0
    noise_figure_db: float = 9.0
    nlos_excess_db: float = 20.0
    plos_a: float = 9.61
    plos_b: float = 0.16
    antenna_halfwidth_deg: float = 60.0
    antenna_backlobe_db: float = -10.0

    def __post_init__(self):
        if self.carrier_hz <= 0 or self.bandwidth_hz <= 0:
            raise ConfigError("carrier and bandwidth must be positive")
        if self.nlos_excess_db < 0:
            raise ConfigError("NLoS excess must be >= 0")
        if not (0 < self.antenna_halfwidth_deg <= 180):
            raise ConfigError("antenna halfwidth must be in (0, 180]")

    @property
    def noise_dbm(self) -> float:
        return THERMAL_NOISE_DBM_HZ + 10.0 * np.log10(self.bandwidth_hz) + self.noise_figure_db


def free_space_path_loss_db(distance_m, carrier_hz):
    """20 log10(d) + 20 log10(f) + 20 log10(4 pi / c)."""
    d = np.maximum(distance_m, 1e-9)
    return (
        20.0 * np.log10(d)
        + 20.0 * np.log10(carrier_hz)
        + 20.0 * np.log10(4.0 * np.pi / SPEED_OF_LIGHT)
    )


def path_loss_db(distance_m, state: LinkState, p: ChannelParams):
    """Free-space loss plus the NLoS excess; assumed-LoS is priced as LoS."""
    pl = free_space_path_loss_db(distance_m, p.carrier_hz)
    if state is LinkState.NLOS:
        pl = pl + p.nlos_excess_db
    return pl


def plos_probability(elevation_deg, p: ChannelParams):
    """LoS probability 1 / (1 + a exp(-b (theta - a))) for elevation in [0, 90]."""
    theta = np.clip(elevation_deg, 0.0, 90.0)
    return 1.0 / (1.0 + p.plos_a * np.exp(-p.plos_b * (theta - p.plos_a)))


def expected_path_loss_db(distance_m, elevation_deg, p: ChannelParams):
    """LoS-probability-weighted mix of LoS and NLoS losses, averaged in dB."""
    pl_los = free_space_path_loss_db(distance_m, p.carrier_hz)
    prob = plos_probability(elevation_deg, p)
    return pl_los + (1.0 - prob) * p.nlos_excess_db


def antenna_gain_db(off_boresight_deg, p: ChannelParams):
    """Two-level pattern: 0 dB inside the halfwidth cone, backlobe level outside."""
    a = np.abs((np.asarray(off_boresight_deg, dtype=float) + 180.0) % 360.0 - 180.0)
    return np.where(a <= p.antenna_halfwidth_deg, 0.0, p.antenna_backlobe_db)


def received_power_dbm(tx_power_dbm, tx_gain_db, rx_gain_db, pl_db):
    return tx_power_dbm + tx_gain_db + rx_gain_db - pl_db


def dbm_to_mw(dbm):
    return np.power(10.0, np.asarray(dbm, dtype=float) / 10.0)


def sinr_linear(signal_dbm, interferer_dbm, p: ChannelParams):
    """Linear SINR for one signal against noise plus a list of interferers.

    Args:
        signal_dbm: received power of the serving link.
        interferer_dbm: iterable of received interferer powers (may be empty).
        p: channel parameters (sets the noise floor).
    """
    noise_mw = dbm_to_mw(p.noise_dbm)
    inter_mw = sum((dbm_to_mw(i) for i in interferer_dbm), 0.0)
    return dbm_to_mw(signal_dbm) / (noise_mw + inter_mw)


def capacity_bps(sinr, bandwidth_hz):
    """Shannon capacity B log2(1 + SINR); zero when SINR <= 0."""
    s = np.maximum(np.asarray(sinr, dtype=float), 0.0)
    return bandwidth_hz * np.log2(1.0 + s)


def elevation_deg(from_point, to_point):
    """Elevation angle of `to_point` seen from `from_point`, degrees in [-90, 90]."""
    dx = to_point[0] - from_point[0]
    dy = to_point[1] - from_point[1]
    dz = to_point[2] - from_point[2]
    horiz = np.hypot(dx, dy)
    return np.degrees(np.arctan2(dz, horiz))
