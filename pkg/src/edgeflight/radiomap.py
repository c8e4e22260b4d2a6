"""Incrementally learned radio map toward the serving base station.

The map is a sparse voxel table in a BS-referenced grid (horizontal voxel =
map cell, vertical layers at multiples of the cell size). Each entry stores a
link-state estimate and the channel gain it implies. Voxels whose ray to the
BS crosses only explored free cells are LoS; rays crossing a known obstacle
are NLoS and stay NLoS (sticky); rays touching unexplored cells are assumed
LoS and priced optimistically until the area is explored or measured.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import ChannelParams, LinkState, capacity_bps, path_loss_db, sinr_linear
from .worldmap import ExploredMap, RayResult, RayTable, UnknownPolicy, ray_blocked

_STATE_CODE = {LinkState.LOS: 0, LinkState.NLOS: 1, LinkState.ASSUMED_LOS: 2}
_CODE_STATE = {v: k for k, v in _STATE_CODE.items()}
MISSING = -1


@dataclass
class RadioEntry:
    state: LinkState
    gain_db: float
    sticky_nlos: bool = False


def classify_link(explored: ExploredMap, voxel_center, bs) -> LinkState:
    """Map the tri-state ray verdict to a link-state estimate."""
    r = ray_blocked(explored, np.asarray(bs, dtype=float), np.asarray(voxel_center, dtype=float),
                    UnknownPolicy.FREE)
    if r is RayResult.BLOCKED:
        return LinkState.NLOS
    if r is RayResult.CROSSES_UNKNOWN:
        return LinkState.ASSUMED_LOS
    return LinkState.LOS


class RadioMap:
    """Sparse per-voxel link estimates bound to one explored map and one BS."""

    def __init__(self, bs, explored: ExploredMap, params: ChannelParams,
                 layer_z: float, sticky_nlos: bool = True,
                 ray_table: RayTable | None = None):
        self.bs = np.asarray(bs, dtype=float)
        self.explored = explored
        self.params = params
        self.layer_z = float(layer_z)
        self.sticky_enabled = bool(sticky_nlos)
        self.ray_table = ray_table
        s = explored.cell_size_m
        self.cell_size_m = s
        self.bs_cell = explored.cell_of(self.bs)
        self.entries: dict[tuple[int, int, int], RadioEntry] = {}
        # bumped whenever a voxel crosses the NLoS pricing boundary, so
        # planners know their cached cost fields went stale
        self.version = 0
        self._eval_seen = -1
        nx, ny = explored.width_cells, explored.depth_cells
        self._nx, self._ny = nx, ny
        # dense mirrors of the flight layer, for vectorized consumers
        self.state_grid = np.full((nx, ny), MISSING, dtype=np.int8)
        self.gain_grid = np.full((nx, ny), np.nan)
        cx = (np.arange(nx) + 0.5) * s
        cy = (np.arange(ny) + 0.5) * s
        dx = cx[:, None] - self.bs[0]
        dy = cy[None, :] - self.bs[1]
        self._dist_grid = np.sqrt(dx * dx + dy * dy + (self.layer_z - self.bs[2]) ** 2)

    # voxel addressing -----------------------------------------------------

    def voxel_of(self, point) -> tuple[int, int, int]:
        """BS-referenced voxel containing a world point."""
        ix, iy = self.explored.cell_of(point)
        kz = int(round((point[2] - self.bs[2]) / self.cell_size_m))
        return ix - self.bs_cell[0], iy - self.bs_cell[1], kz

    def center_of(self, key) -> np.ndarray:
        kx, ky, kz = key
        s = self.cell_size_m
        return np.array(
            [
                (self.bs_cell[0] + kx + 0.5) * s,
                (self.bs_cell[1] + ky + 0.5) * s,
                self.bs[2] + kz * s,
            ]
        )

    def _grid_cell(self, key) -> tuple[int, int]:
        return key[0] + self.bs_cell[0], key[1] + self.bs_cell[1]

    def _layer_key(self, ix: int, iy: int) -> tuple[int, int, int]:
        kz = int(round((self.layer_z - self.bs[2]) / self.cell_size_m))
        return ix - self.bs_cell[0], iy - self.bs_cell[1], kz

    # entry maintenance ----------------------------------------------------

    def _gain_for(self, state: LinkState, dist_m: float) -> float:
        # UAV boresight tracks the serving BS: both antenna gains at 0 dB.
        return -float(path_loss_db(dist_m, state, self.params))

    def _write(self, key, state: LinkState) -> None:
        ix, iy = self._grid_cell(key)
        dist = float(self._dist_grid[ix, iy])
        sticky = state is LinkState.NLOS
        prev = self.entries.get(key)
        # Missing / assumed / LoS all price identically; only crossing the
        # NLoS boundary changes any consumer's view of the map.
        if (prev is not None and prev.state is LinkState.NLOS) != sticky:
            self.version += 1
        self.entries[key] = RadioEntry(state, self._gain_for(state, dist), sticky)
        self.state_grid[ix, iy] = _STATE_CODE[state]
        self.gain_grid[ix, iy] = self.entries[key].gain_db

    def _needs_eval(self, code: int) -> bool:
        if code == MISSING or code == _STATE_CODE[LinkState.ASSUMED_LOS]:
            return True
        if code == _STATE_CODE[LinkState.NLOS]:
            return not self.sticky_enabled
        return False  # LoS came from fully explored rays; re-evaluating is a no-op

    def update_around(self, around, radius_m: float) -> None:
        """Re-estimate every stale voxel within radius of `around` (flight layer).

        Sticky NLoS entries are left untouched; settled LoS entries cannot
        change because explored knowledge is monotone.
        """
        s = self.cell_size_m
        nx, ny = self._nx, self._ny
        px, py = float(around[0]), float(around[1])
        ix0 = max(int((px - radius_m) // s), 0)
        ix1 = min(int((px + radius_m) // s) + 1, nx)
        iy0 = max(int((py - radius_m) // s), 0)
        iy1 = min(int((py + radius_m) // s) + 1, ny)
        if ix0 >= ix1 or iy0 >= iy1:
            return
        cx = (np.arange(ix0, ix1) + 0.5) * s - px
        cy = (np.arange(iy0, iy1) + 0.5) * s - py
        inside = np.hypot(cx[:, None], cy[None, :]) <= radius_m
        codes = self.state_grid[ix0:ix1, iy0:iy1]
        stale = inside & (
            (codes == MISSING) | (codes == _STATE_CODE[LinkState.ASSUMED_LOS])
        )
        if not self.sticky_enabled:
            stale |= inside & (codes == _STATE_CODE[LinkState.NLOS])
        sel = np.argwhere(stale)
        if len(sel) == 0:
            return
        cells = [(int(ix0 + i), int(iy0 + j)) for i, j in sel]
        self._evaluate_cells(cells)

    def _evaluate_cells(self, cells: list[tuple[int, int]]) -> None:
        # re-predictions mostly confirm the stored state; skipping those
        # writes keeps bulk refreshes O(changed), not O(stale)
        if self.ray_table is not None:
            rays = np.array([ix * self._ny + iy for ix, iy in cells], dtype=np.int64)
            blocked, crosses = self.ray_table.classify_subset(
                rays, self.explored.known, self.explored.heights
            )
            for (ix, iy), b, c in zip(cells, blocked, crosses):
                state = (
                    LinkState.NLOS if b else LinkState.ASSUMED_LOS if c else LinkState.LOS
                )
                if self.state_grid[ix, iy] != _STATE_CODE[state]:
                    self._write(self._layer_key(ix, iy), state)
        else:
            s = self.cell_size_m
            for ix, iy in cells:
                center = np.array([(ix + 0.5) * s, (iy + 0.5) * s, self.layer_z])
                state = classify_link(self.explored, center, self.bs)
                if self.state_grid[ix, iy] != _STATE_CODE[state]:
                    self._write(self._layer_key(ix, iy), state)

    def ensure_layer_evaluated(self) -> None:
        """Bring every flight-layer voxel up to date with the explored map.

        Missing voxels get a first estimate; assumed-LoS voxels are
        re-predicted, since geometry discovered anywhere along their rays can
        disprove the assumption long before the vehicle gets near. LoS voxels
        are settled (their rays crossed only known cells) and sticky NLoS is
        respected.
        """
        seen = self.explored.explored_cell_count
        if seen == self._eval_seen:
            return  # nothing new anywhere: every estimate would re-confirm
        stale = (self.state_grid == MISSING) | (
            self.state_grid == _STATE_CODE[LinkState.ASSUMED_LOS]
        )
        if not self.sticky_enabled:
            stale |= self.state_grid == _STATE_CODE[LinkState.NLOS]
        sel = np.argwhere(stale)
        self._eval_seen = seen
        if len(sel) == 0:
            return
        self._evaluate_cells([(int(i), int(j)) for i, j in sel])

    def csi_correct(self, position, measured: LinkState) -> None:
        """Overwrite the current voxel with a measured LoS/NLoS state.

        Raises:
            ValueError: measured state is not a physical measurement.
        """
        if measured not in (LinkState.LOS, LinkState.NLOS):
            raise ValueError("CSI measurement must be LoS or NLoS")
        key = self.voxel_of(position)
        existing = self.entries.get(key)
        if existing is not None and existing.sticky_nlos and self.sticky_enabled:
            return
        self._write(key, measured)

    # queries ---------------------------------------------------------------

    def state_at(self, point) -> LinkState | None:
        e = self.entries.get(self.voxel_of(point))
        return e.state if e is not None else None

    def gain_at(self, point) -> float:
        """Gain estimate at the voxel holding `point`, classifying on demand."""
        key = self.voxel_of(point)
        e = self.entries.get(key)
        if e is None:
            self._write(key, classify_link(self.explored, self.center_of(key), self.bs))
            e = self.entries[key]
        return e.gain_db

    def estimated_uplink_capacity(self, point) -> float:
        """Interference-blind uplink capacity implied by the stored gain."""
        rx = self.params.uav_tx_power_dbm + self.gain_at(point)
        return float(capacity_bps(sinr_linear(rx, (), self.params), self.params.bandwidth_hz))

    def export_slice(self) -> str:
        """Flight-layer gains and state codes as plot-friendly text."""
        lines = [
            "# radio map slice",
            f"# bs {self.bs[0]!r} {self.bs[1]!r} {self.bs[2]!r}",
            f"# layer_z {self.layer_z!r}",
            f"# states: {MISSING}=missing 0=los 1=nlos 2=assumed_los",
            f"{self._nx} {self._ny} {self.cell_size_m!r}",
            "# gain_db",
        ]
        for iy in range(self._ny):
            lines.append(" ".join(f"{g:.3f}" for g in self.gain_grid[:, iy]))
        lines.append("# state")
        for iy in range(self._ny):
            lines.append(" ".join(str(int(c)) for c in self.state_grid[:, iy]))
        return "\n".join(lines) + "\n"


def update_radio_map(rm: RadioMap, around, radius_m: float) -> None:
    rm.update_around(around, radius_m)


def csi_correct(rm: RadioMap, position, measured: LinkState) -> None:
    rm.csi_correct(position, measured)


def estimated_uplink_capacity(rm: RadioMap, point) -> float:
    return rm.estimated_uplink_capacity(point)
