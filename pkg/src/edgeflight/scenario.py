"""Procedural city scenarios: height field, base stations, mission endpoints.

The world is a 2.5D height field on a regular square grid. Buildings sit on a
Manhattan-style block pattern: square blocks of constant height separated by
streets, one i.i.d. Rayleigh-distributed height per block, streets at height 0.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, ScenarioError

Point3 = np.ndarray  # shape (3,), meters


@dataclass(frozen=True)
class ScenarioConfig:
    """World geometry and placement parameters.

    Distances are meters. The map spans [0, map_size_m[0]) x [0, map_size_m[1])
    with cell (ix, iy) covering [ix*s, (ix+1)*s) x [iy*s, (iy+1)*s).
    """

    map_size_m: tuple[float, float] = (400.0, 400.0)
    cell_size_m: float = 5.0
    rayleigh_scale_m: float = 35.0
    building_footprint_m: float = 15.0
    street_width_m: float = 30.0
    n_bs: int = 3
    bs_height_m: float = 25.0
    uav_altitude_m: float = 50.0
    endpoint_distance_m: tuple[float, float] = (200.0, 400.0)
    rng_seed: int = 0

    def __post_init__(self):
        w, d = self.map_size_m
        s = self.cell_size_m
        if s <= 0 or w <= 0 or d <= 0:
            raise ConfigError("map size and cell size must be positive")
        for extent in (w, d):
            if abs(extent / s - round(extent / s)) > 1e-9:
                raise ConfigError("map size must be divisible by cell size")
        if self.rayleigh_scale_m < 0:
            raise ConfigError("rayleigh scale must be >= 0")
        period = self.building_footprint_m + self.street_width_m
        if period > min(w, d):
            raise ConfigError("building footprint + street width exceeds map size")
        for extent, name in (
            (self.building_footprint_m, "building footprint"),
            (self.street_width_m, "street width"),
        ):
            if extent <= 0:
                raise ConfigError(f"{name} must be positive")
            if abs(extent / s - round(extent / s)) > 1e-9:
                raise ConfigError(f"{name} must be divisible by cell size")
        if self.n_bs < 1:
            raise ConfigError("need at least one base station")
        if self.bs_height_m <= 0 or self.uav_altitude_m <= 0:
            raise ConfigError("heights must be positive")
        lo, hi = self.endpoint_distance_m
        if not (0 < lo <= hi):
            raise ConfigError("endpoint distance range must satisfy 0 < lo <= hi")

    @property
    def width_cells(self) -> int:
        return int(round(self.map_size_m[0] / self.cell_size_m))

    @property
    def depth_cells(self) -> int:
        return int(round(self.map_size_m[1] / self.cell_size_m))


class HeightField:
    """Immutable per-cell building heights, indexed heights[ix, iy]."""

    def __init__(self, heights: np.ndarray, cell_size_m: float):
        heights = np.asarray(heights, dtype=float).copy()
        heights.flags.writeable = False
        self.heights = heights
        self.cell_size_m = float(cell_size_m)

    @property
    def width_cells(self) -> int:
        return self.heights.shape[0]

    @property
    def depth_cells(self) -> int:
        return self.heights.shape[1]

    def cell_of(self, point) -> tuple[int, int]:
        """Grid cell containing an (x, y[, z]) point; boundary points clip inward."""
        s = self.cell_size_m
        ix = min(int(point[0] // s), self.width_cells - 1)
        iy = min(int(point[1] // s), self.depth_cells - 1)
        return max(ix, 0), max(iy, 0)

    def cell_center(self, ix: int, iy: int) -> np.ndarray:
        s = self.cell_size_m
        return np.array([(ix + 0.5) * s, (iy + 0.5) * s])


@dataclass
class Scenario:
    """A fully instantiated world: truth map, base stations, mission endpoints."""

    cfg: ScenarioConfig
    truth: HeightField
    bs_positions: list[Point3]
    serving_bs: int
    start: Point3
    goal: Point3
    # lazily filled per-BS ray caches, see worldmap.RayTable
    _ray_tables: dict = field(default_factory=dict, repr=False)


def _block_slices(n_cells: int, footprint_c: int, street_c: int) -> list[slice]:
    """Cell index ranges covered by blocks along one axis.

    The repeating unit is footprint + street; the pattern is centered so the
    border streets are half width (plus any remainder split evenly).
    """
    period = footprint_c + street_c
    n_blocks = n_cells // period
    used = n_blocks * period
    margin = (n_cells - used + street_c) // 2
    out = []
    for b in range(n_blocks):
        lo = margin + b * period
        out.append(slice(lo, lo + footprint_c))
    return out


def sample_building_heights(rng: np.random.Generator, scale: float, n: int) -> np.ndarray:
    """Rayleigh(scale) samples via inverse CDF over PCG64 uniforms."""
    u = rng.random(n)
    return scale * np.sqrt(-2.0 * np.log1p(-u))


def generate_city(cfg: ScenarioConfig, rng: np.random.Generator) -> HeightField:
    """Build the truth height field for one city instance.

    Args:
        cfg: validated scenario parameters.
        rng: generator that owns the scenario's random stream.

    Returns:
        HeightField spanning exactly cfg.map_size_m.
    """
    nx, ny = cfg.width_cells, cfg.depth_cells
    s = cfg.cell_size_m
    fp_c = int(round(cfg.building_footprint_m / s))
    st_c = int(round(cfg.street_width_m / s))
    cols = _block_slices(nx, fp_c, st_c)
    rows = _block_slices(ny, fp_c, st_c)
    heights = np.zeros((nx, ny))
    draws = sample_building_heights(rng, cfg.rayleigh_scale_m, len(cols) * len(rows))
    k = 0
    for cs in cols:
        for rs in rows:
            heights[cs, rs] = draws[k]
            k += 1
    return HeightField(heights, s)


def block_heights(field_: HeightField, cfg: ScenarioConfig) -> np.ndarray:
    """Per-block height draws recovered from a generated field (one cell per block)."""
    s = cfg.cell_size_m
    fp_c = int(round(cfg.building_footprint_m / s))
    st_c = int(round(cfg.street_width_m / s))
    cols = _block_slices(field_.width_cells, fp_c, st_c)
    rows = _block_slices(field_.depth_cells, fp_c, st_c)
    return np.array([field_.heights[cs.start, rs.start] for cs in cols for rs in rows])


def street_mask(field_: HeightField) -> np.ndarray:
    return field_.heights == 0.0


def _free_at_altitude(field_: HeightField, altitude: float, margin_cells: int = 1) -> np.ndarray:
    """Cells whose own and neighboring truth heights stay below the flight altitude.

    The margin keeps endpoints out of the planner's inflated obstacle shell.
    """
    blocked = field_.heights >= altitude
    if margin_cells > 0:
        from scipy.ndimage import binary_dilation

        # same Chebyshev shell the planner forbids, or endpoints could be
        # placed on cells the planner will never enter
        blocked = binary_dilation(blocked, structure=np.ones((3, 3), dtype=bool),
                                  iterations=margin_cells)
    return ~blocked


def place_bs_and_endpoints(
    cfg: ScenarioConfig, field_: HeightField, rng: np.random.Generator, max_tries: int = 200
) -> tuple[list[Point3], int, Point3, Point3]:
    """Sample BS sites and mission endpoints under the placement constraints.

    BSs sit on distinct street cells, pairwise separated by at least a quarter
    of the map diagonal. Start and goal sit on cell centers at flight altitude,
    collision-free with margin, with straight-line separation inside the
    configured range. The serving BS is the one nearest the start.

    Raises:
        ScenarioError: constraints not satisfiable within max_tries draws.
    """
    s = cfg.cell_size_m
    diag = float(np.hypot(*cfg.map_size_m))
    min_sep = diag / 4.0

    streets = np.argwhere(street_mask(field_))
    if len(streets) < cfg.n_bs:
        raise ScenarioError("not enough street cells for base stations")

    bs_xy = None
    for _ in range(max_tries):
        picks = streets[rng.choice(len(streets), size=cfg.n_bs, replace=False)]
        xy = (picks + 0.5) * s
        d = np.linalg.norm(xy[:, None, :] - xy[None, :, :], axis=-1)
        if cfg.n_bs == 1 or d[np.triu_indices(cfg.n_bs, k=1)].min() >= min_sep:
            bs_xy = xy
            break
    if bs_xy is None:
        raise ScenarioError("could not separate base stations by a quarter diagonal")
    bs_positions = [np.array([x, y, cfg.bs_height_m]) for x, y in bs_xy]

    free = _free_at_altitude(field_, cfg.uav_altitude_m)
    free_cells = np.argwhere(free)
    if len(free_cells) < 2:
        raise ScenarioError("no collision-free cells at flight altitude")
    lo, hi = cfg.endpoint_distance_m
    centers = (free_cells + 0.5) * s

    start = goal = None
    for _ in range(max_tries):
        i = int(rng.integers(len(free_cells)))
        d = np.linalg.norm(centers - centers[i], axis=1)
        ring = np.nonzero((d >= lo - 1e-9) & (d <= hi + 1e-9))[0]
        if len(ring) == 0:
            continue
        j = int(ring[rng.integers(len(ring))])
        start = np.array([*centers[i], cfg.uav_altitude_m])
        goal = np.array([*centers[j], cfg.uav_altitude_m])
        break
    if start is None:
        raise ScenarioError("could not place endpoints in the requested distance range")

    serving = int(np.argmin([np.linalg.norm(p[:2] - start[:2]) for p in bs_positions]))
    return bs_positions, serving, start, goal


def build_scenario(cfg: ScenarioConfig) -> Scenario:
    """Generate a reproducible scenario from cfg.rng_seed."""
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(cfg.rng_seed)))
    field_ = generate_city(cfg, rng)
    bs_positions, serving, start, goal = place_bs_and_endpoints(cfg, field_, rng)
    return Scenario(cfg, field_, bs_positions, serving, start, goal)
