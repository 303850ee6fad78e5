"""Synthetic country generator: deterministic in (seed, spec, params).

Builds terrain from a value-noise fractal, derives land cover and the
normalized hazard factor layers, lays a road network as a spanning tree
over settlements plus shortcut edges, scatters amenities near roads,
trees, pools and buildings, and plants a hazard event history whose
locations follow susceptibility**event_sharpness so that recall tests
have a known correlation to find.
"""

from __future__ import annotations

import dataclasses
import datetime as dt
import math
from dataclasses import dataclass

import numpy as np

from . import hazard, landcover
from .errors import ValidationError
from .events import PERILS, HazardEvent
from .grid import GridSpec, RasterLayer
from .model import CountryModel
from .roads import Edge, RoadNetwork
from .terrain import derive_slope_aspect, value_noise
from .vector import (AMENITY_KINDS, Feature, FeatureCollection, linestring,
                     point, rectangle)

DEFAULT_SPEC = GridSpec(ncols=256, nrows=256, xll=0.0, yll=0.0, cellsize=100.0)

FUEL_BY_COVER = {landcover.WATER: 0.0, landcover.URBAN: 0.1,
                 landcover.FOREST: 0.9, landcover.SHRUB: 0.55,
                 landcover.AGRICULTURE: 0.35, landcover.BARE: 0.05}
WEAKNESS_BY_GEOLOGY = {0: 0.05, 1: 0.3, 2: 0.55, 3: 0.95}
SLOPE_SATURATION_DEG = 30.0
FAULT_PROXIMITY_RANGE_M = 15000.0


def _rank01(values: np.ndarray) -> np.ndarray:
    """Percentile score of each cell within the grid, in [0, 1].

    Factor layers use percentile scoring so each factor spreads over the
    whole unit interval regardless of the raw value distribution.
    """
    from scipy.stats import rankdata
    flat = rankdata(values.ravel(), method="average")
    if len(flat) == 1:
        return np.zeros_like(values, dtype=np.float64)
    return ((flat - 1.0) / (len(flat) - 1.0)).reshape(values.shape)


@dataclass(frozen=True)
class GeneratorParams:
    max_elevation_m: float = 1500.0     # (0, 10000]
    sea_level_frac: float = 0.18        # [0, 0.9] share of cells under the sea
    n_settlements: int = 12             # [2, 200]
    n_road_shortcuts: int = 6           # [0, 100]
    n_amenities_per_kind: int = 8       # [1, 500]
    n_trees: int = 3000                 # [0, 200000]
    n_pools: int = 120                  # [0, 20000]
    n_buildings: int = 300              # [0, 20000]
    n_beaches: int = 30                 # [0, 2000]
    n_blue_flag: int = 6                # [0, n_beaches]
    n_protected_zones: int = 3          # [0, 50]
    n_grid_lines: int = 3               # [0, 50]
    n_faults: int = 3                   # [1, 20]
    regions_x: int = 4                  # [1, 32]
    regions_y: int = 4                  # [1, 32]
    events_per_peril: int = 150         # [0, 100000]
    event_sharpness: float = 6.0        # gamma >= 0
    event_start_year: int = 2015
    event_end_year: int = 2024
    settlement_radius_m: float = 1200.0  # (0, 20000]

    def __post_init__(self):
        checks = [
            ("max_elevation_m", 0 < self.max_elevation_m <= 10000),
            ("sea_level_frac", 0 <= self.sea_level_frac <= 0.9),
            ("n_settlements", 2 <= self.n_settlements <= 200),
            ("n_road_shortcuts", 0 <= self.n_road_shortcuts <= 100),
            ("n_amenities_per_kind", 1 <= self.n_amenities_per_kind <= 500),
            ("n_trees", 0 <= self.n_trees <= 200000),
            ("n_pools", 0 <= self.n_pools <= 20000),
            ("n_buildings", 0 <= self.n_buildings <= 20000),
            ("n_beaches", 0 <= self.n_beaches <= 2000),
            ("n_blue_flag", 0 <= self.n_blue_flag <= self.n_beaches),
            ("n_protected_zones", 0 <= self.n_protected_zones <= 50),
            ("n_grid_lines", 0 <= self.n_grid_lines <= 50),
            ("n_faults", 1 <= self.n_faults <= 20),
            ("regions_x", 1 <= self.regions_x <= 32),
            ("regions_y", 1 <= self.regions_y <= 32),
            ("events_per_peril", 0 <= self.events_per_peril <= 100000),
            ("event_sharpness", self.event_sharpness >= 0),
            ("event_start_year", 1900 <= self.event_start_year <= 2100),
            ("event_end_year", self.event_start_year <= self.event_end_year <= 2100),
            ("settlement_radius_m", 0 < self.settlement_radius_m <= 20000),
        ]
        for name, ok in checks:
            if not ok:
                raise ValidationError(
                    f"generator parameter {name!r} out of range: "
                    f"{getattr(self, name)}")


def _fill_border(values: np.ndarray, nodata: float) -> np.ndarray:
    """Replace a nodata border ring by the nearest interior row/column."""
    out = values.copy()
    out[0, :] = out[1, :]
    out[-1, :] = out[-2, :]
    out[:, 0] = out[:, 1]
    out[:, -1] = out[:, -2]
    # corners were filled from already-filled rows
    if (out == nodata).any():
        out[out == nodata] = 0.0
    return out


def _sample_cells(rng, weights: np.ndarray, n: int, replace: bool = True):
    flat = weights.ravel()
    total = flat.sum()
    if total <= 0 or n == 0:
        return np.empty(0, dtype=np.int64)
    idx = rng.choice(flat.size, size=n, replace=replace, p=flat / total)
    return idx


def generate_country(seed: int, spec: GridSpec | None = None,
                     params: GeneratorParams | None = None) -> CountryModel:
    spec = spec if spec is not None else DEFAULT_SPEC
    params = params if params is not None else GeneratorParams()
    rng = np.random.default_rng(seed)
    nrows, ncols = spec.shape
    xs, ys = spec.cell_centers()
    gx, gy = np.meshgrid(xs, ys)

    # terrain
    en = value_noise(spec.shape, rng, octaves=4, persistence=0.5)
    sea_level = float(np.quantile(en, params.sea_level_frac)) \
        if params.sea_level_frac > 0 else 0.0
    elev01 = np.clip((en - sea_level) / max(1.0 - sea_level, 1e-9), 0.0, 1.0)
    elevation_vals = (en - sea_level) / max(1.0 - sea_level, 1e-9) \
        * params.max_elevation_m
    sea = en < sea_level
    land = ~sea
    elevation = RasterLayer(spec, elevation_vals, "elevation", "m")
    if nrows >= 3 and ncols >= 3:
        slope, aspect = derive_slope_aspect(elevation)
        slope_filled = _fill_border(slope.values, spec.nodata)
        aspect_filled = _fill_border(aspect.values, spec.nodata)
    else:
        slope = RasterLayer(spec, np.zeros(spec.shape), "slope", "degrees")
        aspect = RasterLayer(spec, np.full(spec.shape, spec.nodata),
                             "aspect", "degrees")
        slope_filled = slope.values.copy()
        aspect_filled = np.zeros(spec.shape)
    slope_norm = np.clip(slope_filled / SLOPE_SATURATION_DEG, 0.0, 1.0)
    elev_rank = _rank01(elevation_vals)

    # climate and geology; the factor layers share the mountain structure and
    # are deliberately contrasty (wet weak steep highlands vs dry solid
    # plains), giving every peril a coherent high-susceptibility belt -- the
    # planted correlation that recall validation is meant to find
    pnoise = value_noise(spec.shape, rng, octaves=3, persistence=0.55)
    highland = np.clip((elev_rank - 0.68) / 0.24, 0.0, 1.0)
    highland = highland * highland * (3.0 - 2.0 * highland)
    precip_norm = np.clip(0.1 + 0.85 * highland + 0.05 * pnoise, 0.0, 1.0)
    precipitation = 300.0 + 700.0 * precip_norm
    dnoise = value_noise(spec.shape, rng, octaves=3, persistence=0.5)
    summer_dryness = _rank01(0.7 * (1.0 - precip_norm) + 0.3 * dnoise)
    gnoise = value_noise(spec.shape, rng, octaves=3, persistence=0.5)
    gfield = 0.35 * gnoise + 0.65 * elev_rank
    geology = np.digitize(gfield, np.quantile(gfield, [0.3, 0.55, 0.8]))
    # weakness: fractured highland rock on top of the class base
    highland_g = np.clip((elev_rank - 0.6) / 0.3, 0.0, 1.0)
    highland_g = highland_g * highland_g * (3.0 - 2.0 * highland_g)
    weakness = np.clip(0.08 + 0.8 * highland_g + 0.12 * gnoise, 0.0, 1.0)

    # land cover (urban painted later, once settlements exist)
    vnoise = value_noise(spec.shape, rng, octaves=4, persistence=0.5)
    cover = np.full(spec.shape, landcover.SHRUB, dtype=np.float64)
    cover[(vnoise < 0.35) & (elev01 < 0.4) & (slope_norm < 0.3)] = \
        landcover.AGRICULTURE
    cover[(vnoise >= 0.55) & (elev01 >= 0.1)] = landcover.FOREST
    cover[(slope_norm > 0.7) | (elev01 > 0.92)] = landcover.BARE
    cover[sea] = landcover.WATER

    # settlements prefer flat lowlands but any land cell is eligible
    if int(land.sum()) < params.n_settlements:
        raise ValidationError(
            "generator parameter 'n_settlements' out of range: more "
            "settlements than land cells")
    sweights = (1.0 - slope_norm) * (1.0 - elev01) * land + 0.001 * land
    cells = _sample_cells(rng, sweights, params.n_settlements, replace=False)
    settlements = []
    for node_id, flat_idx in enumerate(cells):
        i, j = divmod(int(flat_idx), ncols)
        settlements.append((node_id, float(xs[j]), float(ys[i])))
    populations = {nid: float(int(300 + 4700 * rng.random() ** 2))
                   for nid, _, _ in settlements}
    for nid, cx, cy in settlements:
        disk = ((gx - cx) ** 2 + (gy - cy) ** 2
                <= params.settlement_radius_m ** 2) & land
        cover[disk] = landcover.URBAN

    # roads: spanning tree (nearest already-connected settlement) + shortcuts
    order = rng.permutation(len(settlements))
    nodes = {nid: (x, y) for nid, x, y in settlements}
    edges = []
    edge_set = set()
    connected = [int(order[0])]
    for idx in order[1:]:
        nid = int(idx)
        x, y = nodes[nid]
        best, best_d = None, math.inf
        for other in connected:
            ox, oy = nodes[other]
            d = math.hypot(x - ox, y - oy)
            if d < best_d:
                best, best_d = other, d
        detour = 1.0 + 0.25 * rng.random()
        edges.append((nid, best, best_d * detour))
        edge_set.add((min(nid, best), max(nid, best)))
        connected.append(nid)
    for _ in range(params.n_road_shortcuts):
        a, b = rng.choice(len(settlements), size=2, replace=False)
        a, b = int(min(a, b)), int(max(a, b))
        if a == b or (a, b) in edge_set:
            continue
        ax, ay = nodes[a]
        bx, by = nodes[b]
        detour = 1.0 + 0.25 * rng.random()
        edges.append((a, b, math.hypot(ax - bx, ay - by) * detour))
        edge_set.add((a, b))
    by_length = sorted(range(len(edges)), key=lambda k: -edges[k][2])
    classes = {}
    for rank, k in enumerate(by_length):
        frac = rank / max(len(edges), 1)
        if frac < 0.2:
            classes[k] = "highway"
        elif frac < 0.5:
            classes[k] = "primary"
        elif frac < 0.8:
            classes[k] = "secondary"
        else:
            classes[k] = "dirt"
    roads = RoadNetwork(nodes, [Edge(a, b, classes[k], length)
                                for k, (a, b, length) in enumerate(edges)])

    # features
    features = []
    fid = 0

    def add(kind, geometry, **attributes):
        nonlocal fid
        features.append(Feature(fid, kind, geometry, attributes))
        fid += 1

    rw = spec.width / params.regions_x
    rh = spec.height / params.regions_y
    for ry in range(params.regions_y):
        for rx in range(params.regions_x):
            x0 = spec.xll + rx * rw
            y0 = spec.yll + ry * rh
            name = f"region_{ry * params.regions_x + rx}"
            geom = rectangle(x0, y0, x0 + rw, y0 + rh)
            pop = sum(populations[nid] for nid, sx, sy in settlements
                      if x0 <= sx <= x0 + rw and y0 <= sy <= y0 + rh)
            add("region", geom, name=name, population=pop)

    coast = np.zeros(spec.shape, dtype=bool)
    if sea.any():
        coast = land.copy()
        interior = np.ones(spec.shape, dtype=bool)
        interior[:-1, :] &= ~sea[1:, :]
        interior[1:, :] &= ~sea[:-1, :]
        interior[:, :-1] &= ~sea[:, 1:]
        interior[:, 1:] &= ~sea[:, :-1]
        coast &= ~interior
    beach_cells = _sample_cells(rng, coast.astype(np.float64),
                                min(params.n_beaches, int(coast.sum())),
                                replace=False)
    for rank, flat_idx in enumerate(beach_cells):
        i, j = divmod(int(flat_idx), ncols)
        kind = "blue_flag_beach" if rank < params.n_blue_flag else "beach"
        add(kind, point(xs[j], ys[i]))

    for kind in AMENITY_KINDS:
        for _ in range(params.n_amenities_per_kind):
            e = edges[int(rng.integers(len(edges)))]
            ax, ay = nodes[e[0]]
            bx, by = nodes[e[1]]
            t = rng.random()
            off = (rng.random(2) - 0.5) * 400.0
            x = min(max(ax + t * (bx - ax) + off[0], spec.xll), spec.extent[2])
            y = min(max(ay + t * (by - ay) + off[1], spec.yll), spec.extent[3])
            add(kind, point(x, y), name=f"{kind}_{fid}")

    tweights = np.where(cover == landcover.FOREST, 1.0,
                        np.where(cover == landcover.SHRUB, 0.2, 0.0))
    tree_cells = _sample_cells(rng, tweights, params.n_trees)
    species_names = np.array(landcover.TREE_SPECIES)
    species_probs = np.array([0.5, 0.2, 0.15, 0.15])
    for flat_idx in tree_cells:
        i, j = divmod(int(flat_idx), ncols)
        jit = (rng.random(2) - 0.5) * spec.cellsize
        species = str(species_names[rng.choice(4, p=species_probs)])
        add("tree", point(xs[j] + jit[0], ys[i] + jit[1]), species=species,
            height_m=round(3.0 + 12.0 * rng.random(), 1))

    urban = (cover == landcover.URBAN).astype(np.float64)
    pool_cells = _sample_cells(rng, urban, params.n_pools)
    for flat_idx in pool_cells:
        i, j = divmod(int(flat_idx), ncols)
        jit = (rng.random(2) - 0.5) * spec.cellsize * 0.8
        add("swimming_pool", point(xs[j] + jit[0], ys[i] + jit[1]),
            volume_m3=round(20.0 + 60.0 * rng.random(), 1))
    building_cells = _sample_cells(rng, urban, params.n_buildings)
    for flat_idx in building_cells:
        i, j = divmod(int(flat_idx), ncols)
        jit = (rng.random(2) - 0.5) * spec.cellsize * 0.5
        half = 4.0 + 8.0 * rng.random()
        cx, cy = xs[j] + jit[0], ys[i] + jit[1]
        add("building", rectangle(cx - half, cy - half, cx + half, cy + half),
            floors=int(1 + rng.integers(3)))

    protected_mask = np.zeros(spec.shape, dtype=np.float64)
    forest_weight = (cover == landcover.FOREST).astype(np.float64) + 0.01 * land
    zone_cells = _sample_cells(rng, forest_weight, params.n_protected_zones,
                               replace=False)
    for flat_idx in zone_cells:
        i, j = divmod(int(flat_idx), ncols)
        hi = int(rng.integers(4, 10))
        hj = int(rng.integers(4, 10))
        i0, i1 = max(0, i - hi), min(nrows - 1, i + hi)
        j0, j1 = max(0, j - hj), min(ncols - 1, j + hj)
        protected_mask[i0:i1 + 1, j0:j1 + 1] = 1.0
        x0 = spec.xll + j0 * spec.cellsize
        x1 = spec.xll + (j1 + 1) * spec.cellsize
        y1 = spec.yll + (nrows - i0) * spec.cellsize
        y0 = spec.yll + (nrows - i1 - 1) * spec.cellsize
        add("protected_zone", rectangle(x0, y0, x1, y1), name=f"natura_{fid}")

    xmin, ymin, xmax, ymax = spec.extent
    for _ in range(params.n_grid_lines):
        y_a = ymin + rng.random() * (ymax - ymin)
        y_b = ymin + rng.random() * (ymax - ymin)
        mid1 = (xmin + (xmax - xmin) * 0.33,
                min(max((y_a + y_b) / 2 + (rng.random() - 0.5) * 0.2
                        * (ymax - ymin), ymin), ymax))
        mid2 = (xmin + (xmax - xmin) * 0.66,
                min(max((y_a + y_b) / 2 + (rng.random() - 0.5) * 0.2
                        * (ymax - ymin), ymin), ymax))
        add("grid_line", linestring([(xmin, y_a), mid1, mid2, (xmax, y_b)]))

    fault_segments = []
    for _ in range(params.n_faults):
        x_a = xmin + rng.random() * (xmax - xmin)
        x_b = xmin + rng.random() * (xmax - xmin)
        fault_segments.append((x_a, ymin, x_b, ymax))
    d2 = np.full(spec.shape, np.inf)
    from . import _kernels
    _kernels.segment_min_dist2(xs, ys, np.array(fault_segments), d2)
    fault_proximity = np.clip(1.0 - np.sqrt(d2) / FAULT_PROXIMITY_RANGE_M,
                              0.0, 1.0)

    fnoise = value_noise(spec.shape, rng, octaves=3, persistence=0.5)
    fuel = np.clip(np.vectorize(FUEL_BY_COVER.get)(cover.astype(int))
                   * (0.8 + 0.4 * fnoise), 0.0, 1.0)

    slope_rad = np.radians(slope_filled)
    aspect_term = np.where(aspect_filled == spec.nodata, 0.0,
                           np.cos(np.radians(aspect_filled - 180.0)))
    insolation = np.clip(0.5 + 0.5 * np.sin(slope_rad) * aspect_term, 0.0, 1.0)

    layers = {
        "elevation": elevation,
        "slope": slope,
        "aspect": aspect,
        "landcover": RasterLayer(spec, cover, "landcover", "cover code"),
        "precipitation": RasterLayer(spec, precipitation, "precipitation",
                                     "mm/yr"),
        "geology": RasterLayer(spec, geology.astype(np.float64), "geology",
                               "geology code"),
        "geology_weakness": RasterLayer(spec, weakness, "geology_weakness"),
        "slope_norm": RasterLayer(spec, slope_norm, "slope_norm"),
        "flatness": RasterLayer(spec, 1.0 - slope_norm, "flatness"),
        "precip_norm": RasterLayer(spec, precip_norm, "precip_norm"),
        "low_elevation": RasterLayer(spec, 1.0 - elev_rank, "low_elevation"),
        "summer_dryness": RasterLayer(spec, summer_dryness, "summer_dryness"),
        "fuel": RasterLayer(spec, fuel, "fuel"),
        "fault_proximity": RasterLayer(spec, fault_proximity,
                                       "fault_proximity"),
        "insolation": RasterLayer(spec, insolation, "insolation"),
        "protected_mask": RasterLayer(spec, protected_mask, "protected_mask"),
    }

    # hazard history planted proportional to susceptibility**gamma on land
    events = []
    start = dt.date(params.event_start_year, 1, 1)
    n_days = (dt.date(params.event_end_year, 12, 31) - start).days + 1
    for peril in PERILS:
        weights = hazard.peril_factor_weights(peril)
        s = hazard.susceptibility(layers, weights).values
        w = np.power(np.clip(s, 0.0, 1.0), params.event_sharpness) * land
        cells = _sample_cells(rng, w, params.events_per_peril)
        for flat_idx in cells:
            i, j = divmod(int(flat_idx), ncols)
            jit = (rng.random(2) - 0.5) * spec.cellsize
            day = start + dt.timedelta(days=int(rng.integers(n_days)))
            severity = 1 + min(4, int(rng.binomial(4, 0.2 + 0.6 * s[i, j])))
            events.append(HazardEvent(peril, float(xs[j] + jit[0]),
                                      float(ys[i] + jit[1]), day, severity))

    return CountryModel(
        spec=spec, layers=layers, features=FeatureCollection(features),
        roads=roads, events=events, seed=int(seed),
        params=dataclasses.asdict(params), populations=populations)
