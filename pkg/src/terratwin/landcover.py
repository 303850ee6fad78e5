"""Land-cover analytics: zonal statistics, change series, species spread velocity."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import ValidationError
from .grid import GridSpec, RasterLayer, require_aligned
from .vector import (Feature, Geometry, geometry_segments,
                     point_in_polygon, polygon_area)

# Land-cover codes
WATER, URBAN, FOREST, SHRUB, AGRICULTURE, BARE = 0, 1, 2, 3, 4, 5
VEGETATION_CODES = (FOREST, SHRUB)
BUILT_CODES = (URBAN,)

TREE_SPECIES = ("pinus_brutia", "pinus_nigra", "olive", "cypress")
SPECIES_CODES = {name: code + 1 for code, name in enumerate(TREE_SPECIES)}
NO_SPECIES = 0


def polygon_mask(spec: GridSpec, geom: Geometry) -> np.ndarray:
    """Cells whose center is inside the polygon (boundary counts as inside).

    Parity comes from the shared kernel; centers exactly on a ring edge are
    patched in afterwards so the result matches point_in_polygon cell by cell.
    """
    if geom.type != "Polygon":
        raise ValidationError("polygon_mask needs a Polygon")
    xs, ys = spec.cell_centers()
    inside = np.zeros(spec.shape, dtype=bool)
    edges = np.array(list(geometry_segments(geom)))
    _kernels.polygon_parity(xs, ys, edges, inside)
    gx = xs[None, :]
    gy = ys[:, None]
    for ax, ay, bx, by in edges:
        cross = (bx - ax) * (gy - ay) - (by - ay) * (gx - ax)
        on = ((cross == 0.0)
              & (gx >= min(ax, bx)) & (gx <= max(ax, bx))
              & (gy >= min(ay, by)) & (gy <= max(ay, by)))
        inside |= on
    return inside


def representative_point(geom: Geometry) -> tuple[float, float]:
    """The point that decides a feature's region membership."""
    if geom.type == "Point":
        return geom.coordinates
    if geom.type == "Polygon":
        ring = geom.coordinates[0][:-1]
        xs = sum(v[0] for v in ring) / len(ring)
        ys = sum(v[1] for v in ring) / len(ring)
        return (xs, ys)
    pts = geom.coordinates
    mid = len(pts) // 2
    return pts[mid]


@dataclass
class ZonalReport:
    region_id: int
    counts: dict[str, int] = field(default_factory=dict)
    species_counts: dict[str, int] = field(default_factory=dict)
    pool_volume_m3: float = 0.0
    building_area_m2: float = 0.0
    veg_fraction: float = 0.0
    built_fraction: float = 0.0

    def to_json(self) -> dict:
        return {
            "region_id": self.region_id,
            "counts": dict(self.counts),
            "species_counts": dict(self.species_counts),
            "pool_volume_m3": self.pool_volume_m3,
            "building_area_m2": self.building_area_m2,
            "veg_fraction": self.veg_fraction,
            "built_fraction": self.built_fraction,
        }


def _fractions(region_geom: Geometry, landcover: RasterLayer) -> tuple[float, float]:
    mask = polygon_mask(landcover.spec, region_geom)
    n = int(mask.sum())
    if n == 0:
        return 0.0, 0.0
    codes = landcover.values[mask]
    veg = int(np.isin(codes, VEGETATION_CODES).sum())
    built = int(np.isin(codes, BUILT_CODES).sum())
    return veg / n, built / n


def zonal_report(region: Feature, features, landcover: RasterLayer) -> ZonalReport:
    """Feature counts, pool volume, building area and cover fractions inside
    a region polygon.  Point membership is boundary-inclusive; polygon and
    line features are attributed by their representative point."""
    geom = region.geometry
    if geom.type != "Polygon":
        raise ValidationError("region must be a polygon feature")
    if polygon_area(geom) == 0.0:
        raise ValidationError(f"region {region.id}: degenerate polygon (area 0)")

    report = ZonalReport(region_id=region.id)
    for f in features:
        if f.id == region.id and f.kind == "region":
            continue
        px, py = representative_point(f.geometry)
        if not point_in_polygon(geom, px, py):
            continue
        report.counts[f.kind] = report.counts.get(f.kind, 0) + 1
        if f.kind == "tree":
            species = f.attributes.get("species", "unknown")
            report.species_counts[species] = \
                report.species_counts.get(species, 0) + 1
        elif f.kind == "swimming_pool":
            report.pool_volume_m3 += float(f.attributes.get("volume_m3", 0.0))
        elif f.kind == "building" and f.geometry.type == "Polygon":
            report.building_area_m2 += polygon_area(f.geometry)
    report.veg_fraction, report.built_fraction = _fractions(geom, landcover)
    return report


class EpochStack:
    """Yearly snapshots of species and land-cover rasters, aligned, years increasing."""

    def __init__(self, epochs: dict[int, dict[str, RasterLayer]]):
        self.years = sorted(epochs)
        if list(epochs) != self.years:
            epochs = {y: epochs[y] for y in self.years}
        layers = []
        for year in self.years:
            entry = epochs[year]
            if "species" not in entry or "landcover" not in entry:
                raise ValidationError(
                    f"epoch {year} needs 'species' and 'landcover' rasters")
            layers.extend([entry["species"], entry["landcover"]])
        require_aligned(layers)
        self.epochs = epochs

    def __getitem__(self, year: int) -> dict[str, RasterLayer]:
        return self.epochs[year]


def change_series(region: Feature, epochs: EpochStack) -> list[tuple[int, float, float]]:
    """(year, vegetation fraction, built fraction) per epoch inside the region."""
    if len(epochs.years) < 2:
        raise ValidationError("change series needs at least 2 epochs")
    geom = region.geometry
    if geom.type != "Polygon" or polygon_area(geom) == 0.0:
        raise ValidationError("region must be a non-degenerate polygon")
    out = []
    for year in epochs.years:
        veg, built = _fractions(geom, epochs[year]["landcover"])
        out.append((year, veg, built))
    return out


def spread_velocity(epoch_a: RasterLayer, epoch_b: RasterLayer,
                    species, years: float) -> float:
    """Mean nearest-source displacement (m) of newly occupied cells per year.

    Over all cells holding the species in epoch_b but not epoch_a, the mean
    euclidean distance from the cell center to the closest epoch_a cell of
    the same species, divided by the elapsed years.
    """
    if isinstance(species, str):
        if species not in SPECIES_CODES:
            raise ValidationError(f"unknown species {species!r}")
        code = SPECIES_CODES[species]
    else:
        code = int(species)
    if not years > 0:
        raise ValidationError(f"years must be > 0, got {years}")
    spec = require_aligned([epoch_a, epoch_b])

    src = epoch_a.values == code
    if not src.any():
        raise ValidationError(f"no source population of species {species!r}")
    new = (epoch_b.values == code) & ~src
    if not new.any():
        return 0.0

    xs, ys = spec.cell_centers()
    gx, gy = np.meshgrid(xs, ys)
    sx = gx[src]
    sy = gy[src]
    nx = gx[new]
    ny = gy[new]
    total = 0.0
    chunk = max(1, int(5e6 // max(len(sx), 1)))
    for lo in range(0, len(nx), chunk):
        cx = nx[lo:lo + chunk, None] - sx[None, :]
        cy = ny[lo:lo + chunk, None] - sy[None, :]
        d2 = cx * cx + cy * cy
        total += np.sqrt(d2.min(axis=1)).sum()
    return (total / len(nx)) / years


def species_raster(spec: GridSpec, features, name: str = "species") -> RasterLayer:
    """Categorical raster of the dominant tree species per cell.

    Majority of tree points in each cell, ties by smaller species code;
    cells without trees get NO_SPECIES.
    """
    counts = np.zeros((spec.nrows, spec.ncols, len(TREE_SPECIES) + 1),
                      dtype=np.int64)
    for f in features:
        if f.kind != "tree" or f.geometry.type != "Point":
            continue
        species = f.attributes.get("species")
        code = SPECIES_CODES.get(species)
        if code is None:
            continue
        x, y = f.geometry.coordinates
        if not spec.contains(x, y):
            continue
        i, j = spec.cell_of(x, y)
        counts[i, j, code] += 1
    values = counts.argmax(axis=2).astype(np.float64)
    values[counts.sum(axis=2) == 0] = NO_SPECIES
    return RasterLayer(spec, values, name, "species code")
