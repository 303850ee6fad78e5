"""Vector features: planar geometry primitives, feature collections, JSON I/O.

Geometry lives in the same planar meter coordinates as the raster grid.
Distance and containment here are the canonical scalar definitions; the
accelerated kernels replicate these formulas operation-for-operation so
results stay bit-identical across code paths.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

from .errors import ParseError, ValidationError
from .grid import GridSpec

GEOMETRY_TYPES = ("Point", "LineString", "Polygon")

KNOWN_KINDS = frozenset({
    "amenity_supermarket", "amenity_hospital", "amenity_pharmacy",
    "amenity_school", "beach", "blue_flag_beach", "tree", "swimming_pool",
    "building", "region", "protected_zone", "grid_line",
})

AMENITY_KINDS = ("amenity_supermarket", "amenity_hospital",
                 "amenity_pharmacy", "amenity_school")


@dataclass(frozen=True)
class Geometry:
    """Point, LineString or Polygon, GeoJSON-style.

    coordinates: Point (x, y); LineString ((x, y), ...);
    Polygon (ring, ...) with each ring closed (first == last vertex).
    """

    type: str
    coordinates: tuple

    def __post_init__(self):
        if self.type not in GEOMETRY_TYPES:
            raise ValidationError(f"unknown geometry type {self.type!r}")

    def vertices(self):
        """All vertices as (x, y) pairs."""
        if self.type == "Point":
            return (self.coordinates,)
        if self.type == "LineString":
            return self.coordinates
        return tuple(v for ring in self.coordinates for v in ring)


def point(x: float, y: float) -> Geometry:
    return Geometry("Point", (float(x), float(y)))


def linestring(coords) -> Geometry:
    pts = tuple((float(x), float(y)) for x, y in coords)
    if len(pts) < 2:
        raise ValidationError("LineString needs at least 2 vertices")
    return Geometry("LineString", pts)


def polygon(*rings) -> Geometry:
    out = []
    for ring in rings:
        pts = tuple((float(x), float(y)) for x, y in ring)
        if len(pts) < 4:
            raise ValidationError("polygon ring needs at least 4 vertices")
        if pts[0] != pts[-1]:
            raise ValidationError("ring not closed")
        out.append(pts)
    if not out:
        raise ValidationError("polygon needs at least one ring")
    geom = Geometry("Polygon", tuple(out))
    _check_rings_simple(geom)
    return geom


def rectangle(xmin: float, ymin: float, xmax: float, ymax: float) -> Geometry:
    return polygon([(xmin, ymin), (xmax, ymin), (xmax, ymax),
                    (xmin, ymax), (xmin, ymin)])


# --- scalar geometry --------------------------------------------------------

def segment_point_distance(px: float, py: float, ax: float, ay: float,
                           bx: float, by: float) -> float:
    """Distance from point (px, py) to segment (a, b).

    Canonical formula: the kernels mirror this exactly.
    """
    dx = bx - ax
    dy = by - ay
    l2 = dx * dx + dy * dy
    if l2 == 0.0:
        cx, cy = ax, ay
    else:
        t = ((px - ax) * dx + (py - ay) * dy) / l2
        if t < 0.0:
            t = 0.0
        elif t > 1.0:
            t = 1.0
        cx = ax + t * dx
        cy = ay + t * dy
    ex = px - cx
    ey = py - cy
    return math.sqrt(ex * ex + ey * ey)


def _on_segment(px, py, ax, ay, bx, by) -> bool:
    cross = (bx - ax) * (py - ay) - (by - ay) * (px - ax)
    if cross != 0.0:
        return False
    return (min(ax, bx) <= px <= max(ax, bx)
            and min(ay, by) <= py <= max(ay, by))


def point_in_polygon(geom: Geometry, x: float, y: float) -> bool:
    """Even-odd containment; points on a ring edge count as inside."""
    if geom.type != "Polygon":
        raise ValidationError("point_in_polygon needs a Polygon")
    inside = False
    for ring in geom.coordinates:
        for k in range(len(ring) - 1):
            ax, ay = ring[k]
            bx, by = ring[k + 1]
            if _on_segment(x, y, ax, ay, bx, by):
                return True
            if (ay > y) != (by > y):
                x_cross = ax + (bx - ax) * (y - ay) / (by - ay)
                if x < x_cross:
                    inside = not inside
    return inside


def ring_area(ring) -> float:
    """Signed shoelace area of one ring."""
    acc = 0.0
    for k in range(len(ring) - 1):
        ax, ay = ring[k]
        bx, by = ring[k + 1]
        acc += ax * by - bx * ay
    return acc / 2.0


def polygon_area(geom: Geometry) -> float:
    """Area of exterior minus holes (absolute exterior orientation)."""
    rings = geom.coordinates
    area = abs(ring_area(rings[0]))
    for ring in rings[1:]:
        area -= abs(ring_area(ring))
    return area


def geometry_distance(geom: Geometry, x: float, y: float) -> float:
    """Euclidean distance from a point to a geometry (0 inside polygons)."""
    if geom.type == "Point":
        gx, gy = geom.coordinates
        dx = x - gx
        dy = y - gy
        return math.sqrt(dx * dx + dy * dy)
    if geom.type == "LineString":
        pts = geom.coordinates
        return min(segment_point_distance(x, y, *pts[k], *pts[k + 1])
                   for k in range(len(pts) - 1))
    if point_in_polygon(geom, x, y):
        return 0.0
    best = math.inf
    for ring in geom.coordinates:
        for k in range(len(ring) - 1):
            d = segment_point_distance(x, y, *ring[k], *ring[k + 1])
            if d < best:
                best = d
    return best


def geometry_segments(geom: Geometry):
    """All (ax, ay, bx, by) segments of a LineString or Polygon boundary."""
    if geom.type == "LineString":
        pts = geom.coordinates
        for k in range(len(pts) - 1):
            yield (*pts[k], *pts[k + 1])
    elif geom.type == "Polygon":
        for ring in geom.coordinates:
            for k in range(len(ring) - 1):
                yield (*ring[k], *ring[k + 1])


def bounding_box(geom: Geometry) -> tuple[float, float, float, float]:
    xs = [v[0] for v in geom.vertices()]
    ys = [v[1] for v in geom.vertices()]
    return (min(xs), min(ys), max(xs), max(ys))


def _segments_cross(p1, p2, p3, p4) -> bool:
    """Proper crossing test for the ring-simplicity check."""
    def orient(a, b, c):
        v = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
        return 0 if v == 0 else (1 if v > 0 else -1)

    o1, o2 = orient(p1, p2, p3), orient(p1, p2, p4)
    o3, o4 = orient(p3, p4, p1), orient(p3, p4, p2)
    return o1 != o2 and o3 != o4 and o1 != 0 and o2 != 0 and o3 != 0 and o4 != 0


def _check_rings_simple(geom: Geometry) -> None:
    for ring in geom.coordinates:
        n = len(ring) - 1
        for a in range(n):
            for b in range(a + 2, n):
                if a == 0 and b == n - 1:
                    continue  # first and last edge share the closing vertex
                if _segments_cross(ring[a], ring[a + 1], ring[b], ring[b + 1]):
                    raise ValidationError("ring is self-intersecting")


# --- features ----------------------------------------------------------------

@dataclass(frozen=True)
class Feature:
    id: int
    kind: str
    geometry: Geometry
    attributes: dict = field(default_factory=dict)


@dataclass
class LoadReport:
    """What read_features had to flag: unknown kinds kept, bad features dropped."""

    unknown_kinds: list = field(default_factory=list)   # (id, kind)
    rejected: list = field(default_factory=list)        # (id, reason)

    @property
    def clean(self) -> bool:
        return not self.unknown_kinds and not self.rejected


class FeatureCollection:
    """Immutable set of features with id and kind lookups."""

    def __init__(self, features, load_report: LoadReport | None = None):
        self.features: tuple[Feature, ...] = tuple(features)
        self.by_id: dict[int, Feature] = {}
        self._by_kind: dict[str, list[Feature]] = {}
        for f in self.features:
            if f.id in self.by_id:
                raise ValidationError(f"duplicate feature id {f.id}")
            self.by_id[f.id] = f
            self._by_kind.setdefault(f.kind, []).append(f)
        self.load_report = load_report if load_report is not None else LoadReport()

    def __len__(self):
        return len(self.features)

    def __iter__(self):
        return iter(self.features)

    def of_kind(self, kind: str) -> list[Feature]:
        return list(self._by_kind.get(kind, []))

    def kinds(self) -> list[str]:
        return sorted(self._by_kind)


# --- JSON I/O ----------------------------------------------------------------

def _coords_to_json(geom: Geometry):
    if geom.type == "Point":
        return list(geom.coordinates)
    if geom.type == "LineString":
        return [list(v) for v in geom.coordinates]
    return [[list(v) for v in ring] for ring in geom.coordinates]


def _coords_from_json(gtype: str, raw):
    try:
        if gtype == "Point":
            x, y = raw
            return point(x, y)
        if gtype == "LineString":
            return linestring(raw)
        if gtype == "Polygon":
            return polygon(*raw)
    except (TypeError, ValueError) as exc:
        raise ParseError(f"bad {gtype} coordinates: {exc}") from None
    raise ParseError(f"unknown geometry type {gtype!r}")


def feature_to_json(f: Feature) -> dict:
    return {
        "id": f.id,
        "kind": f.kind,
        "geometry": {"type": f.geometry.type,
                     "coordinates": _coords_to_json(f.geometry)},
        "properties": dict(f.attributes),
    }


def write_features(collection: FeatureCollection, path) -> None:
    doc = {"features": [feature_to_json(f) for f in collection]}
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(doc, fh, indent=1, sort_keys=True)
        fh.write("\n")


def read_features(path, extent=None) -> FeatureCollection:
    """Load features; the collection's load_report lists rejects and odd kinds.

    extent may be a GridSpec or an (xmin, ymin, xmax, ymax) tuple; features
    with any vertex outside it are rejected (reported, not fatal).
    Structurally invalid geometry (open ring, self-intersection) is fatal.
    """
    if isinstance(extent, GridSpec):
        extent = extent.extent
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON: {exc.msg}", line=exc.lineno) from None
    if not isinstance(doc, dict) or "features" not in doc:
        raise ParseError('missing top-level "features" key')

    report = LoadReport()
    features = []
    for raw in doc["features"]:
        try:
            fid = int(raw["id"])
            kind = str(raw["kind"])
            gtype = raw["geometry"]["type"]
            coords = raw["geometry"]["coordinates"]
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"malformed feature record: {exc}") from None
        try:
            geom = _coords_from_json(gtype, coords)
        except ValidationError as exc:
            raise ParseError(f"feature {fid}: {exc}") from None
        if kind not in KNOWN_KINDS:
            report.unknown_kinds.append((fid, kind))
        if extent is not None:
            xmin, ymin, xmax, ymax = extent
            out = [v for v in geom.vertices()
                   if not (xmin <= v[0] <= xmax and ymin <= v[1] <= ymax)]
            if out:
                report.rejected.append((fid, "outside grid extent"))
                continue
        features.append(Feature(fid, kind, geom,
                                dict(raw.get("properties") or {})))
    return FeatureCollection(features, report)
