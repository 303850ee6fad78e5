"""Proximity services: bucket-grid spatial index, nearest queries, distance rasters.

The index is a bulk-loaded uniform cell-bucket grid over feature bounding
boxes.  Queries are exact: results are always identical to a brute-force
scan over the indexed set, with ties broken by smallest feature id.
"""

from __future__ import annotations

import math

import numpy as np

from . import _kernels
from .errors import EmptyClassError, ValidationError
from .grid import GridSpec, RasterLayer
from .vector import (Feature, FeatureCollection, bounding_box,
                     geometry_distance, geometry_segments)


class SpatialIndex:
    """Uniform bucket grid over features, optionally restricted to one kind."""

    def __init__(self, features, kind: str | None = None,
                 target_per_bucket: int = 4):
        if isinstance(features, FeatureCollection):
            features = list(features)
        if kind is not None:
            features = [f for f in features if f.kind == kind]
        self.kind = kind
        self.features: list[Feature] = sorted(features, key=lambda f: f.id)
        self._boxes = {f.id: bounding_box(f.geometry) for f in self.features}
        n = len(self.features)
        if n == 0:
            self._nx = self._ny = 0
            return
        xmin = min(b[0] for b in self._boxes.values())
        ymin = min(b[1] for b in self._boxes.values())
        xmax = max(b[2] for b in self._boxes.values())
        ymax = max(b[3] for b in self._boxes.values())
        per_axis = max(1, int(math.sqrt(n / target_per_bucket)))
        self._x0, self._y0 = xmin, ymin
        self._bw = max((xmax - xmin) / per_axis, 1e-9)
        self._bh = max((ymax - ymin) / per_axis, 1e-9)
        self._nx = per_axis
        self._ny = per_axis
        self._buckets: dict[tuple[int, int], list[Feature]] = {}
        for f in self.features:
            bxmin, bymin, bxmax, bymax = self._boxes[f.id]
            for bi in range(self._bucket_i(bymin), self._bucket_i(bymax) + 1):
                for bj in range(self._bucket_j(bxmin), self._bucket_j(bxmax) + 1):
                    self._buckets.setdefault((bi, bj), []).append(f)

    def _bucket_i(self, y: float) -> int:
        return min(max(int((y - self._y0) / self._bh), 0), self._ny - 1)

    def _bucket_j(self, x: float) -> int:
        return min(max(int((x - self._x0) / self._bw), 0), self._nx - 1)

    def __len__(self):
        return len(self.features)

    def nearest(self, x: float, y: float,
                kind: str | None = None) -> tuple[Feature, float]:
        """Closest feature (ties by smallest id) and its distance."""
        candidates_exist = any(kind is None or f.kind == kind
                               for f in self.features)
        if not candidates_exist:
            wanted = kind if kind is not None else self.kind
            raise EmptyClassError(f"no feature of kind {wanted!r}")
        bi, bj = self._bucket_i(y), self._bucket_j(x)
        min_span = min(self._bw, self._bh)
        best_f: Feature | None = None
        best_d = math.inf
        seen: set[int] = set()
        max_ring = max(self._nx, self._ny)
        for ring in range(max_ring + 1):
            if best_f is not None and (ring - 1) * min_span > best_d:
                break
            for ci, cj in self._ring_buckets(bi, bj, ring):
                for f in self._buckets.get((ci, cj), ()):
                    if f.id in seen or (kind is not None and f.kind != kind):
                        continue
                    seen.add(f.id)
                    d = geometry_distance(f.geometry, x, y)
                    if d < best_d or (best_f is not None and d == best_d
                                      and f.id < best_f.id):
                        best_d = d
                        best_f = f
        return best_f, best_d

    def within(self, x: float, y: float, radius: float,
               kind: str | None = None) -> list[tuple[Feature, float]]:
        """All features with distance <= radius, ordered by (distance, id)."""
        if radius < 0:
            raise ValidationError("radius must be >= 0")
        if self._nx == 0:
            return []
        lo_i = self._bucket_i(y - radius)
        hi_i = self._bucket_i(y + radius)
        lo_j = self._bucket_j(x - radius)
        hi_j = self._bucket_j(x + radius)
        out = []
        seen: set[int] = set()
        for ci in range(lo_i, hi_i + 1):
            for cj in range(lo_j, hi_j + 1):
                for f in self._buckets.get((ci, cj), ()):
                    if f.id in seen or (kind is not None and f.kind != kind):
                        continue
                    seen.add(f.id)
                    d = geometry_distance(f.geometry, x, y)
                    if d <= radius:
                        out.append((f, d))
        out.sort(key=lambda fd: (fd[1], fd[0].id))
        return out

    def _ring_buckets(self, bi: int, bj: int, ring: int):
        if ring == 0:
            yield (bi, bj)
            return
        for cj in range(bj - ring, bj + ring + 1):
            yield (bi - ring, cj)
            yield (bi + ring, cj)
        for ci in range(bi - ring + 1, bi + ring):
            yield (ci, bj - ring)
            yield (ci, bj + ring)


def nearest(index: SpatialIndex, p: tuple[float, float],
            kind: str | None = None) -> tuple[int, float]:
    """(feature id, distance in meters) of the nearest feature of `kind`."""
    f, d = index.nearest(p[0], p[1], kind=kind)
    return f.id, d


def distance_layer(spec: GridSpec, features, kind: str) -> RasterLayer:
    """Exact euclidean distance from every cell center to the nearest `kind`."""
    if isinstance(features, FeatureCollection):
        selected = features.of_kind(kind)
    else:
        selected = [f for f in features if f.kind == kind]
    if not selected:
        raise EmptyClassError(f"no feature of kind {kind!r}")
    xs, ys = spec.cell_centers()
    d2 = np.full(spec.shape, np.inf, dtype=np.float64)

    pxs, pys, segs = [], [], []
    polygons = []
    for f in selected:
        g = f.geometry
        if g.type == "Point":
            pxs.append(g.coordinates[0])
            pys.append(g.coordinates[1])
        else:
            segs.extend(geometry_segments(g))
            if g.type == "Polygon":
                polygons.append(g)
    if pxs:
        _kernels.point_min_dist2(xs, ys, np.array(pxs), np.array(pys), d2)
    if segs:
        _kernels.segment_min_dist2(xs, ys, np.array(segs), d2)
    dist = np.sqrt(d2)
    for g in polygons:
        inside = np.zeros(spec.shape, dtype=bool)
        edges = np.array(list(geometry_segments(g)))
        _kernels.polygon_parity(xs, ys, edges, inside)
        dist[inside] = 0.0
    return RasterLayer(spec, dist, f"dist_{kind}", "m")
