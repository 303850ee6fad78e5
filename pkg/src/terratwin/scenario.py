"""What-if siting: k-site placement, time-bounded coverage, PV-site ranking.

solve_kmedian: greedy forward selection then pairwise-swap local search
(first improvement, scanned in (chosen id, candidate id) order).
solve_cover: greedy max-new-coverage set cover over isochrones, then
reverse-order redundancy pruning.  brute_force_placement is the exhaustive
oracle for small instances.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .errors import MissingLayerError, ValidationError
from .grid import GridSpec
from .roads import RoadNetwork, travel_times_from
from .vector import Geometry

_IMPROVE_EPS = 1e-12


@dataclass
class PlacementProblem:
    net: RoadNetwork
    candidates: list[int]
    demand: list[tuple[int, float]]              # (node id, weight >= 0)
    k: int | None = None                         # k-median mode
    t_cover: float | None = None                 # cover mode, minutes
    t_mean: float | None = None                  # optional mean-time constraint
    objective: str = "mean"                      # "mean" or "max"
    speeds_kmh: dict[str, float] | None = None

    def __post_init__(self):
        if not self.candidates:
            raise ValidationError("candidates must be non-empty")
        if len(set(self.candidates)) != len(self.candidates):
            raise ValidationError("duplicate candidate ids")
        for node in self.candidates:
            self.net.require_node(node)
        for node, w in self.demand:
            self.net.require_node(node)
            if w < 0:
                raise ValidationError(f"negative demand weight at node {node}")
        if self.k is not None and not 1 <= self.k <= len(self.candidates):
            raise ValidationError(
                f"k={self.k} outside 1..{len(self.candidates)}")
        if self.objective not in ("mean", "max"):
            raise ValidationError(f"unknown objective {self.objective!r}")


@dataclass
class Placement:
    chosen: tuple[int, ...]
    objective: float
    feasible: bool
    assignment: list[tuple[int, int | None, float]] = field(default_factory=list)
    uncovered: list[int] = field(default_factory=list)
    mode: str = "kmedian"


def _time_matrix(p: PlacementProblem) -> dict[int, dict[int, float]]:
    """candidate -> {demand node -> minutes} (symmetric graph, one Dijkstra each)."""
    wanted = {node for node, _ in p.demand}
    out = {}
    for c in p.candidates:
        times = travel_times_from(p.net, c, p.speeds_kmh)
        out[c] = {n: times.get(n, math.inf) for n in wanted}
    return out


def _objective(best_times: np.ndarray, weights: np.ndarray, kind: str) -> float:
    active = weights > 0
    if not active.any():
        return 0.0
    times = best_times[active]
    if kind == "max":
        return float(times.max())
    if np.isinf(times).any():
        return math.inf
    w = weights[active]
    return float((w * times).sum() / w.sum())


def _assignment(p, matrix, chosen):
    out = []
    for node, _ in p.demand:
        best_site, best_t = None, math.inf
        for c in chosen:
            t = matrix[c][node]
            if t < best_t or (t == best_t and best_site is not None
                              and c < best_site):
                best_site, best_t = c, t
        out.append((node, best_site if best_t < math.inf else None, best_t))
    return out


def solve_kmedian(p: PlacementProblem, local_search: bool = True) -> Placement:
    """Greedy-plus-swap heuristic for weighted k-median site placement."""
    if p.k is None:
        raise ValidationError("k must be set for k-median mode")
    matrix = _time_matrix(p)
    dnodes = [node for node, _ in p.demand]
    weights = np.array([w for _, w in p.demand], dtype=np.float64)
    cols = {c: np.array([matrix[c][n] for n in dnodes]) for c in p.candidates}

    chosen: list[int] = []
    best = np.full(len(dnodes), np.inf)
    for _ in range(p.k):
        pick, pick_obj = None, math.inf
        for c in sorted(p.candidates):
            if c in chosen:
                continue
            obj = _objective(np.minimum(best, cols[c]), weights, p.objective)
            if obj < pick_obj:
                pick, pick_obj = c, obj
        if pick is None:
            # every remaining option leaves the objective infinite
            pick = next(c for c in sorted(p.candidates) if c not in chosen)
        chosen.append(pick)
        best = np.minimum(best, cols[pick])

    def obj_of(site_set):
        stack = np.vstack([cols[c] for c in site_set])
        return _objective(stack.min(axis=0), weights, p.objective)

    current = obj_of(chosen)
    if local_search:
        improved = True
        while improved:
            improved = False
            for old in sorted(chosen):
                for new in sorted(p.candidates):
                    if new in chosen:
                        continue
                    trial = [c for c in chosen if c != old] + [new]
                    trial_obj = obj_of(trial)
                    if trial_obj < current - _IMPROVE_EPS:
                        chosen = trial
                        current = trial_obj
                        improved = True
                        break
                if improved:
                    break

    feasible = math.isfinite(current)
    if p.t_mean is not None:
        feasible = feasible and current <= p.t_mean
    return Placement(chosen=tuple(sorted(chosen)), objective=current,
                     feasible=feasible,
                     assignment=_assignment(p, matrix, chosen), mode="kmedian")


def coverage_sets(p: PlacementProblem, targets) -> dict[int, frozenset[int]]:
    """candidate -> targets reachable within t_cover minutes."""
    if p.t_cover is None:
        raise ValidationError("t_cover must be set for cover mode")
    targets = set(targets)
    out = {}
    for c in p.candidates:
        times = travel_times_from(p.net, c, p.speeds_kmh, budget=p.t_cover)
        out[c] = frozenset(t for t in targets if t in times)
    return out


def solve_cover(p: PlacementProblem, targets) -> Placement:
    """Greedy set cover of targets by candidate isochrones, then pruning."""
    targets = sorted(set(targets))
    if not targets:
        raise ValidationError("cover mode needs a non-empty target set")
    for t in targets:
        p.net.require_node(t)
    cover = coverage_sets(p, targets)
    coverable = frozenset().union(*cover.values()) if cover else frozenset()
    uncoverable = sorted(set(targets) - coverable)

    chosen: list[int] = []
    remaining = set(coverable)
    while remaining:
        pick, gain = None, 0
        for c in sorted(p.candidates):
            if c in chosen:
                continue
            g = len(cover[c] & remaining)
            if g > gain:
                pick, gain = c, g
        if pick is None:
            break
        chosen.append(pick)
        remaining -= cover[pick]

    # reverse-order redundancy pruning
    for c in list(reversed(chosen)):
        others = [o for o in chosen if o != c]
        covered = set().union(*(cover[o] for o in others)) if others else set()
        if covered >= coverable:
            chosen = others

    chosen_times = {c: travel_times_from(p.net, c, p.speeds_kmh,
                                         budget=p.t_cover) for c in chosen}
    covered_by = {}
    for t in sorted(coverable):
        best_site, best_t = None, math.inf
        for c in chosen:
            tt = chosen_times[c].get(t, math.inf)
            if tt < best_t or (tt == best_t and best_site is not None
                               and c < best_site):
                best_site, best_t = c, tt
        covered_by[t] = (best_site, best_t)

    return Placement(
        chosen=tuple(sorted(chosen)), objective=float(len(chosen)),
        feasible=not uncoverable,
        assignment=[(t, s, tt) for t, (s, tt) in covered_by.items()],
        uncovered=uncoverable, mode="cover")


def brute_force_placement(p: PlacementProblem, mode: str,
                          targets=None) -> Placement:
    """Exhaustive optimum for small instances (|candidates| <= 16)."""
    if len(p.candidates) > 16:
        raise ValidationError("brute force limited to 16 candidates")
    if mode == "kmedian":
        if p.k is None:
            raise ValidationError("k must be set")
        matrix = _time_matrix(p)
        dnodes = [node for node, _ in p.demand]
        weights = np.array([w for _, w in p.demand], dtype=np.float64)
        cols = {c: np.array([matrix[c][n] for n in dnodes])
                for c in p.candidates}
        best_set, best_obj = None, math.inf
        for combo in itertools.combinations(sorted(p.candidates), p.k):
            stack = np.vstack([cols[c] for c in combo])
            obj = _objective(stack.min(axis=0), weights, p.objective)
            if obj < best_obj:
                best_set, best_obj = combo, obj
        feasible = math.isfinite(best_obj)
        if p.t_mean is not None:
            feasible = feasible and best_obj <= p.t_mean
        return Placement(chosen=tuple(sorted(best_set)), objective=best_obj,
                         feasible=feasible,
                         assignment=_assignment(p, matrix, best_set),
                         mode="kmedian")
    if mode == "cover":
        if targets is None:
            raise ValidationError("cover mode needs targets")
        targets = sorted(set(targets))
        if not targets:
            raise ValidationError("cover mode needs a non-empty target set")
        cover = coverage_sets(p, targets)
        coverable = frozenset().union(*cover.values()) if cover else frozenset()
        uncoverable = sorted(set(targets) - coverable)
        if not coverable:
            return Placement(chosen=(), objective=0.0,
                             feasible=not uncoverable, uncovered=uncoverable,
                             mode="cover")
        for size in range(1, len(p.candidates) + 1):
            for combo in itertools.combinations(sorted(p.candidates), size):
                covered = set().union(*(cover[c] for c in combo))
                if covered >= coverable:
                    return Placement(chosen=tuple(combo),
                                     objective=float(size),
                                     feasible=not uncoverable,
                                     uncovered=uncoverable, mode="cover")
    raise ValidationError(f"unknown mode {mode!r}")


# --- photovoltaic siting ------------------------------------------------------

@dataclass
class PvConstraints:
    max_slope_deg: float = 8.0
    allowed_landcover: tuple[int, ...] = (3, 4, 5)   # shrub, agriculture, bare
    max_grid_distance_m: float = 3000.0
    min_area_m2: float = 100_000.0
    weight_insolation: float = 0.5
    weight_flatness: float = 0.3
    weight_grid: float = 0.2

    def __post_init__(self):
        ws = (self.weight_insolation, self.weight_flatness, self.weight_grid)
        if any(w < 0 for w in ws):
            raise ValidationError("PV score weights must be >= 0")
        if abs(sum(ws) - 1.0) > 1e-9:
            raise ValidationError(f"PV score weights sum to {sum(ws)}, expected 1")


@dataclass
class PvZone:
    polygon: Geometry
    cell_count: int
    score: float
    component_id: int
    cells: frozenset


def _cells_outline(spec: GridSpec, cells: set[tuple[int, int]]) -> Geometry:
    """Boundary polygon of a 4-connected cell set (interior kept on the left)."""
    cs = spec.cellsize
    edges: dict[tuple[float, float], list[tuple[float, float]]] = {}

    def corner(i, j):
        # (i, j) names the top-left corner of cell (i, j)
        return (spec.xll + j * cs, spec.yll + (spec.nrows - i) * cs)

    def add(a, b):
        edges.setdefault(a, []).append(b)

    for (i, j) in cells:
        tl, tr = corner(i, j), corner(i, j + 1)
        bl, br = corner(i + 1, j), corner(i + 1, j + 1)
        if (i - 1, j) not in cells:
            add(tr, tl)
        if (i + 1, j) not in cells:
            add(bl, br)
        if (i, j - 1) not in cells:
            add(tl, bl)
        if (i, j + 1) not in cells:
            add(br, tr)

    rings = []
    while edges:
        start = min(edges)
        ring = [start]
        prev_dir = None
        cur = start
        while True:
            outs = edges[cur]
            if len(outs) == 1 or prev_dir is None:
                nxt = outs[0]
            else:
                # pinch vertex: prefer the leftmost turn to stay on one ring
                def turn(out):
                    dx, dy = out[0] - cur[0], out[1] - cur[1]
                    return prev_dir[0] * dy - prev_dir[1] * dx
                nxt = max(outs, key=turn)
            outs.remove(nxt)
            if not outs:
                del edges[cur]
            prev_dir = (nxt[0] - cur[0], nxt[1] - cur[1])
            cur = nxt
            if cur == start:
                ring.append(start)
                break
            ring.append(cur)
        rings.append(tuple(ring))
    return Geometry("Polygon", tuple(rings))


def site_pv(layers: dict, features, constraints: PvConstraints,
            grid_distance=None) -> list[PvZone]:
    """Rank 4-connected zones of cells passing all hard PV constraints.

    layers must include slope, landcover, protected_mask and insolation;
    grid_distance (distance to grid lines) is computed from grid_line
    features when not supplied.
    """
    from .proximity import distance_layer  # local import to avoid a cycle

    for name in ("slope", "landcover", "protected_mask", "insolation"):
        if name not in layers:
            raise MissingLayerError(name)
    slope = layers["slope"]
    spec = slope.spec
    if grid_distance is None:
        grid_distance = distance_layer(spec, features, "grid_line")

    ok = ((slope.values <= constraints.max_slope_deg)
          & (slope.values != spec.nodata)
          & np.isin(layers["landcover"].values, constraints.allowed_landcover)
          & (grid_distance.values <= constraints.max_grid_distance_m)
          & (layers["protected_mask"].values == 0))

    labels, n_components = ndimage.label(ok)
    min_cells = constraints.min_area_m2 / (spec.cellsize * spec.cellsize)
    score_cells = (constraints.weight_insolation * layers["insolation"].values
                   + constraints.weight_flatness
                   * (1.0 - slope.values / constraints.max_slope_deg)
                   + constraints.weight_grid
                   * (1.0 - grid_distance.values
                      / constraints.max_grid_distance_m))

    zones = []
    for comp in range(1, n_components + 1):
        mask = labels == comp
        count = int(mask.sum())
        if count < min_cells:
            continue
        cells = frozenset(zip(*np.nonzero(mask)))
        cells = frozenset((int(i), int(j)) for i, j in cells)
        score = float(score_cells[mask].mean())
        zones.append(PvZone(polygon=_cells_outline(spec, set(cells)),
                            cell_count=count, score=score,
                            component_id=comp, cells=cells))
    zones.sort(key=lambda z: (-z.score, -z.cell_count, z.component_id))
    return zones
