"""Road network: graph model, JSON I/O, travel times, isochrones, snapping.

Edge travel time is length / speed(road_class); the speed table is
configurable, defaulting to highway 90, primary 60, secondary 40,
dirt 20 km/h.  Times are minutes; unreachable is math.inf (a value,
not an error).
"""

from __future__ import annotations

import heapq
import json
import math
from dataclasses import dataclass

from .errors import ParseError, UnknownNodeError, ValidationError

ROAD_CLASSES = ("highway", "primary", "secondary", "dirt")

DEFAULT_SPEEDS_KMH = {"highway": 90.0, "primary": 60.0,
                      "secondary": 40.0, "dirt": 20.0}


@dataclass(frozen=True)
class Edge:
    a: int
    b: int
    road_class: str
    length: float  # meters

    def __post_init__(self):
        if self.road_class not in ROAD_CLASSES:
            raise ValidationError(f"unknown road class {self.road_class!r}")
        if not self.length > 0:
            raise ValidationError(f"edge {self.a}-{self.b}: length must be > 0")


class RoadNetwork:
    """Undirected graph; immutable after construction."""

    def __init__(self, nodes: dict[int, tuple[float, float]], edges):
        self.nodes = dict(nodes)
        self.edges: tuple[Edge, ...] = tuple(edges)
        self._adj: dict[int, list[tuple[int, Edge]]] = {n: [] for n in self.nodes}
        for e in self.edges:
            if e.a not in self.nodes or e.b not in self.nodes:
                raise ValidationError(f"edge {e.a}-{e.b}: unknown endpoint")
            straight = _euclid(self.nodes[e.a], self.nodes[e.b])
            if e.length < straight - 1e-6:
                raise ValidationError(
                    f"edge {e.a}-{e.b}: length {e.length} shorter than the "
                    f"straight-line distance {straight}")
            self._adj[e.a].append((e.b, e))
            self._adj[e.b].append((e.a, e))

    def __len__(self):
        return len(self.nodes)

    def neighbors(self, node: int):
        return self._adj[node]

    def require_node(self, node: int) -> None:
        if node not in self.nodes:
            raise UnknownNodeError(f"unknown node id {node}")


def _euclid(p, q) -> float:
    dx = p[0] - q[0]
    dy = p[1] - q[1]
    return math.sqrt(dx * dx + dy * dy)


def edge_minutes(edge: Edge, speeds_kmh: dict[str, float] | None = None) -> float:
    speeds = speeds_kmh if speeds_kmh is not None else DEFAULT_SPEEDS_KMH
    meters_per_min = speeds[edge.road_class] * 1000.0 / 60.0
    return edge.length / meters_per_min


def travel_times_from(net: RoadNetwork, origin: int,
                      speeds_kmh: dict[str, float] | None = None,
                      budget: float = math.inf) -> dict[int, float]:
    """Single-source shortest times in minutes (Dijkstra), pruned at budget."""
    net.require_node(origin)
    times = {origin: 0.0}
    done = set()
    heap = [(0.0, origin)]
    while heap:
        t, node = heapq.heappop(heap)
        if node in done:
            continue
        done.add(node)
        if t > budget:
            continue
        for other, edge in net.neighbors(node):
            nt = t + edge_minutes(edge, speeds_kmh)
            if nt < times.get(other, math.inf) and nt <= budget:
                times[other] = nt
                heapq.heappush(heap, (nt, other))
    return {n: t for n, t in times.items() if t <= budget}


def travel_time(net: RoadNetwork, origin: int, dest: int,
                speeds_kmh: dict[str, float] | None = None) -> float:
    """Shortest travel time in minutes; math.inf when unreachable."""
    net.require_node(origin)
    net.require_node(dest)
    times = travel_times_from(net, origin, speeds_kmh)
    return times.get(dest, math.inf)


def isochrone(net: RoadNetwork, sources, budget_min: float,
              speeds_kmh: dict[str, float] | None = None) -> set[int]:
    """Nodes whose multi-source shortest time is <= budget_min."""
    sources = list(sources)
    if not sources:
        raise ValidationError("isochrone needs at least one source")
    if budget_min < 0:
        raise ValidationError(f"negative time budget: {budget_min}")
    for s in sources:
        net.require_node(s)
    times = {s: 0.0 for s in sources}
    done = set()
    heap = [(0.0, s) for s in sources]
    heapq.heapify(heap)
    while heap:
        t, node = heapq.heappop(heap)
        if node in done:
            continue
        done.add(node)
        for other, edge in net.neighbors(node):
            nt = t + edge_minutes(edge, speeds_kmh)
            if nt <= budget_min and nt < times.get(other, math.inf):
                times[other] = nt
                heapq.heappush(heap, (nt, other))
    return {n for n, t in times.items() if t <= budget_min}


def snap(net: RoadNetwork, p: tuple[float, float]) -> int:
    """Nearest node by euclidean distance; ties broken by smallest id."""
    if not net.nodes:
        raise ValidationError("cannot snap to an empty network")
    best_id = None
    best_d = math.inf
    for nid in sorted(net.nodes):
        d = _euclid(net.nodes[nid], p)
        if d < best_d:
            best_d = d
            best_id = nid
    return best_id


# --- JSON I/O ----------------------------------------------------------------

def write_roads(net: RoadNetwork, path) -> None:
    doc = {
        "nodes": [{"id": nid, "x": x, "y": y}
                  for nid, (x, y) in sorted(net.nodes.items())],
        "edges": [{"a": e.a, "b": e.b, "class": e.road_class,
                   "length": e.length} for e in net.edges],
    }
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(doc, fh, indent=1, sort_keys=True)
        fh.write("\n")


def read_roads(path) -> RoadNetwork:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON: {exc.msg}", line=exc.lineno) from None
    try:
        nodes = {int(n["id"]): (float(n["x"]), float(n["y"]))
                 for n in doc["nodes"]}
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed node record: {exc}") from None
    edges = []
    for raw in doc.get("edges", []):
        try:
            a, b = int(raw["a"]), int(raw["b"])
            cls = str(raw["class"])
            if "length" in raw and raw["length"] is not None:
                length = float(raw["length"])
            else:
                length = _euclid(nodes[a], nodes[b])
            edges.append(Edge(a, b, cls, length))
        except KeyError as exc:
            raise ParseError(f"edge record missing {exc}") from None
        except (TypeError, ValueError, ValidationError) as exc:
            raise ParseError(f"malformed edge record: {exc}") from None
    return RoadNetwork(nodes, edges)
