import itertools
import math

import numpy as np
import pytest

from terratwin.errors import ParseError, UnknownNodeError, ValidationError
from terratwin.roads import (Edge, RoadNetwork, edge_minutes, isochrone,
                             read_roads, snap, travel_time, travel_times_from,
                             write_roads)


def line_network(n, minutes_per_edge=1.0, road_class="secondary"):
    """n nodes on a line, each edge taking minutes_per_edge at class speed."""
    speed_m_per_min = {"highway": 1500.0, "primary": 1000.0,
                       "secondary": 2000.0 / 3.0, "dirt": 1000.0 / 3.0}
    length = minutes_per_edge * speed_m_per_min[road_class]
    nodes = {k: (k * length, 0.0) for k in range(n)}
    edges = [Edge(k, k + 1, road_class, length) for k in range(n - 1)]
    return RoadNetwork(nodes, edges)


def random_network(rng, n_nodes):
    nodes = {k: tuple(rng.random(2) * 10_000) for k in range(n_nodes)}
    edges = []
    order = rng.permutation(n_nodes)
    for idx in range(1, n_nodes):
        a, b = int(order[idx]), int(order[rng.integers(idx)])
        d = math.dist(nodes[a], nodes[b])
        edges.append(Edge(a, b, ("highway", "primary", "secondary",
                                 "dirt")[int(rng.integers(4))],
                          d * (1 + rng.random() * 0.4) + 1e-9))
    for _ in range(n_nodes // 2):
        a, b = int(rng.integers(n_nodes)), int(rng.integers(n_nodes))
        if a != b:
            d = math.dist(nodes[a], nodes[b])
            edges.append(Edge(a, b, "primary", d * (1 + rng.random()) + 1e-9))
    return RoadNetwork(nodes, edges)


def floyd_warshall(net):
    ids = sorted(net.nodes)
    pos = {n: k for k, n in enumerate(ids)}
    n = len(ids)
    dist = np.full((n, n), np.inf)
    np.fill_diagonal(dist, 0.0)
    for e in net.edges:
        t = edge_minutes(e)
        a, b = pos[e.a], pos[e.b]
        dist[a, b] = min(dist[a, b], t)
        dist[b, a] = min(dist[b, a], t)
    for k in range(n):
        dist = np.minimum(dist, dist[:, k][:, None] + dist[k, :][None, :])
    return ids, dist


class TestNetworkValidation:
    def test_unknown_road_class(self):
        with pytest.raises(ValidationError):
            Edge(0, 1, "autobahn", 100.0)

    def test_nonpositive_length(self):
        with pytest.raises(ValidationError):
            Edge(0, 1, "primary", 0.0)

    def test_length_shorter_than_euclid(self):
        nodes = {0: (0.0, 0.0), 1: (1000.0, 0.0)}
        with pytest.raises(ValidationError, match="straight-line"):
            RoadNetwork(nodes, [Edge(0, 1, "primary", 500.0)])

    def test_unknown_endpoint(self):
        with pytest.raises(ValidationError):
            RoadNetwork({0: (0, 0)}, [Edge(0, 9, "primary", 10.0)])


class TestTravelTime:
    def test_origin_equals_dest(self):
        net = line_network(3)
        assert travel_time(net, 1, 1) == 0.0

    def test_single_secondary_edge(self):
        # 1500 m at 40 km/h -> 2.25 min
        nodes = {0: (0.0, 0.0), 1: (1500.0, 0.0)}
        net = RoadNetwork(nodes, [Edge(0, 1, "secondary", 1500.0)])
        assert travel_time(net, 0, 1) == pytest.approx(2.25, abs=1e-12)

    def test_unreachable_is_inf(self):
        net = RoadNetwork({0: (0, 0), 1: (10, 0)}, [])
        assert travel_time(net, 0, 1) == math.inf

    def test_unknown_node(self):
        net = line_network(2)
        with pytest.raises(UnknownNodeError):
            travel_time(net, 0, 99)

    @pytest.mark.parametrize("seed", range(10))
    def test_matches_floyd_warshall(self, seed):
        rng = np.random.default_rng(seed)
        net = random_network(rng, int(rng.integers(5, 50)))
        ids, expected = floyd_warshall(net)
        for a in ids:
            times = travel_times_from(net, a)
            for b in ids:
                got = times.get(b, math.inf)
                want = expected[ids.index(a), ids.index(b)]
                if math.isinf(want):
                    assert math.isinf(got)
                else:
                    assert got == pytest.approx(want, rel=1e-9)

    def test_triangle_inequality(self):
        rng = np.random.default_rng(99)
        net = random_network(rng, 20)
        ids = sorted(net.nodes)
        times = {a: travel_times_from(net, a) for a in ids}
        for a, b, c in itertools.islice(itertools.permutations(ids, 3), 500):
            tab = times[a].get(b, math.inf)
            tbc = times[b].get(c, math.inf)
            tac = times[a].get(c, math.inf)
            assert tac <= tab + tbc + 1e-9


class TestIsochrone:
    def test_zero_budget_is_sources(self):
        net = line_network(5)
        assert isochrone(net, {2}, 0.0) == {2}

    def test_infinite_budget_is_component(self):
        net = RoadNetwork({0: (0, 0), 1: (100, 0), 2: (5000, 5000)},
                          [Edge(0, 1, "primary", 150.0)])
        assert isochrone(net, {0}, math.inf) == {0, 1}

    def test_line_graph_budget(self):
        net = line_network(6, minutes_per_edge=1.0)
        assert isochrone(net, {0}, 2.5) == {0, 1, 2}

    def test_negative_budget_rejected(self):
        with pytest.raises(ValidationError):
            isochrone(line_network(2), {0}, -1.0)

    def test_empty_sources_rejected(self):
        with pytest.raises(ValidationError):
            isochrone(line_network(2), set(), 1.0)

    def test_monotone_in_budget(self):
        rng = np.random.default_rng(5)
        net = random_network(rng, 30)
        budgets = sorted(rng.random(6) * 20)
        sets = [isochrone(net, {0, 3}, t) for t in budgets]
        for small, big in zip(sets, sets[1:]):
            assert small <= big

    def test_matches_travel_times(self):
        rng = np.random.default_rng(8)
        net = random_network(rng, 25)
        budget = 7.5
        got = isochrone(net, {0}, budget)
        times = travel_times_from(net, 0)
        expected = {n for n, t in times.items() if t <= budget}
        assert got == expected


class TestSnap:
    def test_at_node(self):
        net = line_network(3)
        assert snap(net, net.nodes[1]) == 1

    def test_equidistant_prefers_smaller_id(self):
        net = RoadNetwork({3: (0.0, 0.0), 7: (100.0, 0.0)}, [])
        assert snap(net, (50.0, 0.0)) == 3

    def test_matches_brute_force(self):
        rng = np.random.default_rng(77)
        net = random_network(rng, 40)
        for _ in range(200):
            p = tuple(rng.random(2) * 10_000)
            expected = min(sorted(net.nodes),
                           key=lambda n: (math.dist(net.nodes[n], p), n))
            assert snap(net, p) == expected


class TestRoadsIO:
    def test_round_trip(self, tmp_path):
        rng = np.random.default_rng(3)
        net = random_network(rng, 12)
        path = tmp_path / "roads.json"
        write_roads(net, path)
        back = read_roads(path)
        assert back.nodes == net.nodes
        assert [(e.a, e.b, e.road_class, e.length) for e in back.edges] == \
               [(e.a, e.b, e.road_class, e.length) for e in net.edges]

    def test_absent_length_computed_euclidean(self, tmp_path):
        path = tmp_path / "roads.json"
        path.write_text('{"nodes": [{"id": 0, "x": 0, "y": 0},'
                        '{"id": 1, "x": 300, "y": 400}],'
                        '"edges": [{"a": 0, "b": 1, "class": "dirt"}]}')
        net = read_roads(path)
        assert net.edges[0].length == 500.0

    def test_bad_class_is_parse_error(self, tmp_path):
        path = tmp_path / "roads.json"
        path.write_text('{"nodes": [{"id": 0, "x": 0, "y": 0},'
                        '{"id": 1, "x": 1, "y": 0}],'
                        '"edges": [{"a": 0, "b": 1, "class": "maglev"}]}')
        with pytest.raises(ParseError):
            read_roads(path)
