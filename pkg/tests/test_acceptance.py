"""Acceptance suite: one test per acceptance criterion, at the stated
tolerances and time budgets.  Each prints a PASS/FAIL line in the terminal
summary (see conftest.pytest_terminal_summary)."""

import datetime as dt
import functools
import json
import math
import threading
import time

import numpy as np
import pytest
from fastapi.testclient import TestClient

import conftest
from terratwin import hazard, landcover, proximity, scenario, validation
from terratwin.catalog import (CATEGORIES, CatalogStore, LayerCatalog,
                               CatalogEntry, staleness_report)
from terratwin.events import split_by_date
from terratwin.firesim import (BURNED, BURNING, FireParams, escape_route,
                               simulate_fire)
from terratwin.grid import GridSpec, RasterLayer
from terratwin.model import save_model
from terratwin.roads import travel_times_from
from terratwin.server import create_app
from terratwin.vector import Feature, FeatureCollection, geometry_distance, point

from conftest import make_layer
from test_firesim import FIXTURE, escape_brute_force
from test_roads import floyd_warshall, random_network
from test_scenario import random_problem

#: recorded at the first verified run of the pinned generator (seed 42):
#: 46 of 49 held-out landslide events fell in class >= 3 cells
RECORDED_LANDSLIDE_RECALL = 46 / 49

DATE_SPLIT = dt.date(2022, 1, 1)


def criterion(name):
    def decorate(fn):
        @functools.wraps(fn)
        def wrapper(*args, **kwargs):
            try:
                fn(*args, **kwargs)
            except BaseException:
                conftest.ACCEPTANCE_RESULTS.append((name, False))
                raise
            conftest.ACCEPTANCE_RESULTS.append((name, True))
        return wrapper
    return decorate


@criterion("routing oracle: travel_time equals Floyd-Warshall on 200 graphs")
def test_routing_oracle():
    start = time.perf_counter()
    rng = np.random.default_rng(2025)
    for trial in range(200):
        net = random_network(rng, int(rng.integers(5, 51)))
        ids, expected = floyd_warshall(net)
        pos = {n: k for k, n in enumerate(ids)}
        for a in ids:
            times = travel_times_from(net, a)
            for b in ids:
                want = expected[pos[a], pos[b]]
                got = times.get(b, math.inf)
                if math.isinf(want):
                    assert math.isinf(got)
                else:
                    assert got == pytest.approx(want, rel=1e-9)
    elapsed = time.perf_counter() - start
    assert elapsed < 5.0, f"routing oracle took {elapsed:.2f}s (budget 5s)"


@criterion("distance oracle: 64x64 distance_layer equals brute force exactly")
def test_distance_oracle():
    start = time.perf_counter()
    rng = np.random.default_rng(64)
    spec = GridSpec(ncols=64, nrows=64, xll=0.0, yll=0.0, cellsize=100.0)
    feats = [Feature(k, "amenity_school", point(x, y))
             for k, (x, y) in enumerate(rng.random((20, 2)) * 6400.0)]
    layer = proximity.distance_layer(spec, FeatureCollection(feats),
                                     "amenity_school")
    for i in range(64):
        for j in range(64):
            x, y = spec.cell_center(i, j)
            expected = min(geometry_distance(f.geometry, x, y) for f in feats)
            assert layer.values[i, j] == expected
    elapsed = time.perf_counter() - start
    assert elapsed < 2.0, f"distance oracle took {elapsed:.2f}s (budget 2s)"


@criterion("placement optimality: kmedian and cover quality bounds on "
           "100 random instances")
def test_placement_optimality():
    start = time.perf_counter()
    rng = np.random.default_rng(77)

    for trial in range(100):
        p = random_problem(rng, int(rng.integers(6, 20)),
                           k=int(rng.integers(1, 4)))
        heuristic = scenario.solve_kmedian(p)
        greedy = scenario.solve_kmedian(p, local_search=False)
        optimum = scenario.brute_force_placement(p, "kmedian")
        assert heuristic.objective <= greedy.objective + 1e-12
        assert optimum.objective <= heuristic.objective + 1e-12
        if math.isfinite(optimum.objective) and optimum.objective > 0:
            assert heuristic.objective <= 1.2 * optimum.objective
        # swap-local optimality re-scan
        matrix = {c: travel_times_from(p.net, c) for c in p.candidates}
        weights = {n: w for n, w in p.demand}

        def objective(sites):
            num = den = 0.0
            for n, w in p.demand:
                if w == 0:
                    continue
                t = min(matrix[c].get(n, math.inf) for c in sites)
                num += w * t
                den += w
            return num / den if den else 0.0

        for old in heuristic.chosen:
            for new in p.candidates:
                if new in heuristic.chosen:
                    continue
                trial_set = [c for c in heuristic.chosen if c != old] + [new]
                assert objective(trial_set) >= heuristic.objective - 1e-9

    for trial in range(100):
        p = random_problem(rng, int(rng.integers(6, 18)),
                           t_cover=float(1.5 + rng.random() * 6))
        p.candidates = p.candidates[:15]
        nodes = sorted(p.net.nodes)
        targets = sorted(rng.choice(
            nodes, size=int(rng.integers(2, min(9, len(nodes) + 1))),
            replace=False).tolist())
        placement = scenario.solve_cover(p, targets)
        cover = scenario.coverage_sets(p, targets)
        coverable = set().union(*cover.values())
        covered = set().union(*(cover[c] for c in placement.chosen)) \
            if placement.chosen else set()
        assert covered >= coverable, "some coverable target left uncovered"
        for c in placement.chosen:
            rest = [o for o in placement.chosen if o != c]
            rest_cov = set().union(*(cover[o] for o in rest)) if rest else set()
            assert not rest_cov >= coverable, "redundant station kept"
        optimum = scenario.brute_force_placement(p, "cover", targets=targets)
        if coverable:
            harmonic = sum(1.0 / i for i in range(1, len(coverable) + 1))
            assert len(placement.chosen) <= harmonic * optimum.objective + 1e-9

    elapsed = time.perf_counter() - start
    assert elapsed < 60.0, f"placement took {elapsed:.1f}s (budget 60s)"


@criterion("hazard classes: threshold-table sweep and scenario monotonicity")
def test_hazard_classes():
    def table_oracle(r):
        if r < 0.2:
            return 1
        if r < 0.4:
            return 2
        if r < 0.6:
            return 3
        if r < 0.8:
            return 4
        return 5

    sweep = np.round(np.arange(0.0, 1.0 + 1e-9, 0.01), 10)
    classes = hazard.classify(make_layer(sweep.reshape(1, -1))).values[0]
    for r, got in zip(sweep, classes):
        assert int(got) == table_oracle(r), f"r={r}"

    rng = np.random.default_rng(5)
    s = make_layer(rng.random((32, 32)))
    d = make_layer(rng.random((32, 32)))
    base = hazard.classify(hazard.risk_score(
        s, d, 0.5, hazard.ClimateScenario.baseline(), "wildfire"))
    for m in (1.0, 1.1, 1.3, 2.0):
        scn = hazard.ClimateScenario(f"m{m}", {p: m for p in hazard.PERILS})
        bumped = hazard.classify(hazard.risk_score(s, d, 0.5, scn, "wildfire"))
        assert np.all(bumped.values >= base.values), f"multiplier {m}"


@criterion("synthetic recall regression: pinned landslide recall >= 0.85")
def test_recall_regression(pinned_model):
    start = time.perf_counter()
    train, held = split_by_date(pinned_model.events, DATE_SPLIT)
    assert train and held, "date split must leave events on both sides"
    _, classes = hazard.risk_pipeline(pinned_model.layers, train, "landslide")
    recall = hazard.validate_recall(classes, held, "landslide",
                                    threshold_class=3)
    assert recall >= 0.85
    assert recall == pytest.approx(RECORDED_LANDSLIDE_RECALL, abs=1e-12), \
        "regression drift against the recorded value"
    elapsed = time.perf_counter() - start
    assert elapsed < 30.0, f"recall regression took {elapsed:.1f}s (budget 30s)"


@criterion("fire CA: containment, rotation equivariance, hand-traced fixture, "
           "escape brute force")
def test_fire_ca():
    # zero-fuel containment
    fuel = make_layer(np.zeros((9, 9)))
    fuel.values[4, 4] = 1.0
    sim = simulate_fire(fuel, [(4, 4)], FireParams(p0=0.9, burn_duration=2),
                        max_steps=20)
    assert sim.num_steps == 2
    assert np.count_nonzero((sim.states[-1].grid == BURNED)
                            | (sim.states[-1].grid == BURNING)) == 1

    # 33x33 deterministic rotation equivariance
    rng = np.random.default_rng(33)
    vals = rng.random((33, 33)) * 0.7 + 0.3
    params = FireParams(p0=0.7, wind_speed=5.0, wind_dir_deg=90.0,
                        wind_coeff=0.12, burn_duration=3)
    base = simulate_fire(make_layer(vals), [(16, 16)], params, max_steps=9)
    rotated = simulate_fire(
        make_layer(np.rot90(vals)), [(16, 16)],
        FireParams(p0=0.7, wind_speed=5.0, wind_dir_deg=0.0, wind_coeff=0.12,
                   burn_duration=3), max_steps=9)
    assert base.num_steps == rotated.num_steps
    for sa, sb in zip(base.states, rotated.states):
        assert np.array_equal(np.rot90(sa.grid), sb.grid)

    # hand-traced 5x5 fixture
    doc = json.loads(FIXTURE.read_text())
    fuel5 = np.ones((5, 5))
    fuel5[:, doc["barrier_col"]] = 0.0
    p = doc["params"]
    sim5 = simulate_fire(
        make_layer(fuel5), [tuple(c) for c in doc["ignition"]],
        FireParams(p0=p["p0"], burn_duration=p["burn_duration"],
                   minutes_per_step=p["minutes_per_step"]), max_steps=20)
    expected = [np.array(s, dtype=np.int8) for s in doc["states"]]
    assert sim5.num_steps == len(expected) - 1
    for t, want in enumerate(expected):
        assert np.array_equal(sim5.states[t].grid, want)

    # escape vs time-expanded brute force on graphs of <= 10 nodes
    from terratwin.roads import Edge, RoadNetwork
    for seed in range(6):
        rng = np.random.default_rng(400 + seed)
        fuel_vals = (rng.random((12, 12)) > 0.4).astype(float)
        ig = tuple(np.argwhere(fuel_vals > 0)[0])
        sim_r = simulate_fire(make_layer(fuel_vals), [ig],
                              FireParams(p0=0.7, burn_duration=3,
                                         minutes_per_step=1.0), max_steps=10)
        n_nodes = int(rng.integers(4, 11))
        coords = {k: tuple(rng.random(2) * 1200.0) for k in range(n_nodes)}
        edges = []
        for a in range(1, n_nodes):
            b = int(rng.integers(a))
            edges.append(Edge(a, b, "dirt",
                              math.dist(coords[a], coords[b]) * 1.1 + 1.0))
        net = RoadNetwork(coords, edges)
        route = escape_route(net, 0, sim_r, walk_speed_mps=1.5)
        expected_route = escape_brute_force(net, 0, sim_r, 1.5)
        if expected_route is None:
            assert not route.feasible
        else:
            assert route.feasible
            assert route.minutes == pytest.approx(expected_route[1], abs=1e-9)


@criterion("spread velocity: 3-cell front over 10 years is exactly 30 m/yr")
def test_spread_velocity():
    spec = GridSpec(ncols=8, nrows=8, xll=0.0, yll=0.0, cellsize=100.0)
    a = np.zeros((8, 8))
    a[:, 0] = 1
    b = a.copy()
    b[:, 3] = 1  # every new cell is exactly 300 m from the old front
    got = landcover.spread_velocity(
        RasterLayer(spec, a, "a"), RasterLayer(spec, b, "b"), 1, 10.0)
    assert got == 30.0


@criterion("pipeline: staleness, idempotent updates, atomic version swap")
def test_pipeline(tmp_path, small_model):
    entries = {f"entry_{cat}": CatalogEntry(category=cat, version_year=2024,
                                            source="x", path="p",
                                            checksum="sha256:0")
               for cat in CATEGORIES}
    report = staleness_report(LayerCatalog("v0001", entries), 2025)
    assert report.stale_categories == sorted(CATEGORIES)
    assert staleness_report(LayerCatalog("v0001", entries), 2024).empty

    model_dir = tmp_path / "model"
    save_model(small_model, model_dir)
    store = CatalogStore(model_dir)
    store.initialize(2024)
    payload = tmp_path / "fuel.asc"
    payload.write_bytes((model_dir / "layers" / "fuel.asc").read_bytes())
    _, diffs1 = store.apply_update("land_cover", [payload], 2025)
    _, diffs2 = store.apply_update("land_cover", [payload], 2025)
    assert all(d.unchanged for d in diffs2), "second identical payload"

    stop = threading.Event()
    problems = []

    def reader():
        while not stop.is_set():
            try:
                catalog = store.load(verify_checksums=True)
            except Exception as exc:  # noqa: BLE001
                problems.append(repr(exc))
                return

    threads = [threading.Thread(target=reader) for _ in range(4)]
    for t in threads:
        t.start()
    for _ in range(4):
        store.apply_update("land_cover", [payload], 2025)
    stop.set()
    for t in threads:
        t.join()
    assert problems == [], f"readers saw a torn version: {problems[:3]}"


@criterion("representative validation: k=8 reduces checks >= 10x, all pass")
def test_representative_validation(pinned_model):
    vectors, _ = validation.cell_feature_vectors(pinned_model)
    clusters = validation.cluster_scenarios(vectors, 8, seed=0)
    checks = validation.default_service_checks(pinned_model)
    report = validation.run_representative_suite(clusters.representatives,
                                                 checks)
    full_grid = vectors.shape[0] * len(checks)
    assert report.executed * 10 <= full_grid, "reduction below 10x"
    assert report.all_passed, [f"{r.check}@{r.representative}: {r.detail}"
                               for r in report.failures]


@criterion("API equivalence: endpoints equal library bit-for-bit; heatmap "
           "rows normalized")
def test_api_equivalence(small_model):
    client = TestClient(create_app(model=small_model))
    model = small_model
    rng = np.random.default_rng(50)
    risk_layer, class_layer = hazard.risk_pipeline(model.layers, model.events,
                                                   "wildfire")
    index = proximity.SpatialIndex(model.features, kind="tree")
    xmin, ymin, xmax, ymax = model.spec.extent
    roles = list(np.random.default_rng(1).choice(
        ["bank_insurance", "farmer", "municipality"], size=50))
    for k in range(50):
        x = float(xmin + rng.random() * (xmax - xmin))
        y = float(ymin + rng.random() * (ymax - ymin))
        body = client.get(f"/api/v1/risk/wildfire?x={x}&y={y}",
                          headers={"X-Role": str(roles[k])}).json()
        i, j = model.spec.cell_of(x, y)
        assert body["score"] == risk_layer.values[i, j]
        assert body["class"] == int(class_layer.values[i, j])
        prox = client.get(f"/api/v1/proximity/tree?x={x}&y={y}",
                          headers={"X-Role": str(roles[k])}).json()
        fid, dist = proximity.nearest(index, (x, y), kind="tree")
        assert prox["feature_id"] == fid
        assert prox["distance_m"] == dist

    matrix = np.array(client.get("/api/v1/telemetry/heatmap").json()["matrix"])
    for row in matrix:
        assert row.max() == pytest.approx(1.0) or np.all(row == 0.0)
