"""HTTP service over one loaded CountryModel.

Every successful service call increments the usage ledger for the caller's
X-Role header and the service's catalog category; responses carry the
current catalog version.  Long-running solver and simulation requests can
be deferred to background jobs polled at /api/v1/jobs/{id}.

Error contract: 400 malformed parameters, 404 unknown service/resource,
422 domain errors, all with an {"error": ...} body.
"""

from __future__ import annotations

import json
import math
import os
import threading
import uuid
from dataclasses import dataclass, field

import numpy as np
from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import FileResponse, JSONResponse

from . import firesim, hazard, landcover, proximity, scenario, telemetry
from .catalog import CatalogStore, staleness_report
from .errors import (EmptyClassError, MissingLayerError, TwinError,
                     UnknownNodeError, ValidationError)
from .events import PERILS
from .model import CountryModel, load_model
from .roads import snap
from .telemetry import UsageLedger, usage_heatmap
from .vector import KNOWN_KINDS

#: runtime estimate (cost units) above which a request becomes a job
JOB_COST_THRESHOLD = 2_000_000

SERVICE_CATEGORY = {
    "risk": "geohazard", "proximity": "proximity", "zonal": "land_cover",
    "layers": "landform", "scenario_kmedian": "proximity",
    "scenario_cover": "proximity", "scenario_pv": "landform",
    "fire": "geohazard",
}

#: the named GAEA service catalog (27 services; the unnamed remainder is
#: listed as placeholders with implemented=False)
_NAMED_SERVICES = [
    ("land_cover_map", "Land cover mapping", "land_cover", "/api/v1/layers/landcover"),
    ("land_use_change", "Land use change over time", "land_cover", "/api/v1/zonal/{region_id}"),
    ("pool_detection", "Swimming pool detection", "land_cover", "/api/v1/zonal/{region_id}"),
    ("building_detection", "Building detection", "land_cover", "/api/v1/zonal/{region_id}"),
    ("vegetation_nearby", "Vegetation and burnt areas nearby", "land_cover", "/api/v1/zonal/{region_id}"),
    ("tree_classification", "Tree detection and classification", "land_cover", "/api/v1/zonal/{region_id}"),
    ("risk_wildfire", "Wildfire risk estimation", "geohazard", "/api/v1/risk/wildfire"),
    ("risk_flood", "Flooding risk estimation", "geohazard", "/api/v1/risk/flood"),
    ("risk_landslide", "Landslide risk estimation", "geohazard", "/api/v1/risk/landslide"),
    ("risk_earthquake", "Earthquake risk estimation", "geohazard", "/api/v1/risk/earthquake"),
    ("risk_subsidence", "Land subsidence risk estimation", "geohazard", "/api/v1/risk/subsidence"),
    ("slope", "Slope", "landform", "/api/v1/layers/slope"),
    ("aspect", "Aspect", "landform", "/api/v1/layers/aspect"),
    ("geology", "Geology", "landform", "/api/v1/layers/geology"),
    ("elevation", "Elevation", "landform", "/api/v1/layers/elevation"),
    ("precipitation", "Precipitation", "climate_weather", "/api/v1/layers/precipitation"),
    ("proximity_roads", "Proximity to roads", "proximity", "/api/v1/proximity/road"),
    ("proximity_sea", "Proximity to the sea", "proximity", "/api/v1/proximity/beach"),
    ("proximity_blue_flag", "Proximity to blue-flag beaches", "proximity", "/api/v1/proximity/blue_flag_beach"),
    ("proximity_amenities", "Proximity to amenities", "proximity", "/api/v1/proximity/amenity_supermarket"),
    ("proximity_grid", "Proximity to the electricity network", "proximity", "/api/v1/proximity/grid_line"),
    ("proximity_protected", "Proximity to protected natural zones", "proximity", "/api/v1/proximity/protected_zone"),
]
_PLACEHOLDER_COUNT = 27 - len(_NAMED_SERVICES)


@dataclass
class Job:
    id: str
    status: str = "pending"            # pending | running | done | failed
    result: dict | None = None
    error: str | None = None


class NotFound(Exception):
    """Unknown service, layer, region, scenario or job (HTTP 404)."""


class JobRegistry:
    def __init__(self):
        self._jobs: dict[str, Job] = {}
        self._lock = threading.Lock()

    def submit(self, fn) -> Job:
        job = Job(id=uuid.uuid4().hex[:12])
        with self._lock:
            self._jobs[job.id] = job

        def run():
            job.status = "running"
            try:
                job.result = fn()
                job.status = "done"
            except Exception as exc:  # noqa: BLE001 - reported via polling
                job.error = f"{type(exc).__name__}: {exc}"
                job.status = "failed"

        threading.Thread(target=run, daemon=True).start()
        return job

    def get(self, job_id: str) -> Job | None:
        with self._lock:
            return self._jobs.get(job_id)


@dataclass
class AppState:
    model: CountryModel
    store: CatalogStore | None = None
    ledger: UsageLedger = field(default_factory=UsageLedger)
    jobs: JobRegistry = field(default_factory=JobRegistry)
    scenarios: dict = field(default_factory=dict)
    _risk_cache: dict = field(default_factory=dict)
    _index_cache: dict = field(default_factory=dict)
    _lock: threading.Lock = field(default_factory=threading.Lock)

    def catalog_version(self) -> str:
        if self.store is None:
            return "unversioned"
        try:
            return self.store.current_version()
        except TwinError:
            return "unversioned"

    def scenario_by_name(self, name: str) -> hazard.ClimateScenario:
        if name not in self.scenarios:
            raise NotFound(f"unknown scenario {name!r}")
        return self.scenarios[name]

    def risk_layers(self, peril: str, scenario_name: str):
        key = (peril, scenario_name)
        with self._lock:
            if key not in self._risk_cache:
                scn = self.scenario_by_name(scenario_name)
                self._risk_cache[key] = hazard.risk_pipeline(
                    self.model.layers, self.model.events, peril, scenario=scn)
            return self._risk_cache[key]

    def index(self, kind: str) -> proximity.SpatialIndex:
        with self._lock:
            if kind not in self._index_cache:
                self._index_cache[kind] = proximity.SpatialIndex(
                    self.model.features, kind=kind)
            return self._index_cache[kind]


def _load_scenarios(model_dir) -> dict:
    scenarios = {"baseline": hazard.ClimateScenario.baseline()}
    if model_dir is None:
        return scenarios
    sdir = os.path.join(os.fspath(model_dir), "scenarios")
    if os.path.isdir(sdir):
        for fn in sorted(os.listdir(sdir)):
            if fn.endswith(".json"):
                scn = hazard.ClimateScenario.from_json(os.path.join(sdir, fn))
                scenarios[scn.name] = scn
    return scenarios


def _error(status: int, message: str) -> JSONResponse:
    return JSONResponse(status_code=status, content={"error": message})


def create_app(model: CountryModel | None = None, model_dir=None,
               static_dir=None) -> FastAPI:
    """Build the service over a CountryModel (or a model directory)."""
    if model is None:
        if model_dir is None:
            raise ValidationError("create_app needs a model or model_dir")
        model = load_model(model_dir)
    store = CatalogStore(model_dir) if model_dir is not None else None
    if store is not None and not store.versions():
        store = None
    state = AppState(model=model, store=store,
                     scenarios=_load_scenarios(model_dir))

    app = FastAPI(title="terratwin", version="0.1.0", docs_url=None,
                  redoc_url=None)
    app.state.twin = state

    @app.exception_handler(RequestValidationError)
    async def malformed(request: Request, exc: RequestValidationError):
        return _error(400, f"malformed parameters: {exc.errors()[0]['msg']}")

    @app.exception_handler(ValidationError)
    async def domain_invalid(request: Request, exc: ValidationError):
        return _error(422, str(exc))

    @app.exception_handler(EmptyClassError)
    async def empty_class(request: Request, exc: EmptyClassError):
        return _error(422, str(exc))

    @app.exception_handler(MissingLayerError)
    async def missing_layer(request: Request, exc: MissingLayerError):
        return _error(422, str(exc))

    @app.exception_handler(UnknownNodeError)
    async def unknown_node(request: Request, exc: UnknownNodeError):
        return _error(404, str(exc))

    @app.exception_handler(NotFound)
    async def not_found(request: Request, exc: NotFound):
        return _error(404, str(exc))

    @app.exception_handler(TwinError)
    async def domain_error(request: Request, exc: TwinError):
        return _error(422, str(exc))

    def record(request: Request, service: str) -> None:
        role = request.headers.get("X-Role", "unknown")
        state.ledger.record(role, SERVICE_CATEGORY[service])

    def versioned(payload: dict) -> dict:
        payload["catalog_version"] = state.catalog_version()
        return payload

    # -- catalog of services ----------------------------------------------

    @app.get("/api/v1/services")
    def services():
        descriptors = []
        for sid, name, category, endpoint in _NAMED_SERVICES:
            descriptors.append({"id": sid, "name": name, "category": category,
                                "endpoint": endpoint, "implemented": True})
        for n in range(_PLACEHOLDER_COUNT):
            descriptors.append({"id": f"service_{len(_NAMED_SERVICES) + n + 1}",
                                "name": "Additional GAEA service "
                                        f"{n + 1} (not reproduced)",
                                "category": "land_cover", "endpoint": None,
                                "implemented": False})
        return versioned({"services": descriptors,
                          "layers": sorted(state.model.layers),
                          "scenarios": sorted(state.scenarios),
                          "roles": list(telemetry.ROLES)})

    # -- point services -----------------------------------------------------

    @app.get("/api/v1/risk/{peril}")
    def risk(peril: str, x: float, y: float, request: Request,
             scenario: str = "baseline"):
        name = scenario
        if peril not in PERILS:
            raise NotFound(f"unknown peril {peril!r}")
        if not state.model.spec.contains(x, y):
            raise ValidationError(f"point ({x}, {y}) outside the model grid")
        risk_layer, class_layer = state.risk_layers(peril, name)
        i, j = state.model.spec.cell_of(x, y)
        score = float(risk_layer.values[i, j])
        cls = class_layer.values[i, j]
        record(request, "risk")
        return versioned({
            "peril": peril, "x": x, "y": y, "scenario": name,
            "score": score,
            "class": int(cls) if cls != state.model.spec.nodata else None,
        })

    @app.get("/api/v1/risk/{peril}/grid")
    def risk_grid(peril: str, request: Request,
                  scenario: str = "baseline"):
        if peril not in PERILS:
            raise NotFound(f"unknown peril {peril!r}")
        risk_layer, class_layer = state.risk_layers(peril, scenario)
        record(request, "risk")
        return versioned({
            "peril": peril, "scenario": scenario,
            "spec": _spec_json(state.model.spec),
            "score": risk_layer.values.tolist(),
            "class": class_layer.values.astype(int).tolist(),
        })

    @app.get("/api/v1/proximity/{kind}")
    def proximity_query(kind: str, x: float, y: float, request: Request):
        if kind not in KNOWN_KINDS:
            raise NotFound(f"unknown feature kind {kind!r}")
        index = state.index(kind)
        fid, distance = proximity.nearest(index, (x, y), kind=kind)
        record(request, "proximity")
        return versioned({"kind": kind, "x": x, "y": y,
                          "feature_id": fid, "distance_m": distance})

    @app.get("/api/v1/zonal/{region_id}")
    def zonal(region_id: int, request: Request):
        region = state.model.features.by_id.get(region_id)
        if region is None or region.kind != "region":
            raise NotFound(f"unknown region {region_id}")
        report = landcover.zonal_report(region, state.model.features,
                                        state.model.layer("landcover"))
        record(request, "zonal")
        return versioned(report.to_json())

    @app.get("/api/v1/layers")
    def layers_list():
        return versioned({"layers": sorted(state.model.layers)})

    @app.get("/api/v1/layers/{name}")
    def layer_grid(name: str, request: Request):
        if name not in state.model.layers:
            raise NotFound(f"unknown layer {name!r}")
        layer = state.model.layers[name]
        record(request, "layers")
        return versioned({"name": name, "units": layer.units,
                          "spec": _spec_json(layer.spec),
                          "values": layer.values.tolist()})

    # -- scenario solvers --------------------------------------------------

    def _maybe_job(request_async: bool, cost: float, fn):
        if request_async or cost > JOB_COST_THRESHOLD:
            job = state.jobs.submit(fn)
            return {"job_id": job.id, "status": job.status}
        return fn()

    def _placement_json(p: scenario.Placement) -> dict:
        return {
            "chosen": list(p.chosen),
            "objective": p.objective if math.isfinite(p.objective) else None,
            "feasible": p.feasible, "mode": p.mode,
            "uncovered": list(p.uncovered),
            "assignment": [{"node": n, "site": s,
                            "minutes": t if math.isfinite(t) else None}
                           for n, s, t in p.assignment],
        }

    def _problem_from(body: dict) -> scenario.PlacementProblem:
        model = state.model
        candidates = body.get("candidates")
        if candidates is None:
            candidates = sorted(model.roads.nodes)
        demand = body.get("demand")
        if demand is None:
            demand = [[n, w] for n, w in sorted(model.populations.items())]
        return scenario.PlacementProblem(
            net=model.roads, candidates=[int(c) for c in candidates],
            demand=[(int(n), float(w)) for n, w in demand],
            k=body.get("k"), t_cover=body.get("t_cover"),
            t_mean=body.get("t_mean"),
            objective=body.get("objective", "mean"))

    @app.post("/api/v1/scenario/kmedian")
    async def scenario_kmedian(request: Request):
        body = await _json_body(request)
        if body.get("k") is None:
            raise ValidationError("k is required for kmedian")
        problem = _problem_from(body)
        record(request, "scenario_kmedian")
        cost = len(problem.candidates) ** 2 * max(len(problem.demand), 1)

        def run():
            placement = scenario.solve_kmedian(problem)
            return versioned(_placement_json(placement))

        return _maybe_job(bool(body.get("async")), cost, run)

    def risk5_targets(peril: str, scenario_name: str) -> list[int]:
        _, classes = state.risk_layers(peril, scenario_name)
        spec = state.model.spec
        cells = np.argwhere(classes.values == 5)
        nodes = set()
        for i, j in cells:
            x, y = spec.cell_center(int(i), int(j))
            nodes.add(snap(state.model.roads, (x, y)))
        return sorted(nodes)

    @app.post("/api/v1/scenario/cover")
    async def scenario_cover(request: Request):
        body = await _json_body(request)
        if body.get("t_cover") is None:
            body = dict(body)
            body["t_cover"] = 7.5
        problem = _problem_from(body)
        targets = body.get("targets")
        if targets is None:
            targets = risk5_targets(body.get("peril", "wildfire"),
                                    body.get("scenario", "baseline"))
        targets = [int(t) for t in targets]
        record(request, "scenario_cover")
        cost = len(problem.candidates) * max(len(targets), 1) * 50

        def run():
            placement = scenario.solve_cover(problem, targets)
            out = _placement_json(placement)
            out["targets"] = targets
            out["t_cover"] = problem.t_cover
            return versioned(out)

        return _maybe_job(bool(body.get("async")), cost, run)

    @app.post("/api/v1/scenario/pv")
    async def scenario_pv(request: Request):
        body = await _json_body(request)
        kwargs = {k: body[k] for k in
                  ("max_slope_deg", "allowed_landcover", "max_grid_distance_m",
                   "min_area_m2", "weight_insolation", "weight_flatness",
                   "weight_grid") if k in body}
        if "allowed_landcover" in kwargs:
            kwargs["allowed_landcover"] = tuple(kwargs["allowed_landcover"])
        constraints = scenario.PvConstraints(**kwargs)
        record(request, "scenario_pv")
        cost = state.model.spec.nrows * state.model.spec.ncols * 4

        def run():
            zones = scenario.site_pv(state.model.layers, state.model.features,
                                     constraints)
            return versioned({"zones": [{
                "rank": rank + 1, "cell_count": z.cell_count,
                "score": z.score,
                "polygon": [list(v) for v in z.polygon.coordinates[0]],
            } for rank, z in enumerate(zones)]})

        return _maybe_job(bool(body.get("async")), cost, run)

    # -- fire ---------------------------------------------------------------

    def _fire_params(body: dict) -> firesim.FireParams:
        kwargs = {k: body[k] for k in
                  ("p0", "wind_speed", "wind_dir_deg", "wind_coeff",
                   "slope_coeff", "burn_duration", "minutes_per_step",
                   "mode", "seed") if k in body}
        return firesim.FireParams(**kwargs)

    def _run_fire(body: dict) -> firesim.FireSimulation:
        model = state.model
        params = _fire_params(body)
        max_steps = int(body.get("max_steps", 60))
        ignition = []
        for item in body.get("ignite", []):
            if isinstance(item, dict):
                i, j = model.spec.cell_of(float(item["x"]), float(item["y"]))
            else:
                i, j = int(item[0]), int(item[1])
            ignition.append((i, j))
        if not ignition:
            raise ValidationError("ignite: at least one ignition cell needed")
        return firesim.simulate_fire(
            model.layer("fuel"), ignition, params, max_steps,
            elevation=model.layers.get("elevation"))

    @app.post("/api/v1/fire/simulate")
    async def fire_simulate(request: Request):
        body = await _json_body(request)
        record(request, "fire")
        spec = state.model.spec
        cost = spec.nrows * spec.ncols * int(body.get("max_steps", 60))

        def run():
            sim = _run_fire(body)
            return versioned({
                "steps": sim.num_steps,
                "minutes_per_step": sim.params.minutes_per_step,
                "states": [st.grid.astype(int).tolist() for st in sim.states],
                "burned_cells": int(((sim.states[-1].grid == firesim.BURNED)
                                     | (sim.states[-1].grid
                                        == firesim.BURNING)).sum()),
            })

        return _maybe_job(bool(body.get("async")), cost, run)

    @app.post("/api/v1/fire/escape")
    async def fire_escape(request: Request):
        body = await _json_body(request)
        record(request, "fire")
        model = state.model

        def run():
            sim = _run_fire(body)
            if "start_node" in body:
                start = int(body["start_node"])
            else:
                start = snap(model.roads,
                             (float(body["start_x"]), float(body["start_y"])))
            route = firesim.escape_route(
                model.roads, start, sim,
                walk_speed_mps=float(body.get("walk_speed_mps", 1.4)))
            return versioned({
                "feasible": route.feasible,
                "path": route.path,
                "minutes": route.minutes if math.isfinite(route.minutes)
                else None,
                "nodes": {str(n): list(model.roads.nodes[n])
                          for n in route.path},
            })

        spec = model.spec
        cost = spec.nrows * spec.ncols * int(body.get("max_steps", 60))
        return _maybe_job(bool(body.get("async")), cost, run)

    # -- jobs, telemetry, catalog -------------------------------------------

    @app.get("/api/v1/jobs/{job_id}")
    def job_status(job_id: str):
        job = state.jobs.get(job_id)
        if job is None:
            raise NotFound(f"unknown job {job_id!r}")
        out = {"job_id": job.id, "status": job.status}
        if job.status == "done":
            out["result"] = job.result
        elif job.status == "failed":
            out["error"] = job.error
        return out

    @app.get("/api/v1/telemetry/heatmap")
    def heatmap():
        matrix = usage_heatmap(state.ledger)
        return versioned({"roles": list(telemetry.ROLES),
                          "categories": list(telemetry.CATEGORIES),
                          "matrix": matrix.tolist()})

    @app.get("/api/v1/catalog/staleness")
    def staleness(year: int):
        if state.store is None:
            raise NotFound("model has no catalog")
        catalog = state.store.load(verify_checksums=False)
        report = staleness_report(catalog, year)
        return versioned({"report": report.to_json(),
                          "stale_categories": report.stale_categories})

    # -- static dashboard ----------------------------------------------------

    if static_dir is not None and os.path.isdir(static_dir):
        static_dir = os.fspath(static_dir)

        @app.get("/")
        def dashboard_index():
            return FileResponse(os.path.join(static_dir, "index.html"))

        @app.get("/static/{path:path}")
        def dashboard_static(path: str):
            full = os.path.normpath(os.path.join(static_dir, path))
            if not full.startswith(static_dir) or not os.path.isfile(full):
                raise NotFound(f"no static file {path!r}")
            return FileResponse(full)

    return app


def _spec_json(spec) -> dict:
    return {"ncols": spec.ncols, "nrows": spec.nrows, "xll": spec.xll,
            "yll": spec.yll, "cellsize": spec.cellsize,
            "nodata": spec.nodata}


async def _json_body(request: Request) -> dict:
    try:
        body = await request.json()
    except json.JSONDecodeError:
        raise ValidationError("request body is not valid JSON") from None
    if not isinstance(body, dict):
        raise ValidationError("request body must be a JSON object")
    return body


def serve(model_dir, host: str = "127.0.0.1", port: int = 8000,
          static_dir=None) -> None:
    import uvicorn
    app = create_app(model_dir=model_dir, static_dir=static_dir)
    uvicorn.run(app, host=host, port=port, log_level="warning")
