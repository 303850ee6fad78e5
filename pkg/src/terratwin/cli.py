"""Command-line front door.

Subcommands: generate, serve, risk, scenario (kmedian|cover|pv), fire,
update, validate.  Exit codes: 0 ok, 1 usage error, 2 data error,
3 infeasible scenario.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import math
import os
import sys

import numpy as np

from . import firesim, hazard, scenario, validation
from .catalog import CatalogStore, staleness_report
from .errors import TwinError, ValidationError
from .events import PERILS
from .generate import DEFAULT_SPEC, GeneratorParams, generate_country
from .grid import GridSpec, write_raster
from .model import load_model, save_model
from .roads import snap

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_INFEASIBLE = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="terratwin",
                     description="synthetic environmental digital twin")
    sub = parser.add_subparsers(dest="command", required=True,
                                parser_class=_Parser)

    p = sub.add_parser("generate", help="generate a synthetic country model")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--size", type=int, default=DEFAULT_SPEC.ncols,
                   help="grid side length in cells")
    p.add_argument("--cellsize", type=float, default=DEFAULT_SPEC.cellsize)
    p.add_argument("--out", required=True, help="model output directory")
    p.add_argument("--year", type=int, default=2025,
                   help="catalog version year")
    p.add_argument("--param", action="append", default=[],
                   metavar="NAME=VALUE", help="override a generator parameter")

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--model", required=True)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--static", default=None,
                   help="directory with the dashboard build")

    p = sub.add_parser("risk", help="batch risk scoring for a points CSV")
    p.add_argument("--model", required=True)
    p.add_argument("--peril", required=True, choices=PERILS)
    p.add_argument("--points", required=True, help="CSV with header x,y")
    p.add_argument("--scenario", default=None, help="scenario JSON file")
    p.add_argument("--out", default=None, help="output CSV (default stdout)")

    p = sub.add_parser("scenario", help="run a what-if siting scenario")
    p.add_argument("mode", choices=["kmedian", "cover", "pv"])
    p.add_argument("--model", required=True)
    p.add_argument("--config", required=True, help="problem JSON file")
    p.add_argument("--out", default=None, help="solution JSON file")

    p = sub.add_parser("fire", help="simulate a wildfire")
    p.add_argument("--model", required=True)
    p.add_argument("--ignite", required=True, metavar="X,Y")
    p.add_argument("--params", default=None, help="fire params JSON file")
    p.add_argument("--max-steps", type=int, default=60)
    p.add_argument("--escape", default=None, metavar="X,Y",
                   help="also compute an escape route from this point")
    p.add_argument("--out", default=None,
                   help="directory for per-step burn rasters")

    p = sub.add_parser("update", help="apply a yearly catalog update")
    p.add_argument("--model", required=True)
    p.add_argument("--category", required=True)
    p.add_argument("--payload", required=True, action="append",
                   help="payload file (repeatable)")
    p.add_argument("--year", type=int, required=True)

    p = sub.add_parser("validate", help="representative validation suite")
    p.add_argument("--model", required=True)
    p.add_argument("--k", type=int, default=8)
    p.add_argument("--seed", type=int, default=0)

    return parser


def _apply_param_overrides(overrides) -> GeneratorParams:
    defaults = dataclasses.asdict(GeneratorParams())
    for item in overrides:
        if "=" not in item:
            raise ValidationError(f"bad --param {item!r}, expected NAME=VALUE")
        name, raw = item.split("=", 1)
        if name not in defaults:
            raise ValidationError(f"unknown generator parameter {name!r}")
        kind = type(defaults[name])
        defaults[name] = kind(float(raw)) if kind in (int, float) else raw
    return GeneratorParams(**defaults)


def cmd_generate(args) -> int:
    spec = GridSpec(ncols=args.size, nrows=args.size, xll=0.0, yll=0.0,
                    cellsize=args.cellsize)
    params = _apply_param_overrides(args.param)
    model = generate_country(args.seed, spec, params)
    save_model(model, args.out)
    CatalogStore(args.out).initialize(args.year)
    print(f"model written to {args.out} "
          f"({spec.ncols}x{spec.nrows} cells, {len(model.features)} features, "
          f"{len(model.events)} events)")
    return EXIT_OK


def cmd_serve(args) -> int:
    from .server import serve
    serve(args.model, host=args.host, port=args.port, static_dir=args.static)
    return EXIT_OK


def cmd_risk(args) -> int:
    model = load_model(args.model)
    scn = (hazard.ClimateScenario.from_json(args.scenario)
           if args.scenario else hazard.ClimateScenario.baseline())
    risk_layer, class_layer = hazard.risk_pipeline(
        model.layers, model.events, args.peril, scenario=scn)
    rows = []
    with open(args.points, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or \
                not {"x", "y"} <= set(reader.fieldnames):
            raise ValidationError(f"{args.points}: needs columns x,y")
        for rec in reader:
            x, y = float(rec["x"]), float(rec["y"])
            i, j = model.spec.cell_of(x, y)
            rows.append((x, y, risk_layer.values[i, j],
                         int(class_layer.values[i, j])))
    out = open(args.out, "w", encoding="utf-8", newline="") \
        if args.out else sys.stdout
    try:
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(["x", "y", "score", "class"])
        for x, y, score, cls in rows:
            writer.writerow([f"{x:.6f}", f"{y:.6f}", f"{score:.6f}", cls])
    finally:
        if args.out:
            out.close()
    return EXIT_OK


def _demand_from(model, config):
    demand = config.get("demand")
    if demand is None:
        demand = [[n, w] for n, w in sorted(model.populations.items())]
    return [(int(n), float(w)) for n, w in demand]


def cmd_scenario(args) -> int:
    model = load_model(args.model)
    with open(args.config, "r", encoding="utf-8") as fh:
        config = json.load(fh)

    if args.mode == "pv":
        kwargs = {k: config[k] for k in
                  ("max_slope_deg", "allowed_landcover", "max_grid_distance_m",
                   "min_area_m2", "weight_insolation", "weight_flatness",
                   "weight_grid") if k in config}
        if "allowed_landcover" in kwargs:
            kwargs["allowed_landcover"] = tuple(kwargs["allowed_landcover"])
        zones = scenario.site_pv(model.layers, model.features,
                                 scenario.PvConstraints(**kwargs))
        doc = {"zones": [{"rank": r + 1, "cell_count": z.cell_count,
                          "score": z.score,
                          "polygon": [list(v) for v in z.polygon.coordinates[0]]}
                         for r, z in enumerate(zones)]}
        _write_json(doc, args.out)
        print(f"pv: {len(zones)} suitable zones"
              + (f", best score {zones[0].score:.3f}" if zones else ""))
        return EXIT_OK

    candidates = config.get("candidates")
    if candidates is None:
        candidates = sorted(model.roads.nodes)
    problem = scenario.PlacementProblem(
        net=model.roads, candidates=[int(c) for c in candidates],
        demand=_demand_from(model, config), k=config.get("k"),
        t_cover=config.get("t_cover"), t_mean=config.get("t_mean"),
        objective=config.get("objective", "mean"))

    if args.mode == "kmedian":
        placement = scenario.solve_kmedian(problem)
    else:
        targets = config.get("targets")
        if targets is None:
            targets = _risk5_targets(model, config.get("peril", "wildfire"))
        placement = scenario.solve_cover(problem, [int(t) for t in targets])

    doc = {"mode": placement.mode, "chosen": list(placement.chosen),
           "objective": placement.objective
           if math.isfinite(placement.objective) else None,
           "feasible": placement.feasible,
           "uncovered": list(placement.uncovered)}
    _write_json(doc, args.out)
    obj = (f"{placement.objective:.3f} min" if args.mode == "kmedian"
           else f"{int(placement.objective)} stations")
    print(f"{args.mode}: chose {len(placement.chosen)} sites, objective {obj}, "
          f"{'feasible' if placement.feasible else 'INFEASIBLE'}")
    return EXIT_OK if placement.feasible else EXIT_INFEASIBLE


def _risk5_targets(model, peril):
    _, classes = hazard.risk_pipeline(model.layers, model.events, peril)
    nodes = set()
    for i, j in np.argwhere(classes.values == 5):
        x, y = model.spec.cell_center(int(i), int(j))
        nodes.add(snap(model.roads, (x, y)))
    return sorted(nodes)


def cmd_fire(args) -> int:
    model = load_model(args.model)
    params = firesim.FireParams()
    if args.params:
        with open(args.params, "r", encoding="utf-8") as fh:
            params = firesim.FireParams(**json.load(fh))
    x, y = (float(v) for v in args.ignite.split(","))
    ignition = [model.spec.cell_of(x, y)]
    sim = firesim.simulate_fire(model.layer("fuel"), ignition, params,
                                args.max_steps,
                                elevation=model.layers.get("elevation"))
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        for step, state in enumerate(sim.states):
            write_raster(sim.state_layer(step),
                         os.path.join(args.out, f"fire_step_{step:03d}.asc"))
    burned = int(((sim.states[-1].grid == firesim.BURNED)
                  | (sim.states[-1].grid == firesim.BURNING)).sum())
    print(f"fire: {sim.num_steps} steps, {burned} cells in the final envelope")
    if args.escape:
        ex, ey = (float(v) for v in args.escape.split(","))
        start = snap(model.roads, (ex, ey))
        route = firesim.escape_route(model.roads, start, sim)
        if route.feasible:
            print(f"escape: {' -> '.join(map(str, route.path))} "
                  f"({route.minutes:.1f} min)")
        else:
            print("escape: INFEASIBLE (no safe route)")
            return EXIT_INFEASIBLE
    return EXIT_OK


def cmd_update(args) -> int:
    store = CatalogStore(args.model)
    catalog, diffs = store.apply_update(args.category, args.payload,
                                        args.year)
    print(f"catalog now at {catalog.version}")
    for d in diffs:
        print(f"  {json.dumps(d.to_json(), sort_keys=True)}")
    report = staleness_report(store.load(verify_checksums=False), args.year)
    if not report.empty:
        print(f"still stale: {', '.join(report.stale_categories)}")
    return EXIT_OK


def cmd_validate(args) -> int:
    model = load_model(args.model)
    vectors, _ = validation.cell_feature_vectors(model)
    clusters = validation.cluster_scenarios(vectors, args.k, args.seed)
    checks = validation.default_service_checks(model)
    report = validation.run_representative_suite(clusters.representatives,
                                                 checks)
    full_grid = vectors.shape[0] * len(checks)
    print(f"validate: {report.executed} checks on {args.k} representatives "
          f"(full grid would need {full_grid}; "
          f"{full_grid / max(report.executed, 1):.0f}x reduction)")
    for r in report.failures:
        print(f"  FAIL {r.check} at cell {r.representative}: {r.detail}")
    print("all checks passed" if report.all_passed
          else f"{len(report.failures)} failures")
    return EXIT_OK if report.all_passed else EXIT_DATA


def _write_json(doc, path) -> None:
    if path:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(doc, fh, indent=1, sort_keys=True)
            fh.write("\n")
    else:
        print(json.dumps(doc, indent=1, sort_keys=True))


_COMMANDS = {
    "generate": cmd_generate, "serve": cmd_serve, "risk": cmd_risk,
    "scenario": cmd_scenario, "fire": cmd_fire, "update": cmd_update,
    "validate": cmd_validate,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (TwinError, FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
