import csv
import hashlib
import json

import numpy as np
import pytest

from terratwin import hazard, scenario
from terratwin.cli import main
from terratwin.model import load_model


def run_cli(*argv):
    return main(list(argv))


def dir_digest(root):
    tree = {}
    for path in sorted(root.rglob("*")):
        if path.is_file():
            tree[path.relative_to(root).as_posix()] = \
                hashlib.sha256(path.read_bytes()).hexdigest()
    return tree


@pytest.fixture(scope="module")
def cli_model(tmp_path_factory):
    out = tmp_path_factory.mktemp("cli") / "model"
    code = run_cli("generate", "--seed", "21", "--size", "40",
                   "--out", str(out), "--param", "n_trees=150",
                   "--param", "events_per_peril=40")
    assert code == 0
    return out


class TestGenerate:
    def test_same_seed_identical_directories(self, tmp_path):
        digests = []
        for sub in ("a", "b"):
            out = tmp_path / sub
            assert run_cli("generate", "--seed", "4", "--size", "32",
                           "--out", str(out),
                           "--param", "n_trees=100") == 0
            digests.append(dir_digest(out))
        assert digests[0] == digests[1]

    def test_unknown_param_is_data_error(self, tmp_path):
        code = run_cli("generate", "--seed", "1", "--size", "32",
                       "--out", str(tmp_path / "x"),
                       "--param", "n_unicorns=4")
        assert code == 2

    def test_model_loads_with_catalog(self, cli_model):
        model = load_model(cli_model)
        assert model.spec.ncols == 40
        from terratwin.catalog import CatalogStore
        assert CatalogStore(cli_model).current_version() == "v0001"


class TestRisk:
    def test_batch_matches_library(self, cli_model, tmp_path, capsys):
        model = load_model(cli_model)
        points = [model.spec.cell_center(5, 5),
                  model.spec.cell_center(20, 20),
                  model.spec.cell_center(35, 12)]
        pts = tmp_path / "points.csv"
        with open(pts, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["x", "y"])
            w.writerows(points)
        out = tmp_path / "scores.csv"
        assert run_cli("risk", "--model", str(cli_model), "--peril",
                       "landslide", "--points", str(pts),
                       "--out", str(out)) == 0
        risk_layer, class_layer = hazard.risk_pipeline(
            model.layers, model.events, "landslide")
        with open(out, newline="") as fh:
            rows = list(csv.DictReader(fh))
        assert len(rows) == 3
        for (x, y), row in zip(points, rows):
            i, j = model.spec.cell_of(x, y)
            assert float(row["score"]) == pytest.approx(
                risk_layer.values[i, j], abs=1e-6)
            assert int(row["class"]) == int(class_layer.values[i, j])

    def test_missing_points_file_is_data_error(self, cli_model, tmp_path):
        assert run_cli("risk", "--model", str(cli_model), "--peril",
                       "flood", "--points", str(tmp_path / "nope.csv")) == 2


class TestScenario:
    def test_cover_matches_fixture(self, cli_model, tmp_path, capsys):
        model = load_model(cli_model)
        nodes = sorted(model.roads.nodes)
        config = {"t_cover": 9.0, "targets": nodes[:5], "demand": []}
        cfg = tmp_path / "cover.json"
        cfg.write_text(json.dumps(config))
        out = tmp_path / "solution.json"
        code = run_cli("scenario", "cover", "--model", str(cli_model),
                       "--config", str(cfg), "--out", str(out))
        problem = scenario.PlacementProblem(
            net=model.roads, candidates=nodes, demand=[], t_cover=9.0)
        expected = scenario.solve_cover(problem, nodes[:5])
        solution = json.loads(out.read_text())
        assert tuple(solution["chosen"]) == expected.chosen
        assert solution["feasible"] == expected.feasible
        assert code == (0 if expected.feasible else 3)

    def test_infeasible_cover_exits_3(self, cli_model, tmp_path):
        model = load_model(cli_model)
        nodes = sorted(model.roads.nodes)
        # a nonexistent target can never be covered -> validation error (2);
        # instead make an unreachable one: tiny т budget with real targets
        config = {"t_cover": 1e-8, "targets": nodes, "demand": [],
                  "candidates": nodes[:1]}
        cfg = tmp_path / "cover.json"
        cfg.write_text(json.dumps(config))
        code = run_cli("scenario", "cover", "--model", str(cli_model),
                       "--config", str(cfg))
        assert code == 3

    def test_kmedian_runs(self, cli_model, tmp_path):
        cfg = tmp_path / "km.json"
        cfg.write_text(json.dumps({"k": 2}))
        out = tmp_path / "km_out.json"
        assert run_cli("scenario", "kmedian", "--model", str(cli_model),
                       "--config", str(cfg), "--out", str(out)) == 0
        solution = json.loads(out.read_text())
        assert len(solution["chosen"]) == 2

    def test_pv_runs(self, cli_model, tmp_path):
        cfg = tmp_path / "pv.json"
        cfg.write_text(json.dumps({"min_area_m2": 10000.0,
                                   "max_slope_deg": 20.0}))
        out = tmp_path / "pv_out.json"
        assert run_cli("scenario", "pv", "--model", str(cli_model),
                       "--config", str(cfg), "--out", str(out)) == 0
        assert "zones" in json.loads(out.read_text())


class TestFire:
    def test_simulate_writes_rasters(self, cli_model, tmp_path):
        model = load_model(cli_model)
        fuel = model.layer("fuel").values
        i, j = map(int, np.argwhere(fuel > 0.6)[0])
        x, y = model.spec.cell_center(i, j)
        out = tmp_path / "burn"
        code = run_cli("fire", "--model", str(cli_model),
                       "--ignite", f"{x},{y}", "--max-steps", "4",
                       "--out", str(out))
        assert code == 0
        steps = sorted(out.glob("fire_step_*.asc"))
        assert steps
        from terratwin.grid import read_raster
        first = read_raster(steps[0])
        assert first.values[i, j] == 1.0  # burning state code

    def test_bad_ignite_is_data_error(self, cli_model):
        code = run_cli("fire", "--model", str(cli_model),
                       "--ignite", "999999,999999")
        assert code == 2


class TestUpdateValidate:
    def test_update_and_validate(self, cli_model, tmp_path):
        payload = tmp_path / "fuel.asc"
        payload.write_bytes((cli_model / "layers" / "fuel.asc").read_bytes())
        assert run_cli("update", "--model", str(cli_model), "--category",
                       "land_cover", "--payload", str(payload),
                       "--year", "2025") == 0
        from terratwin.catalog import CatalogStore
        assert CatalogStore(cli_model).current_version() == "v0002"
        assert run_cli("validate", "--model", str(cli_model),
                       "--k", "6") == 0


class TestUsage:
    def test_help_everywhere(self, capsys):
        for args in (["--help"], ["generate", "--help"], ["serve", "--help"],
                     ["risk", "--help"], ["scenario", "--help"],
                     ["fire", "--help"], ["update", "--help"],
                     ["validate", "--help"]):
            with pytest.raises(SystemExit) as exc:
                run_cli(*args)
            assert exc.value.code == 0

    def test_usage_error_exits_1(self):
        with pytest.raises(SystemExit) as exc:
            run_cli("generate")  # missing required args
        assert exc.value.code == 1

    def test_unknown_command_exits_1(self):
        with pytest.raises(SystemExit) as exc:
            run_cli("teleport")
        assert exc.value.code == 1

    def test_missing_model_is_data_error(self, tmp_path):
        assert run_cli("validate", "--model", str(tmp_path / "ghost")) == 2
