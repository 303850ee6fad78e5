"""CountryModel: the assembled twin, and its on-disk directory layout.

A model directory holds::

    model.json      seed, grid spec, generator params, layer list, populations
    layers/*.asc    one ASCII grid per raster layer
    features.json   all vector features
    roads.json      the road network
    events.csv      hazard event history
    catalog/        versioned layer catalog (managed by the pipeline module)

All writers are deterministic: regenerating with the same seed and
parameters yields byte-identical directories.
"""

from __future__ import annotations

import dataclasses
import json
import os
from dataclasses import dataclass, field

from .errors import ParseError, ValidationError
from .events import HazardEvent, read_events, write_events
from .grid import GridSpec, RasterLayer, read_raster, write_raster
from .roads import RoadNetwork, read_roads, write_roads
from .vector import FeatureCollection, read_features, write_features

MODEL_FILE = "model.json"
LAYERS_DIR = "layers"


@dataclass
class CountryModel:
    spec: GridSpec
    layers: dict[str, RasterLayer]
    features: FeatureCollection
    roads: RoadNetwork
    events: list[HazardEvent]
    seed: int
    params: dict = field(default_factory=dict)
    populations: dict[int, float] = field(default_factory=dict)

    def __post_init__(self):
        for name, layer in self.layers.items():
            if layer.spec != self.spec:
                raise ValidationError(f"layer {name!r} not aligned to the "
                                      "model grid")

    def layer(self, name: str) -> RasterLayer:
        from .errors import MissingLayerError
        if name not in self.layers:
            raise MissingLayerError(name)
        return self.layers[name]


def save_model(model: CountryModel, directory) -> None:
    directory = os.fspath(directory)
    os.makedirs(os.path.join(directory, LAYERS_DIR), exist_ok=True)
    for name in sorted(model.layers):
        write_raster(model.layers[name],
                     os.path.join(directory, LAYERS_DIR, f"{name}.asc"))
    write_features(model.features, os.path.join(directory, "features.json"))
    write_roads(model.roads, os.path.join(directory, "roads.json"))
    write_events(model.events, os.path.join(directory, "events.csv"))
    meta = {
        "seed": model.seed,
        "spec": dataclasses.asdict(model.spec),
        "params": model.params,
        "layers": {name: {"units": model.layers[name].units}
                   for name in sorted(model.layers)},
        "populations": {str(k): model.populations[k]
                        for k in sorted(model.populations)},
    }
    with open(os.path.join(directory, MODEL_FILE), "w",
              encoding="utf-8", newline="\n") as fh:
        json.dump(meta, fh, indent=1, sort_keys=True)
        fh.write("\n")


def load_model(directory) -> CountryModel:
    directory = os.fspath(directory)
    meta_path = os.path.join(directory, MODEL_FILE)
    if not os.path.exists(meta_path):
        raise ParseError(f"not a model directory: {meta_path} missing")
    with open(meta_path, "r", encoding="utf-8") as fh:
        meta = json.load(fh)
    spec = GridSpec(**meta["spec"])
    layers = {}
    for name, info in meta["layers"].items():
        layers[name] = read_raster(
            os.path.join(directory, LAYERS_DIR, f"{name}.asc"),
            name=name, units=info.get("units", ""))
    features = read_features(os.path.join(directory, "features.json"),
                             extent=spec)
    roads = read_roads(os.path.join(directory, "roads.json"))
    events = read_events(os.path.join(directory, "events.csv"))
    return CountryModel(
        spec=spec, layers=layers, features=features, roads=roads,
        events=events, seed=int(meta["seed"]), params=meta.get("params", {}),
        populations={int(k): float(v)
                     for k, v in meta.get("populations", {}).items()})
