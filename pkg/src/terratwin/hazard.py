"""Geohazard scoring: susceptibility, incident density, risk, five-class maps.

The class map uses equal-width thresholds on the [0, 1] risk score:
class = min(5, 1 + floor(r / 0.2)), so 1 covers [0, 0.2) up to 5 covering
[0.8, 1].  Climate scenarios scale the risk score per peril before
classification.
"""

from __future__ import annotations

import bisect
import json
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import MissingLayerError, ValidationError
from .events import PERILS
from .grid import GridSpec, RasterLayer, require_aligned

CLASS_WIDTH = 0.2

#: Factor layers (all normalized to [0, 1]) feeding each peril's
#: susceptibility.  One concrete, testable default; callers may pass their
#: own FactorWeights.  Landslide weights follow the usual dominance order
#: (lithology > precipitation > slope); the rest are equal-weighted.
DEFAULT_FACTORS: dict[str, dict[str, float]] = {
    "wildfire": {"fuel": 1 / 3, "slope_norm": 1 / 3, "summer_dryness": 1 / 3},
    "flood": {"flatness": 1 / 3, "precip_norm": 1 / 3, "low_elevation": 1 / 3},
    "landslide": {"slope_norm": 0.15, "precip_norm": 0.35,
                  "geology_weakness": 0.5},
    "earthquake": {"fault_proximity": 1.0},
    "subsidence": {"geology_weakness": 1.0},
}

#: Expected damage ratio per hazard class.  Shipped as an editable placeholder:
#: real damage functions come from proprietary insurer claims data.
DEFAULT_DAMAGE = {1: 0.000, 2: 0.005, 3: 0.02, 4: 0.08, 5: 0.25}

DEFAULT_ALPHA = 0.5
DEFAULT_DENSITY_RADIUS_M = 1000.0


@dataclass(frozen=True)
class FactorWeights:
    """Per-factor weights; must sum to 1."""

    weights: dict[str, float]

    def __post_init__(self):
        for name, w in self.weights.items():
            if w < 0:
                raise ValidationError(f"negative weight for factor {name!r}")
        total = sum(self.weights.values())
        if abs(total - 1.0) > 1e-9:
            raise ValidationError(f"factor weights sum to {total}, expected 1")

    @classmethod
    def equal(cls, names) -> "FactorWeights":
        names = list(names)
        return cls({n: 1.0 / len(names) for n in names})


@dataclass(frozen=True)
class DamageTable:
    """Hazard class -> expected damage ratio in [0, 1], non-decreasing."""

    ratios: dict[int, float]

    def __post_init__(self):
        if sorted(self.ratios) != [1, 2, 3, 4, 5]:
            raise ValidationError("damage table needs exactly classes 1..5")
        prev = -1.0
        for c in range(1, 6):
            r = self.ratios[c]
            if not 0.0 <= r <= 1.0:
                raise ValidationError(f"damage ratio for class {c} outside [0,1]")
            if r < prev:
                raise ValidationError("damage ratios must be non-decreasing")
            prev = r

    def __getitem__(self, hazard_class: int) -> float:
        return self.ratios[hazard_class]

    @classmethod
    def default(cls) -> "DamageTable":
        return cls(dict(DEFAULT_DAMAGE))

    @classmethod
    def from_json(cls, path) -> "DamageTable":
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
        return cls({int(k): float(v) for k, v in raw.items()})


@dataclass(frozen=True)
class ClimateScenario:
    """Named per-peril risk multipliers; the baseline is all ones."""

    name: str
    multipliers: dict[str, float] = field(
        default_factory=lambda: {p: 1.0 for p in PERILS})

    def __post_init__(self):
        for peril in PERILS:
            m = self.multipliers.get(peril)
            if m is None:
                raise ValidationError(f"scenario missing multiplier for {peril}")
            if not m > 0:
                raise ValidationError(f"multiplier for {peril} must be > 0")
        if self.name == "baseline":
            for peril, m in self.multipliers.items():
                if m != 1.0:
                    raise ValidationError("baseline multipliers must all be 1")

    @classmethod
    def baseline(cls) -> "ClimateScenario":
        return cls("baseline")

    @classmethod
    def from_json(cls, path) -> "ClimateScenario":
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
        return cls(str(raw["name"]),
                   {k: float(v) for k, v in raw["multipliers"].items()})

    def to_json(self) -> dict:
        return {"name": self.name, "multipliers": dict(self.multipliers)}


def susceptibility(factors: dict[str, RasterLayer],
                   weights: FactorWeights) -> RasterLayer:
    """Weighted sum of normalized factor layers; nodata in any factor wins."""
    missing = [n for n in weights.weights if n not in factors]
    if missing:
        raise MissingLayerError(missing[0])
    used = [factors[n] for n in weights.weights]
    spec = require_aligned(used)
    out = np.zeros(spec.shape, dtype=np.float64)
    nodata = np.zeros(spec.shape, dtype=bool)
    # canonical summation order: exact invariance under factor permutation
    for name in sorted(weights.weights):
        w = weights.weights[name]
        layer = factors[name]
        mask = layer.nodata_mask()
        valid = ~mask
        vals = layer.values
        if ((vals[valid] < 0) | (vals[valid] > 1)).any():
            raise ValidationError(f"factor {name!r} has values outside [0, 1]")
        nodata |= mask
        out += np.where(mask, 0.0, w * vals)
    out[nodata] = spec.nodata
    return RasterLayer(spec, out, "susceptibility")


def incident_density(events, peril: str, spec: GridSpec,
                     radius: float = DEFAULT_DENSITY_RADIUS_M) -> RasterLayer:
    """Per-cell count of peril events within `radius`, normalized by the max."""
    if not radius > 0:
        raise ValidationError(f"radius must be > 0, got {radius}")
    if peril not in PERILS:
        raise ValidationError(f"unknown peril {peril!r}")
    xs, ys = spec.cell_centers()
    sel = [e for e in events if e.peril == peril]
    if not sel:
        return RasterLayer(spec, np.zeros(spec.shape), f"density_{peril}")
    ex = np.array([e.x for e in sel])
    ey = np.array([e.y for e in sel])
    counts = _kernels.count_within_radius(xs, ys, ex, ey, radius)
    top = counts.max()
    if top == 0:
        values = np.zeros(spec.shape)
    else:
        values = counts / top
    return RasterLayer(spec, values, f"density_{peril}")


def risk_score(suscept: RasterLayer, density: RasterLayer, alpha: float,
               scenario: ClimateScenario, peril: str) -> RasterLayer:
    """r = clamp(m_p * (alpha * density + (1 - alpha) * susceptibility), 0, 1)."""
    if not 0.0 <= alpha <= 1.0:
        raise ValidationError(f"alpha must be in [0, 1], got {alpha}")
    if peril not in PERILS:
        raise ValidationError(f"unknown peril {peril!r}")
    spec = require_aligned([suscept, density])
    m = scenario.multipliers[peril]
    nodata = suscept.nodata_mask() | density.nodata_mask()
    r = np.clip(m * (alpha * density.values + (1.0 - alpha) * suscept.values),
                0.0, 1.0)
    r[nodata] = spec.nodata
    return RasterLayer(spec, r, f"risk_{peril}")


_CLASS_BOUNDS = (0.2, 0.4, 0.6, 0.8)


def classify(risk: RasterLayer) -> RasterLayer:
    """Five-class map: class = min(5, 1 + floor(r / 0.2)); nodata propagates.

    Evaluated against the explicit thresholds 0.2/0.4/0.6/0.8 so boundary
    values land in the mathematically correct class (0.6 / 0.2 rounds below
    3 in floating point).
    """
    vals = risk.values
    nodata = risk.nodata_mask()
    valid = ~nodata
    if ((vals[valid] < 0) | (vals[valid] > 1)).any():
        raise ValidationError("risk values outside [0, 1]")
    classes = (1.0 + np.digitize(vals, _CLASS_BOUNDS)).astype(np.float64)
    classes[nodata] = risk.spec.nodata
    return RasterLayer(risk.spec, classes, f"{risk.name}_class")


def classify_value(r: float) -> int:
    return 1 + bisect.bisect_right(_CLASS_BOUNDS, r)


def validate_recall(classes: RasterLayer, held_out, peril: str,
                    threshold_class: int = 3) -> float:
    """Share of held-out peril events whose cell class >= threshold_class."""
    if not 1 <= threshold_class <= 5:
        raise ValidationError("threshold_class must be in 1..5")
    sel = [e for e in held_out if e.peril == peril]
    if not sel:
        raise ValidationError(f"no held-out events for peril {peril!r}; "
                              "recall undefined")
    hits = 0
    for e in sel:
        i, j = classes.spec.cell_of(e.x, e.y)
        if classes.values[i, j] >= threshold_class:
            hits += 1
    return hits / len(sel)


def expected_damage(hazard_class: int, property_value: float,
                    table: DamageTable | None = None) -> float:
    if not 1 <= hazard_class <= 5:
        raise ValidationError(f"hazard class must be in 1..5, got {hazard_class}")
    table = table if table is not None else DamageTable.default()
    return property_value * table[hazard_class]


def peril_factor_weights(peril: str) -> FactorWeights:
    if peril not in DEFAULT_FACTORS:
        raise ValidationError(f"unknown peril {peril!r}")
    return FactorWeights(dict(DEFAULT_FACTORS[peril]))


def risk_pipeline(layers: dict[str, RasterLayer], events, peril: str,
                  scenario: ClimateScenario | None = None,
                  alpha: float = DEFAULT_ALPHA,
                  radius: float = DEFAULT_DENSITY_RADIUS_M,
                  weights: FactorWeights | None = None,
                  ) -> tuple[RasterLayer, RasterLayer]:
    """(risk score layer, class layer) from a model's layer registry + events."""
    scenario = scenario if scenario is not None else ClimateScenario.baseline()
    weights = weights if weights is not None else peril_factor_weights(peril)
    spec = next(iter(layers.values())).spec
    s = susceptibility(layers, weights)
    d = incident_density(events, peril, spec, radius)
    r = risk_score(s, d, alpha, scenario, peril)
    return r, classify(r)
