"""Cluster-based representative validation.

Cells are embedded as feature vectors (factor values, per-peril risk
scores, land-cover one-hot), clustered by seeded farthest-point k-means
on min-max-normalized coordinates, and service checks run only on each
cluster's representative cell instead of the full grid.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import hazard, landcover
from .errors import ValidationError
from .events import PERILS
from .model import CountryModel


@dataclass
class ScenarioCluster:
    k: int
    centroids: np.ndarray          # (k, d), normalized space
    assignments: np.ndarray        # (n,) cluster index per vector
    representatives: list[int]     # vector index nearest each centroid

    def cluster_sizes(self) -> list[int]:
        return [int((self.assignments == c).sum()) for c in range(self.k)]


def _normalize(vectors: np.ndarray) -> np.ndarray:
    lo = vectors.min(axis=0)
    hi = vectors.max(axis=0)
    span = np.where(hi > lo, hi - lo, 1.0)
    return (vectors - lo) / span


def cluster_scenarios(vectors: np.ndarray, k: int, seed: int = 0
                      ) -> ScenarioCluster:
    """Deterministic k-means: farthest-point init from index seed % n,
    Lloyd refinement until assignments stabilize (or 100 iterations)."""
    vectors = np.asarray(vectors, dtype=np.float64)
    if vectors.ndim != 2 or vectors.shape[0] == 0:
        raise ValidationError("cluster_scenarios needs a non-empty 2-D array")
    n = vectors.shape[0]
    if not 1 <= k <= n:
        raise ValidationError(f"k={k} outside 1..{n}")
    norm = _normalize(vectors)

    centroid_idx = [int(seed) % n]
    d2 = ((norm - norm[centroid_idx[0]]) ** 2).sum(axis=1)
    while len(centroid_idx) < k:
        nxt = int(np.argmax(d2))      # argmax breaks ties at the lowest index
        centroid_idx.append(nxt)
        d2 = np.minimum(d2, ((norm - norm[nxt]) ** 2).sum(axis=1))
    centroids = norm[centroid_idx].copy()

    assignments = np.full(n, -1, dtype=np.int64)
    for _ in range(100):
        dist = ((norm[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
        new_assign = dist.argmin(axis=1)
        if (new_assign == assignments).all():
            break
        assignments = new_assign
        for c in range(k):
            members = norm[assignments == c]
            if len(members):
                centroids[c] = members.mean(axis=0)

    dist = ((norm[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
    assignments = dist.argmin(axis=1)
    representatives = []
    for c in range(k):
        member_idx = np.nonzero(assignments == c)[0]
        if len(member_idx) == 0:
            representatives.append(int(centroid_idx[c]))
            continue
        best = member_idx[int(np.argmin(dist[member_idx, c]))]
        representatives.append(int(best))
    return ScenarioCluster(k=k, centroids=centroids, assignments=assignments,
                           representatives=representatives)


def cell_feature_vectors(model: CountryModel,
                         alpha: float = hazard.DEFAULT_ALPHA
                         ) -> tuple[np.ndarray, list[str]]:
    """(n_cells, d) embedding of every cell plus the column names."""
    factor_names = sorted({name for names in hazard.DEFAULT_FACTORS.values()
                           for name in names})
    columns = []
    names = []
    for fname in factor_names:
        columns.append(model.layer(fname).values.ravel())
        names.append(f"factor:{fname}")
    for peril in PERILS:
        risk, _ = hazard.risk_pipeline(model.layers, model.events, peril,
                                       alpha=alpha)
        columns.append(risk.values.ravel())
        names.append(f"risk:{peril}")
    cover = model.layer("landcover").values.ravel()
    for code in (landcover.WATER, landcover.URBAN, landcover.FOREST,
                 landcover.SHRUB, landcover.AGRICULTURE, landcover.BARE):
        columns.append((cover == code).astype(np.float64))
        names.append(f"cover:{code}")
    return np.column_stack(columns), names


@dataclass
class CheckResult:
    representative: int
    check: str
    passed: bool
    detail: str = ""


@dataclass
class SuiteReport:
    executed: int
    results: list[CheckResult] = field(default_factory=list)

    @property
    def failures(self) -> list[CheckResult]:
        return [r for r in self.results if not r.passed]

    @property
    def all_passed(self) -> bool:
        return not self.failures

    def to_json(self) -> dict:
        return {"executed": self.executed,
                "passed": self.executed - len(self.failures),
                "failed": len(self.failures),
                "failures": [{"representative": r.representative,
                              "check": r.check, "detail": r.detail}
                             for r in self.failures]}


def run_representative_suite(representatives, checks) -> SuiteReport:
    """Run every (name, fn) check on each representative cell index.

    A check passes when fn(cell_index) is truthy; exceptions fail the check
    with the message recorded.
    """
    representatives = list(representatives)
    checks = list(checks)
    report = SuiteReport(executed=len(representatives) * len(checks))
    for rep in representatives:
        for name, fn in checks:
            try:
                ok = bool(fn(rep))
                detail = "" if ok else "check returned false"
            except Exception as exc:  # noqa: BLE001 - report, don't crash
                ok = False
                detail = f"{type(exc).__name__}: {exc}"
            report.results.append(CheckResult(rep, name, ok, detail))
    return report


def default_service_checks(model: CountryModel):
    """Service sanity checks run per representative cell index."""
    spec = model.spec
    risk_layers = {}
    for peril in PERILS:
        risk, classes = hazard.risk_pipeline(model.layers, model.events, peril)
        risk_layers[peril] = (risk, classes)

    def cell_xy(cell: int):
        i, j = divmod(cell, spec.ncols)
        return spec.cell_center(i, j)

    def risk_in_range(cell: int) -> bool:
        i, j = divmod(cell, spec.ncols)
        return all(0.0 <= rl.values[i, j] <= 1.0
                   for rl, _ in risk_layers.values())

    def class_in_range(cell: int) -> bool:
        i, j = divmod(cell, spec.ncols)
        return all(1 <= cl.values[i, j] <= 5 for _, cl in risk_layers.values())

    def classes_match_scores(cell: int) -> bool:
        i, j = divmod(cell, spec.ncols)
        return all(int(cl.values[i, j])
                   == hazard.classify_value(rl.values[i, j])
                   for rl, cl in risk_layers.values())

    def factors_normalized(cell: int) -> bool:
        i, j = divmod(cell, spec.ncols)
        names = {n for ns in hazard.DEFAULT_FACTORS.values() for n in ns}
        return all(0.0 <= model.layer(n).values[i, j] <= 1.0 for n in names)

    def cell_round_trip(cell: int) -> bool:
        x, y = cell_xy(cell)
        return spec.cell_of(x, y) == divmod(cell, spec.ncols)

    return [("risk_in_range", risk_in_range),
            ("class_in_range", class_in_range),
            ("classes_match_scores", classes_match_scores),
            ("factors_normalized", factors_normalized),
            ("cell_round_trip", cell_round_trip)]
