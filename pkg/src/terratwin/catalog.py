"""Versioned layer catalog: yearly ingestion, staleness, diffs, atomic swap.

Versions are append-only directories under <model>/catalog/ named v0001,
v0002, ...; the one-line CURRENT file names the live version and is
replaced atomically, so concurrent readers always see one complete
version.  A lock file serializes writers.
"""

from __future__ import annotations

import datetime as dt
import hashlib
import json
import os
import shutil
from dataclasses import dataclass, field

from .errors import ParseError, TwinError, ValidationError
from .events import read_events
from .grid import read_raster
from .vector import read_features

CATEGORIES = ("land_cover", "landform", "geohazard", "proximity",
              "climate_weather")

#: catalog category of each generated model artifact
DEFAULT_CATEGORIES = {
    "landcover": "land_cover", "fuel": "land_cover",
    "elevation": "landform", "slope": "landform", "aspect": "landform",
    "geology": "landform", "geology_weakness": "landform",
    "slope_norm": "landform", "flatness": "landform",
    "low_elevation": "landform", "insolation": "landform",
    "protected_mask": "landform",
    "events": "geohazard", "fault_proximity": "geohazard",
    "features": "proximity", "roads": "proximity",
    "precipitation": "climate_weather", "precip_norm": "climate_weather",
    "summer_dryness": "climate_weather",
}

CATALOG_DIR = "catalog"
CURRENT_FILE = "CURRENT"
LOCK_FILE = ".lock"


def _sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return "sha256:" + h.hexdigest()


@dataclass(frozen=True)
class CatalogEntry:
    category: str
    version_year: int
    source: str
    path: str            # relative to the model directory
    checksum: str

    def __post_init__(self):
        if self.category not in CATEGORIES:
            raise ValidationError(f"unknown catalog category {self.category!r}")


@dataclass
class LayerCatalog:
    version: str
    entries: dict[str, CatalogEntry]

    def to_json(self) -> dict:
        return {"version": self.version,
                "entries": {name: {"category": e.category,
                                   "version_year": e.version_year,
                                   "source": e.source, "path": e.path,
                                   "checksum": e.checksum}
                            for name, e in sorted(self.entries.items())}}

    @classmethod
    def from_json(cls, doc: dict) -> "LayerCatalog":
        entries = {name: CatalogEntry(**raw)
                   for name, raw in doc["entries"].items()}
        return cls(version=doc["version"], entries=entries)


@dataclass
class DiffReport:
    name: str
    kind: str                       # raster | features | events
    changed_fraction: float | None = None
    added: int | None = None
    removed: int | None = None
    new_events: int | None = None

    def __post_init__(self):
        if self.changed_fraction is not None \
                and not 0.0 <= self.changed_fraction <= 1.0:
            raise ValidationError("changed fraction outside [0, 1]")

    @property
    def unchanged(self) -> bool:
        return ((self.changed_fraction in (None, 0.0))
                and not self.added and not self.removed
                and not self.new_events)

    def to_json(self) -> dict:
        out = {"name": self.name, "kind": self.kind}
        if self.changed_fraction is not None:
            out["changed_fraction"] = self.changed_fraction
        if self.added is not None:
            out["added"] = self.added
            out["removed"] = self.removed
        if self.new_events is not None:
            out["new_events"] = self.new_events
        return out


@dataclass
class StalenessReport:
    current_year: int
    by_category: dict[str, list[str]] = field(default_factory=dict)

    @property
    def stale_categories(self) -> list[str]:
        return sorted(self.by_category)

    @property
    def empty(self) -> bool:
        return not self.by_category

    def to_json(self) -> dict:
        return {"current_year": self.current_year,
                "by_category": {c: sorted(names)
                                for c, names in self.by_category.items()}}


def staleness_report(catalog: LayerCatalog, current_year: int) -> StalenessReport:
    """Entries with version_year < current_year, grouped by category."""
    report = StalenessReport(current_year=current_year)
    for name, e in sorted(catalog.entries.items()):
        if e.version_year < current_year:
            report.by_category.setdefault(e.category, []).append(name)
    return report


class CatalogStore:
    """Reads and writes catalog versions under one model directory."""

    def __init__(self, model_dir):
        self.model_dir = os.fspath(model_dir)
        self.root = os.path.join(self.model_dir, CATALOG_DIR)

    # -- reading ---------------------------------------------------------

    def current_version(self) -> str:
        path = os.path.join(self.root, CURRENT_FILE)
        if not os.path.exists(path):
            raise TwinError(f"no catalog at {self.root}")
        with open(path, "r", encoding="utf-8") as fh:
            return fh.read().strip()

    def versions(self) -> list[str]:
        if not os.path.isdir(self.root):
            return []
        return sorted(d for d in os.listdir(self.root)
                      if d.startswith("v") and
                      os.path.isdir(os.path.join(self.root, d)))

    def load(self, version: str | None = None,
             verify_checksums: bool = True) -> LayerCatalog:
        version = version if version is not None else self.current_version()
        path = os.path.join(self.root, version, "catalog.json")
        with open(path, "r", encoding="utf-8") as fh:
            catalog = LayerCatalog.from_json(json.load(fh))
        if catalog.version != version:
            raise TwinError(f"catalog {path} names version "
                            f"{catalog.version!r}, expected {version!r}")
        if verify_checksums:
            for name, e in catalog.entries.items():
                full = os.path.join(self.model_dir, e.path)
                if not os.path.exists(full):
                    raise TwinError(f"catalog entry {name!r}: {e.path} missing")
                if _sha256(full) != e.checksum:
                    raise TwinError(f"catalog entry {name!r}: checksum "
                                    f"mismatch for {e.path}")
        return catalog

    # -- writing ---------------------------------------------------------

    def _write_version(self, catalog: LayerCatalog) -> None:
        vdir = os.path.join(self.root, catalog.version)
        os.makedirs(vdir, exist_ok=True)
        with open(os.path.join(vdir, "catalog.json"), "w",
                  encoding="utf-8", newline="\n") as fh:
            json.dump(catalog.to_json(), fh, indent=1, sort_keys=True)
            fh.write("\n")

    def _swap_current(self, version: str) -> None:
        tmp = os.path.join(self.root, CURRENT_FILE + ".tmp")
        with open(tmp, "w", encoding="utf-8") as fh:
            fh.write(version + "\n")
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, os.path.join(self.root, CURRENT_FILE))

    def initialize(self, year: int,
                   categories: dict[str, str] | None = None,
                   source: str = "synthetic generator") -> LayerCatalog:
        """Create v0001 covering every model artifact on disk."""
        categories = categories if categories is not None else DEFAULT_CATEGORIES
        entries = {}
        layers_dir = os.path.join(self.model_dir, "layers")
        if os.path.isdir(layers_dir):
            for fn in sorted(os.listdir(layers_dir)):
                if fn.endswith(".asc"):
                    name = fn[:-4]
                    entries[name] = CatalogEntry(
                        category=categories.get(name, "landform"),
                        version_year=year, source=source,
                        path=f"layers/{fn}",
                        checksum=_sha256(os.path.join(layers_dir, fn)))
        for name, fn in (("features", "features.json"),
                         ("roads", "roads.json"), ("events", "events.csv")):
            full = os.path.join(self.model_dir, fn)
            if os.path.exists(full):
                entries[name] = CatalogEntry(
                    category=categories.get(name, "proximity"),
                    version_year=year, source=source, path=fn,
                    checksum=_sha256(full))
        catalog = LayerCatalog("v0001", entries)
        self._write_version(catalog)
        self._swap_current("v0001")
        return catalog

    def _next_version(self) -> str:
        versions = self.versions()
        last = int(versions[-1][1:]) if versions else 0
        return f"v{last + 1:04d}"

    def _parse_payload(self, path):
        """(entry name, kind, parsed value) for one payload file."""
        base = os.path.basename(path)
        name, ext = os.path.splitext(base)
        if ext == ".asc":
            return name, "raster", read_raster(path, name=name)
        if ext == ".csv":
            return name, "events", read_events(path)
        if ext == ".json":
            collection = read_features(path)
            return name, "features", collection
        raise ParseError(f"unsupported payload type {ext!r} for {base}")

    def _diff(self, name: str, kind: str, new_value, old_entry) -> DiffReport:
        if old_entry is None:
            if kind == "raster":
                return DiffReport(name, kind, changed_fraction=1.0)
            if kind == "events":
                return DiffReport(name, kind, new_events=len(new_value))
            return DiffReport(name, kind, added=len(new_value), removed=0)
        old_path = os.path.join(self.model_dir, old_entry.path)
        if kind == "raster":
            old = read_raster(old_path, name=name)
            if old.spec != new_value.spec:
                return DiffReport(name, kind, changed_fraction=1.0)
            changed = int((old.values != new_value.values).sum())
            return DiffReport(name, kind,
                              changed_fraction=changed / old.values.size)
        if kind == "events":
            old = read_events(old_path)
            old_set = {(e.peril, e.x, e.y, e.date, e.severity) for e in old}
            new = sum(1 for e in new_value
                      if (e.peril, e.x, e.y, e.date, e.severity) not in old_set)
            return DiffReport(name, kind, new_events=new)
        old = read_features(old_path)
        old_ids = set(old.by_id)
        new_ids = set(new_value.by_id)
        return DiffReport(name, kind, added=len(new_ids - old_ids),
                          removed=len(old_ids - new_ids))

    def apply_update(self, category: str, payload_paths, year: int,
                     source: str = "yearly update"
                     ) -> tuple[LayerCatalog, list[DiffReport]]:
        """Ingest payload files into a new catalog version.

        Every payload must parse before anything is written; a parse error
        leaves the catalog untouched.  The previous version stays intact
        (append-only); CURRENT is swapped atomically at the end.
        """
        if category not in CATEGORIES:
            raise ValidationError(f"unknown catalog category {category!r}")
        payload_paths = [os.fspath(p) for p in payload_paths]
        if not payload_paths:
            raise ValidationError("no payload files given")
        parsed = [self._parse_payload(p) for p in payload_paths]

        lock = os.path.join(self.root, LOCK_FILE)
        os.makedirs(self.root, exist_ok=True)
        try:
            fd = os.open(lock, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
        except FileExistsError:
            raise TwinError("another catalog update is in progress") from None
        try:
            prior = self.load(verify_checksums=False)
            version = self._next_version()
            vdir = os.path.join(self.root, version)
            data_dir = os.path.join(vdir, "data")
            os.makedirs(data_dir, exist_ok=True)

            entries = dict(prior.entries)
            diffs = []
            for src_path, (name, kind, value) in zip(payload_paths, parsed):
                diffs.append(self._diff(name, kind, value,
                                        prior.entries.get(name)))
                dest_rel = f"{CATALOG_DIR}/{version}/data/{os.path.basename(src_path)}"
                dest = os.path.join(self.model_dir, dest_rel)
                shutil.copyfile(src_path, dest)
                entries[name] = CatalogEntry(
                    category=category, version_year=year, source=source,
                    path=dest_rel, checksum=_sha256(dest))
            catalog = LayerCatalog(version, entries)
            self._write_version(catalog)
            self._swap_current(version)
            return catalog, diffs
        finally:
            os.close(fd)
            os.unlink(lock)


def record_events_update(store: CatalogStore, events_csv, year: int):
    """Convenience wrapper for the yearly disaster recording."""
    return store.apply_update("geohazard", [events_csv], year,
                              source="disaster records")


# --- weather aggregation -----------------------------------------------------

@dataclass
class WeatherBucket:
    temp_mean: float
    precip_sum: float
    samples: int


@dataclass
class StationSeries:
    station_id: str
    hourly: dict[str, WeatherBucket] = field(default_factory=dict)
    daily: dict[str, WeatherBucket] = field(default_factory=dict)
    monthly: dict[str, WeatherBucket] = field(default_factory=dict)
    yearly: dict[str, WeatherBucket] = field(default_factory=dict)
    missing: dict[str, list[str]] = field(default_factory=dict)


_BUCKET_KEYS = {
    "hourly": lambda t: t.strftime("%Y-%m-%dT%H"),
    "daily": lambda t: t.strftime("%Y-%m-%d"),
    "monthly": lambda t: t.strftime("%Y-%m"),
    "yearly": lambda t: t.strftime("%Y"),
}

def _span_keys(gran: str, first: dt.datetime, last: dt.datetime) -> list[str]:
    """Every bucket key between the first and last reading, inclusive."""
    if gran == "yearly":
        return [f"{y:04d}" for y in range(first.year, last.year + 1)]
    if gran == "monthly":
        keys = []
        y, m = first.year, first.month
        while (y, m) <= (last.year, last.month):
            keys.append(f"{y:04d}-{m:02d}")
            y, m = (y + 1, 1) if m == 12 else (y, m + 1)
        return keys
    step = dt.timedelta(hours=1) if gran == "hourly" else dt.timedelta(days=1)
    start = first.replace(minute=0, second=0, microsecond=0)
    if gran == "daily":
        start = start.replace(hour=0)
    keys = []
    t = start
    while t <= last:
        keys.append(_BUCKET_KEYS[gran](t))
        t = t + step
    return keys


def aggregate_weather(readings) -> dict[str, StationSeries]:
    """Bucket minutely station readings into hourly/daily/monthly/yearly series.

    readings: iterable of (station_id, datetime, temp_c, precip_mm).
    Temperature is averaged over the samples present in a bucket; precipitation
    is summed.  Buckets with no samples inside a station's observed span are
    listed under `missing`.  Duplicate timestamps for a station are an error.
    """
    by_station: dict[str, list] = {}
    for station, ts, temp, precip in readings:
        by_station.setdefault(str(station), []).append((ts, float(temp),
                                                        float(precip)))
    out = {}
    for station, rows in sorted(by_station.items()):
        rows.sort(key=lambda r: r[0])
        for a, b in zip(rows, rows[1:]):
            if a[0] == b[0]:
                raise ValidationError(
                    f"station {station}: duplicate timestamp {a[0].isoformat()}")
        series = StationSeries(station_id=station)
        sums: dict[str, dict[str, list]] = {g: {} for g in _BUCKET_KEYS}
        for ts, temp, precip in rows:
            for gran, keyfn in _BUCKET_KEYS.items():
                key = keyfn(ts)
                acc = sums[gran].setdefault(key, [0.0, 0.0, 0])
                acc[0] += temp
                acc[1] += precip
                acc[2] += 1
        for gran in _BUCKET_KEYS:
            target = getattr(series, gran)
            for key, (tsum, psum, n) in sorted(sums[gran].items()):
                target[key] = WeatherBucket(temp_mean=tsum / n,
                                            precip_sum=psum, samples=n)
        first, last = rows[0][0], rows[-1][0]
        for gran in _BUCKET_KEYS:
            have = set(sums[gran])
            missing = [k for k in _span_keys(gran, first, last)
                       if k not in have]
            if missing:
                series.missing[gran] = missing
        out[station] = series
    return out


def read_weather_csv(path):
    """Rows of the station CSV `station_id,timestamp,temp_c,precip_mm`."""
    import csv
    rows = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["station_id", "timestamp", "temp_c", "precip_mm"]:
            raise ParseError("bad weather header, expected "
                             "'station_id,timestamp,temp_c,precip_mm'", line=1)
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 4:
                raise ParseError(f"expected 4 fields, got {len(row)}",
                                 line=lineno)
            try:
                rows.append((row[0], dt.datetime.fromisoformat(row[1]),
                             float(row[2]), float(row[3])))
            except ValueError as exc:
                raise ParseError(str(exc), line=lineno) from None
    return rows
