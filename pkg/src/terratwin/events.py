"""Hazard event records and their CSV format (`peril,x,y,date,severity`)."""

from __future__ import annotations

import csv
import datetime as dt
from dataclasses import dataclass

from .errors import ParseError, ValidationError

PERILS = ("wildfire", "flood", "landslide", "earthquake", "subsidence")


@dataclass(frozen=True)
class HazardEvent:
    peril: str
    x: float
    y: float
    date: dt.date
    severity: int

    def __post_init__(self):
        if self.peril not in PERILS:
            raise ValidationError(f"unknown peril {self.peril!r}")
        if not 1 <= self.severity <= 5:
            raise ValidationError(f"severity must be in 1..5, got {self.severity}")


def write_events(events, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["peril", "x", "y", "date", "severity"])
        for e in events:
            writer.writerow([e.peril, f"{e.x:.6f}", f"{e.y:.6f}",
                             e.date.isoformat(), e.severity])


def read_events(path) -> list[HazardEvent]:
    events = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["peril", "x", "y", "date", "severity"]:
            raise ParseError("bad events header, expected "
                             "'peril,x,y,date,severity'", line=1)
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 5:
                raise ParseError(f"expected 5 fields, got {len(row)}", line=lineno)
            try:
                events.append(HazardEvent(
                    peril=row[0], x=float(row[1]), y=float(row[2]),
                    date=dt.date.fromisoformat(row[3]), severity=int(row[4])))
            except (ValueError, ValidationError) as exc:
                raise ParseError(str(exc), line=lineno) from None
    return events


def split_by_date(events, cutoff: dt.date):
    """(events strictly before cutoff, events on/after cutoff)."""
    before = [e for e in events if e.date < cutoff]
    after = [e for e in events if e.date >= cutoff]
    return before, after
