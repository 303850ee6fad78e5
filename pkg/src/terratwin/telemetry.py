"""Per-stakeholder usage ledger and the row-normalized heatmap behind it."""

from __future__ import annotations

import threading

import numpy as np

from .catalog import CATEGORIES

ROLES = ("bank_insurance", "real_estate", "property_owner",
         "municipality", "farmer", "forestry")
OTHER_ROLE = "other"


class UsageLedger:
    """Monotone (role, category) counters; unknown roles land in 'other'."""

    def __init__(self):
        self._lock = threading.Lock()
        self._counts: dict[tuple[str, str], int] = {}

    def record(self, role: str, category: str) -> None:
        if category not in CATEGORIES:
            raise ValueError(f"unknown service category {category!r}")
        if role not in ROLES:
            role = OTHER_ROLE
        with self._lock:
            key = (role, category)
            self._counts[key] = self._counts.get(key, 0) + 1

    def count(self, role: str, category: str) -> int:
        with self._lock:
            return self._counts.get((role, category), 0)

    def matrix(self) -> np.ndarray:
        """Raw counts, shape (len(ROLES), len(CATEGORIES))."""
        out = np.zeros((len(ROLES), len(CATEGORIES)), dtype=np.float64)
        with self._lock:
            for (role, category), n in self._counts.items():
                if role == OTHER_ROLE:
                    continue
                out[ROLES.index(role), CATEGORIES.index(category)] = n
        return out


def usage_heatmap(ledger: UsageLedger) -> np.ndarray:
    """Each row divided by its own maximum; all-zero rows stay zero."""
    counts = ledger.matrix()
    out = np.zeros_like(counts)
    for r in range(counts.shape[0]):
        top = counts[r].max()
        if top > 0:
            out[r] = counts[r] / top
    return out
