"""Hot-kernel dispatch: compiled core when available, numpy fallback otherwise.

Set TERRATWIN_KERNELS=python|cython to force a backend (cython raises if
the extension is missing).  `BACKEND` names the backend in use.  The two
backends are kept operation-for-operation identical, so results are
bit-identical either way.
"""

from __future__ import annotations

import os

import numpy as np

from . import _fallback

_forced = os.environ.get("TERRATWIN_KERNELS", "").strip().lower()

if _forced == "python":
    _impl = _fallback
elif _forced == "cython":
    from . import _core as _impl  # type: ignore[no-redef]
else:
    try:
        from . import _core as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = _fallback

BACKEND: str = _impl.BACKEND
NEIGHBOR_OFFSETS = _fallback.NEIGHBOR_OFFSETS
UNBURNED = _fallback.UNBURNED
BURNING = _fallback.BURNING
BURNED = _fallback.BURNED
NONFLAMMABLE = _fallback.NONFLAMMABLE


def _f64(a):
    return np.ascontiguousarray(a, dtype=np.float64)


def point_min_dist2(xs, ys, px, py, d2):
    _impl.point_min_dist2(_f64(xs), _f64(ys), _f64(px), _f64(py), d2)


def segment_min_dist2(xs, ys, segs, d2):
    segs = _f64(segs).reshape(-1, 4)
    _impl.segment_min_dist2(_f64(xs), _f64(ys), segs, d2)


def polygon_parity(xs, ys, edges, inside):
    edges = _f64(edges).reshape(-1, 4)
    if _impl is not _fallback and inside.dtype == np.bool_:
        _impl.polygon_parity(_f64(xs), _f64(ys), edges, inside.view(np.uint8))
    else:
        _impl.polygon_parity(_f64(xs), _f64(ys), edges, inside)


def count_within_radius(xs, ys, ex, ey, radius):
    return _impl.count_within_radius(_f64(xs), _f64(ys), _f64(ex), _f64(ey),
                                     float(radius))


def fire_step(prev, ignite_step, p8, u, deterministic, step, burn_duration, nxt):
    return _impl.fire_step(prev, ignite_step, p8, u, bool(deterministic),
                           int(step), int(burn_duration), nxt)
