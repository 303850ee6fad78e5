"""Pure-numpy implementations of the hot per-cell kernels.

These mirror the compiled core in `_core.pyx` operation-for-operation:
every floating-point expression is evaluated with the same operations in
the same order, so both backends produce bit-identical results.
"""

from __future__ import annotations

import numpy as np

BACKEND = "python"

# Fixed 8-neighborhood order: row-major over the 3x3 block without the center.
NEIGHBOR_OFFSETS = ((-1, -1), (-1, 0), (-1, 1), (0, -1),
                    (0, 1), (1, -1), (1, 0), (1, 1))

UNBURNED, BURNING, BURNED, NONFLAMMABLE = 0, 1, 2, 3


def point_min_dist2(xs, ys, px, py, d2):
    """Fold min squared distance to each of the points into d2 (in place).

    xs: (ncols,) cell-center eastings; ys: (nrows,) northings;
    px, py: (n,) point coordinates; d2: (nrows, ncols) running minimum.
    """
    for k in range(px.shape[0]):
        dx = xs - px[k]
        dy = ys - py[k]
        cand = dx * dx + (dy * dy)[:, None]
        np.minimum(d2, cand, out=d2)


def segment_min_dist2(xs, ys, segs, d2):
    """Fold min squared distance to each segment (ax, ay, bx, by) into d2."""
    for k in range(segs.shape[0]):
        ax, ay, bx, by = segs[k]
        dx = bx - ax
        dy = by - ay
        l2 = dx * dx + dy * dy
        if l2 == 0.0:
            ex = xs - ax
            ey = ys - ay
            cand = ex * ex + (ey * ey)[:, None]
        else:
            t = ((xs - ax) * dx)[None, :] + ((ys - ay) * dy)[:, None]
            t = t / l2
            np.clip(t, 0.0, 1.0, out=t)
            ex = xs[None, :] - (ax + t * dx)
            ey = ys[:, None] - (ay + t * dy)
            cand = ex * ex + ey * ey
        np.minimum(d2, cand, out=d2)


def polygon_parity(xs, ys, edges, inside):
    """Toggle even-odd containment parity for one polygon's edges (in place).

    Uses the half-open crossing rule `(ay > y) != (by > y)` with the ray cast
    toward +x; exact-boundary cells are the caller's concern.
    """
    for k in range(edges.shape[0]):
        ax, ay, bx, by = edges[k]
        rows = (ay > ys) != (by > ys)
        if not rows.any():
            continue
        x_cross = ax + (bx - ax) * (ys[rows] - ay) / (by - ay)
        inside[rows] ^= xs[None, :] < x_cross[:, None]


def count_within_radius(xs, ys, ex, ey, radius):
    """Per-cell count of points with squared distance <= radius^2."""
    counts = np.zeros((ys.shape[0], xs.shape[0]), dtype=np.int64)
    r2 = radius * radius
    for k in range(ex.shape[0]):
        dx = xs - ex[k]
        dy = ys - ey[k]
        counts += (dx * dx + (dy * dy)[:, None]) <= r2
    return counts


def fire_step(prev, ignite_step, p8, u, deterministic, step, burn_duration, nxt):
    """Advance the fire automaton one step; returns the new burning count.

    prev/nxt: int8 state grids (double buffered); ignite_step: int32 grid of
    ignition steps (-1 unset, updated in place); p8: (8, nrows, ncols) ignition
    probability from a burning neighbor at NEIGHBOR_OFFSETS[k]; u: (nrows,
    ncols, 8) uniform draws consumed in row-major cell order (ignored in
    deterministic mode, where ignition fires iff p >= 0.5).
    """
    np.copyto(nxt, prev)
    nrows, ncols = prev.shape
    burning_prev = prev == BURNING
    unburned = prev == UNBURNED
    ignite = np.zeros(prev.shape, dtype=bool)
    for k, (di, dj) in enumerate(NEIGHBOR_OFFSETS):
        src = np.zeros(prev.shape, dtype=bool)
        rs = slice(max(0, -di), nrows - max(0, di))
        cs = slice(max(0, -dj), ncols - max(0, dj))
        rs_src = slice(max(0, di), nrows + min(0, di))
        cs_src = slice(max(0, dj), ncols + min(0, dj))
        src[rs, cs] = burning_prev[rs_src, cs_src]
        if deterministic:
            trig = p8[k] >= 0.5
        else:
            trig = u[:, :, k] < p8[k]
        ignite |= unburned & src & trig
    nxt[ignite] = BURNING
    ignite_step[ignite] = step
    burnout = burning_prev & (step - ignite_step >= burn_duration)
    nxt[burnout] = BURNED
    return int(np.count_nonzero(nxt == BURNING))
