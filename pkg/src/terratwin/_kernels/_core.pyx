# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled implementations of the hot per-cell kernels.

Mirrors `_fallback.py` operation-for-operation so both backends produce
bit-identical results; keep the two files in lockstep.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport sqrt

cnp.import_array()

BACKEND = "cython"

NEIGHBOR_OFFSETS = ((-1, -1), (-1, 0), (-1, 1), (0, -1),
                    (0, 1), (1, -1), (1, 0), (1, 1))

UNBURNED, BURNING, BURNED, NONFLAMMABLE = 0, 1, 2, 3

cdef int[8] _OFF_I = [-1, -1, -1, 0, 0, 1, 1, 1]
cdef int[8] _OFF_J = [-1, 0, 1, -1, 1, -1, 0, 1]


def point_min_dist2(double[::1] xs, double[::1] ys,
                    double[::1] px, double[::1] py,
                    double[:, ::1] d2):
    cdef Py_ssize_t nrows = ys.shape[0], ncols = xs.shape[0], n = px.shape[0]
    cdef Py_ssize_t i, j, k
    cdef double dx, dy, dy2, cand
    for k in range(n):
        for i in range(nrows):
            dy = ys[i] - py[k]
            dy2 = dy * dy
            for j in range(ncols):
                dx = xs[j] - px[k]
                cand = dx * dx + dy2
                if cand < d2[i, j]:
                    d2[i, j] = cand


def segment_min_dist2(double[::1] xs, double[::1] ys,
                      double[:, ::1] segs, double[:, ::1] d2):
    cdef Py_ssize_t nrows = ys.shape[0], ncols = xs.shape[0], m = segs.shape[0]
    cdef Py_ssize_t i, j, k
    cdef double ax, ay, bx, by, dx, dy, l2, t, ex, ey, cand, ey2
    for k in range(m):
        ax = segs[k, 0]
        ay = segs[k, 1]
        bx = segs[k, 2]
        by = segs[k, 3]
        dx = bx - ax
        dy = by - ay
        l2 = dx * dx + dy * dy
        if l2 == 0.0:
            for i in range(nrows):
                ey = ys[i] - ay
                ey2 = ey * ey
                for j in range(ncols):
                    ex = xs[j] - ax
                    cand = ex * ex + ey2
                    if cand < d2[i, j]:
                        d2[i, j] = cand
        else:
            for i in range(nrows):
                for j in range(ncols):
                    t = ((xs[j] - ax) * dx + (ys[i] - ay) * dy) / l2
                    if t < 0.0:
                        t = 0.0
                    elif t > 1.0:
                        t = 1.0
                    ex = xs[j] - (ax + t * dx)
                    ey = ys[i] - (ay + t * dy)
                    cand = ex * ex + ey * ey
                    if cand < d2[i, j]:
                        d2[i, j] = cand


def polygon_parity(double[::1] xs, double[::1] ys,
                   double[:, ::1] edges, cnp.uint8_t[:, ::1] inside):
    cdef Py_ssize_t nrows = ys.shape[0], ncols = xs.shape[0], m = edges.shape[0]
    cdef Py_ssize_t i, j, k
    cdef double ax, ay, bx, by, y, x_cross
    for k in range(m):
        ax = edges[k, 0]
        ay = edges[k, 1]
        bx = edges[k, 2]
        by = edges[k, 3]
        for i in range(nrows):
            y = ys[i]
            if (ay > y) != (by > y):
                x_cross = ax + (bx - ax) * (y - ay) / (by - ay)
                for j in range(ncols):
                    if xs[j] < x_cross:
                        inside[i, j] ^= 1


def count_within_radius(double[::1] xs, double[::1] ys,
                        double[::1] ex, double[::1] ey, double radius):
    cdef Py_ssize_t nrows = ys.shape[0], ncols = xs.shape[0], n = ex.shape[0]
    cdef Py_ssize_t i, j, k
    cdef double dx, dy, dy2, r2 = radius * radius
    counts = np.zeros((nrows, ncols), dtype=np.int64)
    cdef long long[:, ::1] c = counts
    for k in range(n):
        for i in range(nrows):
            dy = ys[i] - ey[k]
            dy2 = dy * dy
            for j in range(ncols):
                dx = xs[j] - ex[k]
                if dx * dx + dy2 <= r2:
                    c[i, j] += 1
    return counts


def fire_step(cnp.int8_t[:, ::1] prev, cnp.int32_t[:, ::1] ignite_step,
              double[:, :, ::1] p8, double[:, :, ::1] u,
              bint deterministic, int step, int burn_duration,
              cnp.int8_t[:, ::1] nxt):
    cdef Py_ssize_t nrows = prev.shape[0], ncols = prev.shape[1]
    cdef Py_ssize_t i, j, k, si, sj
    cdef int count = 0
    cdef cnp.int8_t s, ns
    cdef double p
    cdef bint fire
    for i in range(nrows):
        for j in range(ncols):
            s = prev[i, j]
            ns = s
            if s == 0:  # UNBURNED
                for k in range(8):
                    si = i + _OFF_I[k]
                    sj = j + _OFF_J[k]
                    if si < 0 or si >= nrows or sj < 0 or sj >= ncols:
                        continue
                    if prev[si, sj] != 1:  # BURNING
                        continue
                    p = p8[k, i, j]
                    if deterministic:
                        fire = p >= 0.5
                    else:
                        fire = u[i, j, k] < p
                    if fire:
                        ns = 1
                        ignite_step[i, j] = step
                        break
            elif s == 1:  # BURNING
                if step - ignite_step[i, j] >= burn_duration:
                    ns = 2  # BURNED
            nxt[i, j] = ns
            if ns == 1:
                count += 1
    return count
