"""Bounding volume hierarchy: binned SAH build and stack-based traversal.

The flattened node arrays are numba-friendly and shared read-only across
render workers. Traversal returns the nearest hit (prim id, t, barycentrics)
identical to brute force over all primitives.
"""

from __future__ import annotations

import numpy as np
from numba import njit

MAX_LEAF = 4
N_BINS = 16
INF = np.inf


@njit(cache=True, nogil=True)
def ray_triangle(ox, oy, oz, dx, dy, dz, v0, e1, e2):
    """Moller-Trumbore; returns (t, u, v) or t=-1 on miss. Two-sided."""
    px = dy * e2[2] - dz * e2[1]
    py = dz * e2[0] - dx * e2[2]
    pz = dx * e2[1] - dy * e2[0]
    det = e1[0] * px + e1[1] * py + e1[2] * pz
    if abs(det) < 1e-14:
        return -1.0, 0.0, 0.0
    inv = 1.0 / det
    tx = ox - v0[0]
    ty = oy - v0[1]
    tz = oz - v0[2]
    u = (tx * px + ty * py + tz * pz) * inv
    if u < -1e-12 or u > 1.0 + 1e-12:
        return -1.0, 0.0, 0.0
    qx = ty * e1[2] - tz * e1[1]
    qy = tz * e1[0] - tx * e1[2]
    qz = tx * e1[1] - ty * e1[0]
    v = (dx * qx + dy * qy + dz * qz) * inv
    if v < -1e-12 or u + v > 1.0 + 1e-12:
        return -1.0, 0.0, 0.0
    t = (e2[0] * qx + e2[1] * qy + e2[2] * qz) * inv
    return t, u, v


MAX_DEPTH = 60  # keeps the traversal stack bounded


@njit(cache=True, nogil=True)
def _build_nodes(prim_min, prim_max, centroids, node_min, node_max,
                 node_left, node_right, node_start, node_count, prim_order):
    n = prim_order.shape[0]
    stack = np.empty((MAX_DEPTH + 2, 4), dtype=np.int64)  # (node, start, end, depth)
    top = 0
    stack[top, 0] = 0
    stack[top, 1] = 0
    stack[top, 2] = n
    stack[top, 3] = 0
    top += 1
    n_nodes = 1
    while top > 0:
        top -= 1
        node = stack[top, 0]
        start = stack[top, 1]
        end = stack[top, 2]
        depth = stack[top, 3]
        count = end - start

        bmin = np.full(3, INF)
        bmax = np.full(3, -INF)
        cmin = np.full(3, INF)
        cmax = np.full(3, -INF)
        for k in range(start, end):
            p = prim_order[k]
            for a in range(3):
                if prim_min[p, a] < bmin[a]:
                    bmin[a] = prim_min[p, a]
                if prim_max[p, a] > bmax[a]:
                    bmax[a] = prim_max[p, a]
                if centroids[p, a] < cmin[a]:
                    cmin[a] = centroids[p, a]
                if centroids[p, a] > cmax[a]:
                    cmax[a] = centroids[p, a]
        node_min[node] = bmin
        node_max[node] = bmax

        axis = 0
        ext = cmax - cmin
        if ext[1] > ext[axis]:
            axis = 1
        if ext[2] > ext[axis]:
            axis = 2

        if count <= MAX_LEAF or ext[axis] < 1e-12 or depth >= MAX_DEPTH:
            node_left[node] = -1
            node_right[node] = -1
            node_start[node] = start
            node_count[node] = count
            continue

        # binned SAH along the widest centroid axis
        inv_ext = N_BINS / ext[axis]
        bin_count = np.zeros(N_BINS, dtype=np.int64)
        bin_min = np.full((N_BINS, 3), INF)
        bin_max = np.full((N_BINS, 3), -INF)
        for k in range(start, end):
            p = prim_order[k]
            b = int((centroids[p, axis] - cmin[axis]) * inv_ext)
            if b >= N_BINS:
                b = N_BINS - 1
            bin_count[b] += 1
            for a in range(3):
                if prim_min[p, a] < bin_min[b, a]:
                    bin_min[b, a] = prim_min[p, a]
                if prim_max[p, a] > bin_max[b, a]:
                    bin_max[b, a] = prim_max[p, a]

        # sweep: suffix areas then prefix scan for best split
        right_area = np.empty(N_BINS)
        acc_min = np.full(3, INF)
        acc_max = np.full(3, -INF)
        acc_n = 0
        right_n = np.empty(N_BINS, dtype=np.int64)
        for b in range(N_BINS - 1, -1, -1):
            if bin_count[b] > 0:
                for a in range(3):
                    if bin_min[b, a] < acc_min[a]:
                        acc_min[a] = bin_min[b, a]
                    if bin_max[b, a] > acc_max[a]:
                        acc_max[a] = bin_max[b, a]
            acc_n += bin_count[b]
            dx = max(acc_max[0] - acc_min[0], 0.0)
            dy = max(acc_max[1] - acc_min[1], 0.0)
            dz = max(acc_max[2] - acc_min[2], 0.0)
            right_area[b] = dx * dy + dy * dz + dz * dx if acc_n > 0 else 0.0
            right_n[b] = acc_n

        best_cost = INF
        best_split = -1
        acc_min[:] = INF
        acc_max[:] = -INF
        acc_n = 0
        for b in range(N_BINS - 1):
            if bin_count[b] > 0:
                for a in range(3):
                    if bin_min[b, a] < acc_min[a]:
                        acc_min[a] = bin_min[b, a]
                    if bin_max[b, a] > acc_max[a]:
                        acc_max[a] = bin_max[b, a]
            acc_n += bin_count[b]
            if acc_n == 0 or right_n[b + 1] == 0:
                continue
            dx = max(acc_max[0] - acc_min[0], 0.0)
            dy = max(acc_max[1] - acc_min[1], 0.0)
            dz = max(acc_max[2] - acc_min[2], 0.0)
            la = dx * dy + dy * dz + dz * dx
            cost = la * acc_n + right_area[b + 1] * right_n[b + 1]
            if cost < best_cost:
                best_cost = cost
                best_split = b

        if best_split < 0:
            node_left[node] = -1
            node_right[node] = -1
            node_start[node] = start
            node_count[node] = count
            continue

        # in-place partition by bin index
        mid = start
        hi = end - 1
        while mid <= hi:
            p = prim_order[mid]
            b = int((centroids[p, axis] - cmin[axis]) * inv_ext)
            if b >= N_BINS:
                b = N_BINS - 1
            if b <= best_split:
                mid += 1
            else:
                prim_order[mid], prim_order[hi] = prim_order[hi], prim_order[mid]
                hi -= 1
        if mid == start or mid == end:  # degenerate partition, fall back to median
            mid = start + count // 2

        left = n_nodes
        right = n_nodes + 1
        n_nodes += 2
        node_left[node] = left
        node_right[node] = right
        node_start[node] = -1
        node_count[node] = 0
        stack[top, 0] = right
        stack[top, 1] = mid
        stack[top, 2] = end
        stack[top, 3] = depth + 1
        top += 1
        stack[top, 0] = left
        stack[top, 1] = start
        stack[top, 2] = mid
        stack[top, 3] = depth + 1
        top += 1
    return n_nodes


class Bvh:
    """Flattened BVH over a triangle soup (v0 + edge vectors)."""

    def __init__(self, v0: np.ndarray, e1: np.ndarray, e2: np.ndarray):
        if len(v0) == 0:
            raise ValueError("cannot build a BVH over an empty scene")
        self.v0 = np.ascontiguousarray(v0, dtype=np.float64)
        self.e1 = np.ascontiguousarray(e1, dtype=np.float64)
        self.e2 = np.ascontiguousarray(e2, dtype=np.float64)
        n = len(v0)
        p1 = self.v0 + self.e1
        p2 = self.v0 + self.e2
        prim_min = np.minimum(np.minimum(self.v0, p1), p2)
        prim_max = np.maximum(np.maximum(self.v0, p1), p2)
        centroids = (prim_min + prim_max) * 0.5

        cap = 2 * n + 2
        self.node_min = np.empty((cap, 3))
        self.node_max = np.empty((cap, 3))
        self.node_left = np.empty(cap, dtype=np.int32)
        self.node_right = np.empty(cap, dtype=np.int32)
        self.node_start = np.empty(cap, dtype=np.int32)
        self.node_count = np.empty(cap, dtype=np.int32)
        self.prim_order = np.arange(n, dtype=np.int32)
        n_nodes = _build_nodes(prim_min, prim_max, centroids,
                               self.node_min, self.node_max, self.node_left,
                               self.node_right, self.node_start, self.node_count,
                               self.prim_order)
        for name in ("node_min", "node_max", "node_left", "node_right",
                     "node_start", "node_count"):
            setattr(self, name, getattr(self, name)[:n_nodes].copy())

    def arrays(self):
        return (self.node_min, self.node_max, self.node_left, self.node_right,
                self.node_start, self.node_count, self.prim_order,
                self.v0, self.e1, self.e2)


@njit(cache=True, nogil=True)
def _slab_hit(bmin, bmax, ox, oy, oz, ix, iy, iz, tmax):
    t0 = (bmin[0] - ox) * ix
    t1 = (bmax[0] - ox) * ix
    if t0 > t1:
        t0, t1 = t1, t0
    tn = t0
    tf = t1
    t0 = (bmin[1] - oy) * iy
    t1 = (bmax[1] - oy) * iy
    if t0 > t1:
        t0, t1 = t1, t0
    if t0 > tn:
        tn = t0
    if t1 < tf:
        tf = t1
    t0 = (bmin[2] - oz) * iz
    t1 = (bmax[2] - oz) * iz
    if t0 > t1:
        t0, t1 = t1, t0
    if t0 > tn:
        tn = t0
    if t1 < tf:
        tf = t1
    if tf < tn or tn > tmax or tf < 0.0:
        return INF
    return tn


@njit(cache=True, nogil=True)
def bvh_intersect(node_min, node_max, node_left, node_right, node_start,
                  node_count, prim_order, v0, e1, e2,
                  ox, oy, oz, dx, dy, dz, tmin, tmax):
    """Nearest hit in (tmin, tmax]; returns (prim, t, u, v), prim=-1 on miss."""
    ix = 1.0 / dx if dx != 0.0 else INF
    iy = 1.0 / dy if dy != 0.0 else INF
    iz = 1.0 / dz if dz != 0.0 else INF
    best_t = tmax
    best_prim = -1
    best_u = 0.0
    best_v = 0.0
    stack = np.empty(128, dtype=np.int32)
    top = 0
    stack[top] = 0
    top += 1
    while top > 0:
        top -= 1
        node = stack[top]
        if _slab_hit(node_min[node], node_max[node], ox, oy, oz, ix, iy, iz, best_t) == INF:
            continue
        cnt = node_count[node]
        if node_left[node] < 0:
            s = node_start[node]
            for k in range(s, s + cnt):
                p = prim_order[k]
                t, u, v = ray_triangle(ox, oy, oz, dx, dy, dz, v0[p], e1[p], e2[p])
                if tmin < t < best_t:
                    best_t = t
                    best_prim = p
                    best_u = u
                    best_v = v
        else:
            l = node_left[node]
            r = node_right[node]
            tl = _slab_hit(node_min[l], node_max[l], ox, oy, oz, ix, iy, iz, best_t)
            tr = _slab_hit(node_min[r], node_max[r], ox, oy, oz, ix, iy, iz, best_t)
            if tl > tr:
                l, r = r, l
                tl, tr = tr, tl
            if tr != INF:
                stack[top] = r
                top += 1
            if tl != INF:
                stack[top] = l
                top += 1
    if best_prim < 0:
        return -1, INF, 0.0, 0.0
    return best_prim, best_t, best_u, best_v


@njit(cache=True, nogil=True)
def bvh_occluded(node_min, node_max, node_left, node_right, node_start,
                 node_count, prim_order, v0, e1, e2,
                 ox, oy, oz, dx, dy, dz, tmin, tmax):
    """True iff any hit strictly inside (tmin, tmax)."""
    ix = 1.0 / dx if dx != 0.0 else INF
    iy = 1.0 / dy if dy != 0.0 else INF
    iz = 1.0 / dz if dz != 0.0 else INF
    stack = np.empty(128, dtype=np.int32)
    top = 0
    stack[top] = 0
    top += 1
    while top > 0:
        top -= 1
        node = stack[top]
        if _slab_hit(node_min[node], node_max[node], ox, oy, oz, ix, iy, iz, tmax) == INF:
            continue
        cnt = node_count[node]
        if node_left[node] < 0:
            s = node_start[node]
            for k in range(s, s + cnt):
                p = prim_order[k]
                t, u, v = ray_triangle(ox, oy, oz, dx, dy, dz, v0[p], e1[p], e2[p])
                if tmin < t < tmax:
                    return True
        else:
            stack[top] = node_left[node]
            top += 1
            stack[top] = node_right[node]
            top += 1
    return False
