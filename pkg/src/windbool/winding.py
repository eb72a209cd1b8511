"""Generalized winding numbers of oriented triangle meshes.

The winding number of a mesh at a point is the sum of the signed solid
angles of its triangles divided by 4*pi.  Sums are accumulated with an
error-free-transformation (TwoSum) compensated scheme.

Batch evaluation walks a bounding volume hierarchy.  A subtree whose box
does not contain the query point is replaced by a fan of triangles that
closes the subtree's boundary curve to the box center: the subtree plus the
reversed fan is a closed surface lying inside the box, so its winding number
at an outside point is zero and the fan reproduces the subtree's value
exactly.  Subtrees that are themselves closed contribute nothing.  No
far-field approximation is involved.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numba
import numpy as np

from .mesh import TriMesh, edge_balance, face_edges

__all__ = [
    "OnSurfaceError",
    "WindingBvh",
    "solid_angle",
    "winding_number",
    "build_bvh",
    "winding_number_batch",
    "resolve_threads",
]

THREADS_ENV = "WIND_BOOL_THREADS"
_INV_4PI = 1.0 / (4.0 * math.pi)


class OnSurfaceError(ValueError):
    """The query point lies exactly on the surface, where winding is undefined."""


@numba.njit(cache=True, nogil=True)
def _in_closed_triangle(ax, ay, az, bx, by, bz, cx, cy, cz, den):
    """Whether the origin lies in the closed triangle, given zero volume.

    Works in the projection along the dominant normal axis; the edge terms
    of two triangles sharing an edge are exact negatives of each other, so
    a point on that edge is caught by at least one of them.
    """
    nx = (by - ay) * (cz - az) - (bz - az) * (cy - ay)
    ny = (bz - az) * (cx - ax) - (bx - ax) * (cz - az)
    nz = (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)
    mx, my, mz = abs(nx), abs(ny), abs(nz)
    if mx == 0.0 and my == 0.0 and mz == 0.0:
        # collinear corners: on it when between two of them
        return den <= 0.0
    if mx >= my and mx >= mz:
        u0, v0, u1, v1, u2, v2 = ay, az, by, bz, cy, cz
    elif my >= mz:
        u0, v0, u1, v1, u2, v2 = az, ax, bz, bx, cz, cx
    else:
        u0, v0, u1, v1, u2, v2 = ax, ay, bx, by, cx, cy
    e0 = u0 * v1 - v0 * u1
    e1 = u1 * v2 - v1 * u2
    e2 = u2 * v0 - v2 * u0
    return (e0 >= 0.0 and e1 >= 0.0 and e2 >= 0.0) or (e0 <= 0.0 and e1 <= 0.0 and e2 <= 0.0)


@numba.njit(cache=True, nogil=True)
def _tri_solid_angle(px, py, pz, t):
    """Signed solid angle of the triangle stored in ``t[0:9]`` seen from p.

    Returns ``(omega, on_surface)``.
    """
    ax = t[0] - px
    ay = t[1] - py
    az = t[2] - pz
    bx = t[3] - px
    by = t[4] - py
    bz = t[5] - pz
    cx = t[6] - px
    cy = t[7] - py
    cz = t[8] - pz
    la = math.sqrt(ax * ax + ay * ay + az * az)
    lb = math.sqrt(bx * bx + by * by + bz * bz)
    lc = math.sqrt(cx * cx + cy * cy + cz * cz)
    det = ax * (by * cz - bz * cy) - ay * (bx * cz - bz * cx) + az * (bx * cy - by * cx)
    # grouped so that swapping b and c leaves den bit-identical and negates det
    ab = ax * bx + ay * by + az * bz
    ac = ax * cx + ay * cy + az * cz
    bc = bx * cx + by * cy + bz * cz
    den = la * (lb * lc) + bc * la + (ab * lc + ac * lb)
    if det == 0.0:
        # p in the triangle's plane: undefined on it, zero elsewhere
        return 0.0, _in_closed_triangle(ax, ay, az, bx, by, bz, cx, cy, cz, den)
    return 2.0 * math.atan2(det, den), False


@numba.njit(cache=True, nogil=True)
def _sum_range(px, py, pz, tris, start, stop, s, c, compensated):
    on = False
    for f in range(start, stop):
        x, hit = _tri_solid_angle(px, py, pz, tris[f])
        if hit:
            on = True
        if compensated:
            t = s + x
            z = t - s
            c += (s - (t - z)) + (x - z)
            s = t
        else:
            s += x
    return s, c, on


@numba.njit(cache=True, nogil=True)
def _direct(p, tris, compensated):
    s, c, on = _sum_range(p[0], p[1], p[2], tris, 0, tris.shape[0], 0.0, 0.0, compensated)
    if on:
        return np.nan
    return (s + c) * _INV_4PI


@numba.njit(cache=True, nogil=True)
def _hierarchical(points, out, lo, hi, left, right, start, count,
                  cap_start, cap_count, tris, caps, compensated):
    stack = np.empty(256, dtype=np.int64)
    for i in range(points.shape[0]):
        px = points[i, 0]
        py = points[i, 1]
        pz = points[i, 2]
        s = 0.0
        c = 0.0
        on = False
        stack[0] = 0
        sp = 1
        while sp > 0:
            sp -= 1
            n = stack[sp]
            outside = (
                px < lo[n, 0] or px > hi[n, 0]
                or py < lo[n, 1] or py > hi[n, 1]
                or pz < lo[n, 2] or pz > hi[n, 2]
            )
            if outside and cap_count[n] >= 0:
                k = cap_start[n]
                s, c, hit = _sum_range(px, py, pz, caps, k, k + cap_count[n], s, c, compensated)
            elif left[n] < 0:
                s, c, hit = _sum_range(px, py, pz, tris, start[n], start[n] + count[n],
                                       s, c, compensated)
                on = on or hit
            else:
                stack[sp] = right[n]
                stack[sp + 1] = left[n]
                sp += 2
        out[i] = np.nan if on else (s + c) * _INV_4PI


def solid_angle(p, a, b, c) -> float:
    """Signed solid angle (steradians) subtended at ``p`` by triangle ``(a, b, c)``.

    Positive when the triangle winds counter-clockwise as seen from ``p``
    looking against its normal, so a closed outward surface around ``p``
    totals 4*pi.

    Raises:
        OnSurfaceError: ``p`` coincides with a corner or lies exactly on the
            closed triangle.
    """
    t = np.concatenate([np.asarray(q, dtype=np.float64).reshape(3) for q in (a, b, c)])
    p = np.asarray(p, dtype=np.float64).reshape(3)
    omega, on = _tri_solid_angle(p[0], p[1], p[2], t)
    if on:
        raise OnSurfaceError(f"point {tuple(p)} lies on the triangle")
    return float(omega)


def winding_number(mesh: TriMesh, p, compensated=True) -> float:
    """Generalized winding number of ``mesh`` at ``p`` by direct summation.

    Raises:
        OnSurfaceError: ``p`` lies exactly on one of the faces.
    """
    p = np.asarray(p, dtype=np.float64).reshape(3)
    if mesh.n_faces == 0:
        return 0.0
    w = _direct(p, mesh.corners, compensated)
    if math.isnan(w):
        raise OnSurfaceError(f"point {tuple(p)} lies on the mesh")
    return float(w)


@dataclass(frozen=True, eq=False)
class WindingBvh:
    """Flattened median-split box hierarchy over the faces of one mesh.

    Node 0 is the root.  Every node covers the contiguous run
    ``order[start:start + count]`` of face indices; leaves have ``left == -1``.
    ``caps[cap_start:cap_start + cap_count]`` holds the closing fan of a
    node's boundary, or ``cap_count == -1`` where the fan is not smaller
    than the subtree itself.
    """

    n_faces: int
    order: np.ndarray
    lo: np.ndarray
    hi: np.ndarray
    left: np.ndarray
    right: np.ndarray
    start: np.ndarray
    count: np.ndarray
    cap_start: np.ndarray
    cap_count: np.ndarray
    tris: np.ndarray
    caps: np.ndarray

    @property
    def n_nodes(self) -> int:
        return len(self.left)

    def is_leaf(self, node: int) -> bool:
        return self.left[node] < 0

    def faces_of(self, node: int) -> np.ndarray:
        return self.order[self.start[node]:self.start[node] + self.count[node]]

    def leaves(self) -> list[int]:
        return [n for n in range(self.n_nodes) if self.left[n] < 0]


def _boundary_edges(edges: np.ndarray) -> np.ndarray:
    """Directed boundary edges, with multiplicity, of a set of directed edges."""
    keys, _, net = edge_balance(edges)
    keep = net != 0
    keys, net = keys[keep], net[keep]
    oriented = np.where((net > 0)[:, None], keys, keys[:, ::-1])
    return np.repeat(oriented, np.abs(net), axis=0)


def build_bvh(mesh: TriMesh, leaf_size: int = 8) -> WindingBvh:
    """Median-split hierarchy on the longest box axis; deterministic."""
    if mesh.n_faces == 0:
        raise ValueError("cannot build a hierarchy over an empty mesh")
    corners = mesh.corners.reshape(-1, 3, 3)
    fmin, fmax = corners.min(axis=1), corners.max(axis=1)
    centroid = corners.mean(axis=1)
    order = np.arange(mesh.n_faces)
    nodes = []  # [lo, hi, left, right, start, count, boundary]

    def build(s, e):
        idx = order[s:e]
        lo, hi = fmin[idx].min(axis=0), fmax[idx].max(axis=0)
        node = len(nodes)
        nodes.append([lo, hi, -1, -1, s, e - s, None])
        if e - s <= leaf_size:
            nodes[node][6] = _boundary_edges(face_edges(mesh.faces[idx]))
            return node
        axis = int(np.argmax(hi - lo))
        order[s:e] = idx[np.argsort(centroid[idx, axis], kind="stable")]
        m = s + (e - s) // 2
        l, r = build(s, m), build(m, e)
        nodes[node][2], nodes[node][3] = l, r
        nodes[node][6] = _boundary_edges(np.concatenate([nodes[l][6], nodes[r][6]]))
        return node

    build(0, mesh.n_faces)

    cap_start = np.zeros(len(nodes), dtype=np.int64)
    cap_count = np.full(len(nodes), -1, dtype=np.int64)
    cap_blocks, total = [], 0
    for n, (lo, hi, _, _, _, cnt, bnd) in enumerate(nodes):
        if len(bnd) >= cnt:
            continue
        center = (lo + hi) / 2.0
        block = np.empty((len(bnd), 9))
        block[:, 0:3] = mesh.vertices[bnd[:, 0]]
        block[:, 3:6] = mesh.vertices[bnd[:, 1]]
        block[:, 6:9] = center
        cap_blocks.append(block)
        cap_start[n], cap_count[n] = total, len(bnd)
        total += len(bnd)

    def col(i, dtype=np.int64):
        return np.array([nd[i] for nd in nodes], dtype=dtype)

    caps = np.concatenate(cap_blocks) if cap_blocks else np.zeros((0, 9))
    return WindingBvh(
        n_faces=mesh.n_faces,
        order=order,
        lo=np.array([nd[0] for nd in nodes]),
        hi=np.array([nd[1] for nd in nodes]),
        left=col(2),
        right=col(3),
        start=col(4),
        count=col(5),
        cap_start=cap_start,
        cap_count=cap_count,
        tris=np.ascontiguousarray(mesh.corners[order]),
        caps=np.ascontiguousarray(caps),
    )


def resolve_threads(threads=None) -> int:
    """Worker count from the argument, then ``WIND_BOOL_THREADS``, then the CPU count."""
    if threads in (None, "auto"):
        threads = os.environ.get(THREADS_ENV) or "auto"
        if threads == "auto":
            return os.cpu_count() or 1
    threads = int(threads)
    if threads < 1:
        raise ValueError("thread count must be positive")
    return threads


def winding_number_batch(mesh: TriMesh, bvh: WindingBvh, points, threads=None,
                         compensated=True) -> np.ndarray:
    """Winding numbers at many points; NaN marks points lying on the surface.

    Each point is evaluated independently with a fixed traversal order, so
    the output is bitwise identical for any thread count.
    """
    if bvh.n_faces != mesh.n_faces:
        raise ValueError("hierarchy was built for a different mesh")
    points = np.ascontiguousarray(np.asarray(points, dtype=np.float64).reshape(-1, 3))
    out = np.empty(len(points))
    args = (bvh.lo, bvh.hi, bvh.left, bvh.right, bvh.start, bvh.count,
            bvh.cap_start, bvh.cap_count, bvh.tris, bvh.caps, compensated)

    def run(sl):
        _hierarchical(points[sl], out[sl], *args)

    workers = resolve_threads(threads)
    if workers == 1 or len(points) < 64:
        run(slice(None))
    else:
        bounds = np.linspace(0, len(points), workers * 4 + 1).astype(int)
        with ThreadPoolExecutor(workers) as pool:
            list(pool.map(run, [slice(a, b) for a, b in zip(bounds[:-1], bounds[1:])]))
    return out
