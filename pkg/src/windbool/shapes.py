"""Closed primitive meshes with outward orientation."""

from __future__ import annotations

import numpy as np

from .mesh import TriMesh

# corner i of a box has bits (x, y, z) = (i & 1, i >> 1 & 1, i >> 2 & 1)
_BOX_FACES = np.array(
    [
        [0, 2, 3], [0, 3, 1],  # z = lo
        [4, 5, 7], [4, 7, 6],  # z = hi
        [0, 1, 5], [0, 5, 4],  # y = lo
        [2, 6, 7], [2, 7, 3],  # y = hi
        [0, 4, 6], [0, 6, 2],  # x = lo
        [1, 3, 7], [1, 7, 5],  # x = hi
    ]
)


def box(lo=(0.0, 0.0, 0.0), hi=(1.0, 1.0, 1.0)) -> TriMesh:
    """Axis-aligned box with 8 vertices and 12 outward faces."""
    lo, hi = np.asarray(lo, float), np.asarray(hi, float)
    bits = (np.arange(8)[:, None] >> np.arange(3)) & 1
    return TriMesh(np.where(bits, hi, lo), _BOX_FACES)


def octahedron(radius=1.0, center=(0.0, 0.0, 0.0)) -> TriMesh:
    v = np.array(
        [[1, 0, 0], [-1, 0, 0], [0, 1, 0], [0, -1, 0], [0, 0, 1], [0, 0, -1]], float
    )
    f = [
        [0, 2, 4], [2, 1, 4], [1, 3, 4], [3, 0, 4],
        [2, 0, 5], [1, 2, 5], [3, 1, 5], [0, 3, 5],
    ]
    return TriMesh(v * radius + np.asarray(center, float), f)


def icosahedron(radius=1.0, center=(0.0, 0.0, 0.0)) -> TriMesh:
    t = (1.0 + 5.0 ** 0.5) / 2.0
    v = np.array(
        [
            [-1, t, 0], [1, t, 0], [-1, -t, 0], [1, -t, 0],
            [0, -1, t], [0, 1, t], [0, -1, -t], [0, 1, -t],
            [t, 0, -1], [t, 0, 1], [-t, 0, -1], [-t, 0, 1],
        ]
    )
    f = [
        [0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
        [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
        [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
        [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1],
    ]
    v = v / np.linalg.norm(v, axis=1, keepdims=True)
    return TriMesh(v * radius + np.asarray(center, float), f)


def icosphere(subdivisions=2, radius=1.0, center=(0.0, 0.0, 0.0)) -> TriMesh:
    """Geodesic sphere with ``20 * 4**subdivisions`` faces."""
    base = icosahedron()
    verts = [tuple(p) for p in base.vertices]
    faces = base.faces.tolist()
    for _ in range(subdivisions):
        midpoint = {}

        def mid(i, j):
            key = (i, j) if i < j else (j, i)
            if key not in midpoint:
                m = (np.asarray(verts[i]) + np.asarray(verts[j])) / 2.0
                verts.append(tuple(m / np.linalg.norm(m)))
                midpoint[key] = len(verts) - 1
            return midpoint[key]

        new = []
        for a, b, c in faces:
            ab, bc, ca = mid(a, b), mid(b, c), mid(c, a)
            new += [[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]
        faces = new
    v = np.array(verts) * radius + np.asarray(center, float)
    return TriMesh(v, faces)


def remove_faces(mesh: TriMesh, faces) -> TriMesh:
    """Copy of ``mesh`` without the listed faces (vertices are kept)."""
    keep = np.ones(mesh.n_faces, dtype=bool)
    keep[list(faces)] = False
    return TriMesh(mesh.vertices, mesh.faces[keep])
