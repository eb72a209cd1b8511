"""Indexed triangle meshes and the small set of measures shared by the pipeline."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

import numpy as np

__all__ = [
    "TriMesh",
    "MeshAudit",
    "barycenter",
    "flip_face",
    "flip_all",
    "signed_volume",
    "audit",
    "concatenate",
    "face_areas",
]


def _frozen(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class TriMesh:
    """Oriented triangle mesh over a shared vertex list.

    ``origin`` and ``source`` are optional per-face provenance tags: the index
    of the face this one was derived from, and a small integer label for the
    mesh it came from (0 for A, 1 for B in boolean results).

    Instances are immutable; every operation returns a new mesh.
    """

    vertices: np.ndarray
    faces: np.ndarray
    origin: np.ndarray | None = None
    source: np.ndarray | None = None

    def __post_init__(self):
        v = np.array(self.vertices, dtype=np.float64).reshape(-1, 3)
        f = np.array(self.faces, dtype=np.int64).reshape(-1, 3)
        if not np.all(np.isfinite(v)):
            raise ValueError("vertex coordinates must be finite")
        if len(f):
            if f.min() < 0 or f.max() >= len(v):
                raise ValueError("face index out of range")
            if np.any((f[:, 0] == f[:, 1]) | (f[:, 1] == f[:, 2]) | (f[:, 2] == f[:, 0])):
                raise ValueError("face with repeated vertex index")
        object.__setattr__(self, "vertices", _frozen(v))
        object.__setattr__(self, "faces", _frozen(f))
        for name in ("origin", "source"):
            tag = getattr(self, name)
            if tag is not None:
                tag = np.array(tag, dtype=np.int64).reshape(-1)
                if len(tag) != len(f):
                    raise ValueError(f"{name} must have one entry per face")
                object.__setattr__(self, name, _frozen(tag))

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_faces(self) -> int:
        return len(self.faces)

    @cached_property
    def corners(self) -> np.ndarray:
        """Face corner coordinates as a contiguous ``(n_faces, 9)`` array."""
        return _frozen(np.ascontiguousarray(self.vertices[self.faces].reshape(-1, 9)))

    def with_faces(self, faces, origin=None, source=None) -> "TriMesh":
        return TriMesh(self.vertices, faces, origin, source)

    def __eq__(self, other):
        if not isinstance(other, TriMesh):
            return NotImplemented
        return (
            np.array_equal(self.vertices, other.vertices)
            and np.array_equal(self.faces, other.faces)
            and _tags_equal(self.origin, other.origin)
            and _tags_equal(self.source, other.source)
        )

    __hash__ = None

    def __repr__(self):
        return f"TriMesh(n_vertices={self.n_vertices}, n_faces={self.n_faces})"


def _tags_equal(a, b):
    if a is None or b is None:
        return a is None and b is None
    return np.array_equal(a, b)


@dataclass(frozen=True)
class MeshAudit:
    is_edge_manifold: bool
    is_closed: bool
    degenerate_face_count: int
    boundary_edge_count: int


def _check_face(mesh: TriMesh, face: int) -> int:
    if not isinstance(face, (int, np.integer)) or not 0 <= face < mesh.n_faces:
        raise IndexError(f"face index {face!r} out of range for mesh with {mesh.n_faces} faces")
    return int(face)


def barycenter(mesh: TriMesh, face: int) -> np.ndarray:
    """Arithmetic mean of the face's three corners."""
    face = _check_face(mesh, face)
    p = mesh.vertices[mesh.faces[face]]
    return (p[0] + p[1] + p[2]) / 3.0


def barycenters(mesh: TriMesh) -> np.ndarray:
    p = mesh.vertices[mesh.faces]
    return (p[:, 0] + p[:, 1] + p[:, 2]) / 3.0


def flip_face(mesh: TriMesh, face: int) -> TriMesh:
    face = _check_face(mesh, face)
    faces = mesh.faces.copy()
    faces[face] = faces[face, ::-1]
    return TriMesh(mesh.vertices, faces, mesh.origin, mesh.source)


def flip_all(mesh: TriMesh) -> TriMesh:
    return TriMesh(mesh.vertices, mesh.faces[:, ::-1], mesh.origin, mesh.source)


def concatenate(*meshes: TriMesh) -> TriMesh:
    """Disjoint union of meshes; vertex lists are stacked, not welded."""
    vertices, faces, offset = [], [], 0
    for m in meshes:
        vertices.append(m.vertices)
        faces.append(m.faces + offset)
        offset += m.n_vertices
    if not meshes:
        return TriMesh(np.zeros((0, 3)), np.zeros((0, 3), dtype=np.int64))
    return TriMesh(np.concatenate(vertices), np.concatenate(faces))


def signed_volume(mesh: TriMesh) -> float:
    """Volume enclosed by a closed outward-oriented mesh (negative if inward).

    Uses a correctly rounded sum so that flipping every face negates the
    result exactly.
    """
    if mesh.n_faces == 0:
        return 0.0
    # lead with the lowest vertex index so that reversing a face negates
    # its triple product bit for bit
    f = mesh.faces
    lead = np.argmin(f, axis=1)[:, None]
    f = np.take_along_axis(f, (lead + np.arange(3)) % 3, axis=1)
    p = mesh.vertices[f]
    det = np.einsum("ij,ij->i", p[:, 0], np.cross(p[:, 1], p[:, 2]))
    return math.fsum(det.tolist()) / 6.0


def face_areas(mesh: TriMesh) -> np.ndarray:
    p = mesh.vertices[mesh.faces]
    return 0.5 * np.linalg.norm(np.cross(p[:, 1] - p[:, 0], p[:, 2] - p[:, 0]), axis=1)


def _exactly_collinear(a, b, c) -> bool:
    a, b, c = ([Fraction(x) for x in p] for p in (a, b, c))
    u = [b[i] - a[i] for i in range(3)]
    v = [c[i] - a[i] for i in range(3)]
    return (
        u[1] * v[2] == u[2] * v[1]
        and u[2] * v[0] == u[0] * v[2]
        and u[0] * v[1] == u[1] * v[0]
    )


def degenerate_faces(mesh: TriMesh) -> np.ndarray:
    """Indices of faces whose corners are exactly collinear."""
    if mesh.n_faces == 0:
        return np.zeros(0, dtype=np.int64)
    p = mesh.vertices[mesh.faces]
    e1, e2 = p[:, 1] - p[:, 0], p[:, 2] - p[:, 0]
    cross = np.linalg.norm(np.cross(e1, e2), axis=1)
    scale = np.linalg.norm(e1, axis=1) * np.linalg.norm(e2, axis=1)
    # float cross products well above rounding level cannot hide an exact zero
    suspect = np.flatnonzero(cross <= 1e-12 * scale)
    return np.array(
        [i for i in suspect if _exactly_collinear(*p[i])], dtype=np.int64
    )


def edge_balance(edges: np.ndarray):
    """Balance of directed edges ``(k, 2)`` per undirected edge.

    Returns ``(keys, count, net)``: sorted undirected keys, how many edges
    map to each, and forward minus backward uses (forward = low to high).
    """
    edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    if len(edges) == 0:
        empty = np.zeros(0, dtype=np.int64)
        return np.zeros((0, 2), dtype=np.int64), empty, empty
    fwd = edges[:, 0] < edges[:, 1]
    keys, inv = np.unique(np.sort(edges, axis=1), axis=0, return_inverse=True)
    inv = inv.reshape(-1)
    count = np.bincount(inv, minlength=len(keys))
    net = np.bincount(inv, weights=np.where(fwd, 1, -1), minlength=len(keys)).astype(np.int64)
    return keys, count, net


def face_edges(faces: np.ndarray) -> np.ndarray:
    faces = np.asarray(faces).reshape(-1, 3)
    return np.concatenate([faces[:, [0, 1]], faces[:, [1, 2]], faces[:, [2, 0]]])


def audit(mesh: TriMesh) -> MeshAudit:
    """Report closedness and manifoldness without touching the mesh.

    An edge is balanced when it is used equally often in each direction; a
    mesh is closed when every edge is balanced.
    """
    _, count, net = edge_balance(face_edges(mesh.faces))
    boundary = int(np.count_nonzero(net))
    return MeshAudit(
        is_edge_manifold=bool(np.all(count <= 2)),
        is_closed=boundary == 0,
        degenerate_face_count=len(degenerate_faces(mesh)),
        boundary_edge_count=boundary,
    )
