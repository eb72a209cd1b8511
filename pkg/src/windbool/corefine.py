"""Mutual refinement of two meshes along their intersection curves.

All predicates and intersection constructions use exact rational
arithmetic; coordinates are rounded to doubles once, when the refined meshes
are materialized.  Equal exact points round to equal doubles, so the copies
of an intersection point on A and on B weld by bit pattern.
"""

from __future__ import annotations

import itertools
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import cdt
from .mesh import TriMesh
from .predicates import (
    cross,
    dominant_axis,
    dot,
    exact,
    lerp,
    normal,
    on_open_segment_2d,
    orient2d_value,
    project,
    segment_param_2d,
    sign,
    sub,
)
from .winding import build_bvh

__all__ = [
    "DegenerateTriangleError",
    "IntersectionSegment",
    "CoplanarOverlap",
    "CorefineStats",
    "RefinedPair",
    "candidate_pairs",
    "tri_tri_intersect",
    "corefine",
    "detect_coplanar_duplicates",
    "residual_intersections",
]

INTERIOR, EDGE, VERTEX = "interior", "edge", "vertex"


class DegenerateTriangleError(ValueError):
    """An input triangle has exactly collinear corners."""


@dataclass(frozen=True)
class IntersectionSegment:
    """Transversal contact of two triangles: a segment, or a single point.

    ``points`` are exact and sorted lexicographically.  ``where_a[i]`` tells
    whether ``points[i]`` is interior to triangle a, on one of its edges, or
    at one of its corners; likewise ``where_b``.
    """

    points: tuple
    where_a: tuple
    where_b: tuple
    face_a: int = -1
    face_b: int = -1

    @property
    def degenerate(self) -> bool:
        return len(self.points) == 1

    @property
    def rounded(self) -> np.ndarray:
        return np.array([[float(x) for x in p] for p in self.points])


@dataclass(frozen=True)
class CoplanarOverlap:
    """Closed overlap of two coplanar triangles as an exact convex polygon.

    Has between one (touching corners) and six vertices.
    """

    polygon: tuple
    face_a: int = -1
    face_b: int = -1

    @property
    def area2(self) -> Fraction:
        """Twice the overlap area measured in the dominant projection plane."""
        if len(self.polygon) < 3:
            return Fraction(0)
        n = normal(*self.polygon[:3])
        for i in range(3, len(self.polygon)):
            if any(n):
                break
            n = normal(self.polygon[0], self.polygon[i - 1], self.polygon[i])
        if not any(n):
            return Fraction(0)
        k = dominant_axis(n)
        q = [project(p, k) for p in self.polygon]
        return abs(sum(orient2d_value(q[0], q[i], q[i + 1]) for i in range(1, len(q) - 1)))


@dataclass
class CorefineStats:
    candidate_pairs: int = 0
    intersecting_pairs: int = 0
    coplanar_overlaps: int = 0
    skipped_degenerate: int = 0
    refined_faces_a: int = 0
    refined_faces_b: int = 0


@dataclass(frozen=True, eq=False)
class RefinedPair:
    """Both meshes after co-refinement.

    ``refined_a.origin`` maps each refined face to its original face in A
    (likewise for B).  ``exact_a``/``exact_b`` hold the rational coordinates
    of the refined vertices before rounding.  ``coplanar_pairs`` lists
    ``(face in refined_a, face in refined_b, same_orientation)`` for faces
    with identical corner positions.
    """

    refined_a: TriMesh
    refined_b: TriMesh
    exact_a: list
    exact_b: list
    coplanar_pairs: list = field(default_factory=list)
    stats: CorefineStats = field(default_factory=CorefineStats)


def _boxes_overlap(lo1, hi1, lo2, hi2) -> bool:
    return bool(np.all(lo1 <= hi2) and np.all(lo2 <= hi1))


def candidate_pairs(a: TriMesh, b: TriMesh) -> list[tuple[int, int]]:
    """Face pairs whose closed bounding boxes overlap (a superset of intersecting pairs)."""
    if a.n_faces == 0 or b.n_faces == 0:
        return []
    ta, tb = build_bvh(a, leaf_size=4), build_bvh(b, leaf_size=4)
    ca, cb = a.corners.reshape(-1, 3, 3), b.corners.reshape(-1, 3, 3)
    flo_a, fhi_a = ca.min(axis=1), ca.max(axis=1)
    flo_b, fhi_b = cb.min(axis=1), cb.max(axis=1)
    out = []
    stack = [(0, 0)]
    while stack:
        na, nb = stack.pop()
        if not _boxes_overlap(ta.lo[na], ta.hi[na], tb.lo[nb], tb.hi[nb]):
            continue
        leaf_a, leaf_b = ta.is_leaf(na), tb.is_leaf(nb)
        if leaf_a and leaf_b:
            for fa in ta.faces_of(na):
                for fb in tb.faces_of(nb):
                    if _boxes_overlap(flo_a[fa], fhi_a[fa], flo_b[fb], fhi_b[fb]):
                        out.append((int(fa), int(fb)))
        elif leaf_b or (not leaf_a and ta.count[na] >= tb.count[nb]):
            stack += [(ta.left[na], nb), (ta.right[na], nb)]
        else:
            stack += [(na, tb.left[nb]), (na, tb.right[nb])]
    return sorted(out)


def _plane_section(tri, d):
    """Points of a triangle on a plane, given the corners' signed plane distances."""
    pts = [tri[i] for i in range(3) if d[i] == 0]
    for i, j in ((0, 1), (1, 2), (2, 0)):
        if d[i] * d[j] < 0:
            pts.append(lerp(tri[i], tri[j], d[i] / (d[i] - d[j])))
    return pts


def _locate(tri, n, q) -> str:
    """Where q (in the triangle's plane) sits on the closed triangle."""
    zeros = 0
    for i in range(3):
        s = sign(dot(n, cross(sub(tri[(i + 1) % 3], tri[i]), sub(q, tri[i]))))
        if s < 0:
            raise AssertionError("point outside triangle")
        zeros += s == 0
    return (INTERIOR, EDGE, VERTEX)[zeros]


def _clip_convex(poly, edges_of):
    """Sutherland-Hodgman clipping of a 3D coplanar polygon by 2D half-planes.

    ``edges_of`` yields ``(a2, b2)`` pairs; the kept side is ``orient2d >= 0``.
    ``poly`` is a list of ``(p3, p2)`` pairs.
    """
    for a2, b2 in edges_of:
        if not poly:
            break
        out = []
        for i, (p3, p2) in enumerate(poly):
            q3, q2 = poly[(i + 1) % len(poly)]
            sp, sq = orient2d_value(a2, b2, p2), orient2d_value(a2, b2, q2)
            if sp >= 0:
                out.append((p3, p2))
            if (sp > 0 and sq < 0) or (sp < 0 and sq > 0):
                t = sp / (sp - sq)
                out.append((lerp(p3, q3, t), lerp(p2, q2, t)))
        poly = out
    unique = []
    for p in poly:
        if not unique or unique[-1][0] != p[0]:
            unique.append(p)
    while len(unique) > 1 and unique[0][0] == unique[-1][0]:
        unique.pop()
    return [p3 for p3, _ in unique]


def _coplanar(A, B, nA, nB):
    k = dominant_axis(nA)
    A2 = [project(p, k) for p in A]
    B2 = [project(p, k) for p in B]
    ia = [0, 1, 2] if nA[k] > 0 else [0, 2, 1]
    ib = [0, 1, 2] if nB[k] > 0 else [0, 2, 1]
    poly = [(B[i], B2[i]) for i in ib]
    edges = [(A2[ia[i]], A2[ia[(i + 1) % 3]]) for i in range(3)]
    return _clip_convex(poly, edges)


def tri_tri_intersect(a0, a1, a2, b0, b1, b2):
    """Exact intersection of two closed triangles.

    Returns ``None`` when they are disjoint, an :class:`IntersectionSegment`
    when they cross transversally (or touch in a point), and a
    :class:`CoplanarOverlap` when they share a supporting plane and meet.

    Raises:
        DegenerateTriangleError: either triangle is exactly collinear.
    """
    A = [exact(p) for p in (a0, a1, a2)]
    B = [exact(p) for p in (b0, b1, b2)]
    nA, nB = normal(*A), normal(*B)
    if not any(nA) or not any(nB):
        raise DegenerateTriangleError("collinear triangle")
    db = [dot(nA, sub(p, A[0])) for p in B]
    if all(d > 0 for d in db) or all(d < 0 for d in db):
        return None
    if all(d == 0 for d in db):
        poly = _coplanar(A, B, nA, nB)
        return CoplanarOverlap(tuple(poly)) if poly else None
    da = [dot(nB, sub(p, B[0])) for p in A]
    if all(d > 0 for d in da) or all(d < 0 for d in da):
        return None
    sa, sb = _plane_section(A, da), _plane_section(B, db)
    k = dominant_axis(cross(nA, nB))
    sa.sort(key=lambda p: p[k])
    sb.sort(key=lambda p: p[k])
    lo = sa[0] if sa[0][k] >= sb[0][k] else sb[0]
    hi = sa[-1] if sa[-1][k] <= sb[-1][k] else sb[-1]
    if lo[k] > hi[k]:
        return None
    pts = tuple(sorted({lo, hi}))
    return IntersectionSegment(
        pts,
        tuple(_locate(A, nA, p) for p in pts),
        tuple(_locate(B, nB, p) for p in pts),
    )


def _refine_face(tri, segments, points):
    """Triangulate one face so that every constraint becomes a union of edges.

    Returns counter-clockwise-consistent triangles (as exact 3D corner
    triples) with the original face orientation.
    """
    n = normal(*tri)
    k = dominant_axis(n)
    index = {}
    pts3 = []

    def add(p):
        if p not in index:
            index[p] = len(pts3)
            pts3.append(p)
        return index[p]

    for p in tri:
        add(p)
    segs = [(0, 1), (1, 2), (2, 0)]
    for p, q in segments:
        i, j = add(p), add(q)
        if i != j:
            segs.append((i, j))
    for p in points:
        add(p)
    pts2 = [project(p, k) for p in pts3]

    # crossing points between constraints
    segs = sorted({tuple(sorted(s)) for s in segs})
    for (i, j), (u, v) in itertools.combinations(segs, 2):
        o1 = orient2d_value(pts2[i], pts2[j], pts2[u])
        o2 = orient2d_value(pts2[i], pts2[j], pts2[v])
        if not ((o1 > 0 and o2 < 0) or (o1 < 0 and o2 > 0)):
            continue
        o3 = orient2d_value(pts2[u], pts2[v], pts2[i])
        o4 = orient2d_value(pts2[u], pts2[v], pts2[j])
        if (o3 > 0 and o4 < 0) or (o3 < 0 and o4 > 0):
            x = lerp(pts3[i], pts3[j], o3 / (o3 - o4))
            if x not in index:
                add(x)
                pts2.append(project(x, k))

    # split constraints at every point lying on them
    pieces = set()
    for i, j in segs:
        on = [m for m in range(len(pts3)) if on_open_segment_2d(pts2[i], pts2[j], pts2[m])]
        on.sort(key=lambda m: segment_param_2d(pts2[i], pts2[j], pts2[m]))
        chain = [i] + on + [j]
        pieces.update(tuple(sorted(e)) for e in zip(chain, chain[1:]))

    domain = (0, 1, 2) if n[k] > 0 else (0, 2, 1)
    tris = cdt.triangulate(pts2, domain, sorted(pieces), pts3)
    if n[k] < 0:
        tris = [(u, w, v) for u, v, w in tris]
    return [tuple(pts3[i] for i in t) for t in tris]


def _materialize(mesh: TriMesh, exact_vertices, constraints, label: int):
    """Build the refined mesh and its exact vertex list."""
    exact_out = list(exact_vertices)
    lookup = {}
    for i, p in enumerate(exact_out):
        lookup.setdefault(p, i)
    faces, origin = [], []
    for f in range(mesh.n_faces):
        corners = mesh.faces[f]
        segs, pts = constraints.get(f, ((), ()))
        if not segs and not pts:
            faces.append(tuple(int(c) for c in corners))
            origin.append(f)
            continue
        tri = tuple(exact_vertices[c] for c in corners)
        own = {tri[i]: int(corners[i]) for i in range(3)}
        for t in _refine_face(tri, segs, pts):
            ids = []
            for p in t:
                if p in own:
                    ids.append(own[p])
                    continue
                if p not in lookup:
                    lookup[p] = len(exact_out)
                    exact_out.append(p)
                ids.append(lookup[p])
            faces.append(tuple(ids))
            origin.append(f)
    vertices = np.array([[float(x) for x in p] for p in exact_out]).reshape(-1, 3)
    faces = np.array(faces, dtype=np.int64).reshape(-1, 3)
    return TriMesh(vertices, faces, origin, np.full(len(faces), label)), exact_out


def corefine(a: TriMesh, b: TriMesh) -> RefinedPair:
    """Refine A and B so that they meet only along shared vertices and edges.

    Coplanar overlaps are cut along the overlap polygon so that overlapping
    regions become pairs of identical faces, which are then listed in
    ``coplanar_pairs``.  Self-intersections within one input are left alone.
    """
    ea = [exact(p) for p in a.vertices.tolist()]
    eb = [exact(p) for p in b.vertices.tolist()]
    stats = CorefineStats()
    cons_a = defaultdict(lambda: ([], []))
    cons_b = defaultdict(lambda: ([], []))
    pairs = candidate_pairs(a, b)
    stats.candidate_pairs = len(pairs)
    for fa, fb in pairs:
        try:
            r = tri_tri_intersect(*(ea[i] for i in a.faces[fa]), *(eb[i] for i in b.faces[fb]))
        except DegenerateTriangleError:
            stats.skipped_degenerate += 1
            continue
        if r is None:
            continue
        stats.intersecting_pairs += 1
        if isinstance(r, CoplanarOverlap):
            stats.coplanar_overlaps += 1
            poly = r.polygon
            segs = list(zip(poly, poly[1:] + poly[:1])) if len(poly) > 1 else []
            pts = list(poly)
        else:
            segs = [r.points] if len(r.points) == 2 else []
            pts = list(r.points)
        for cons, f in ((cons_a, fa), (cons_b, fb)):
            cons[f][0].extend(segs)
            cons[f][1].extend(pts)
    refined_a, exact_a = _materialize(a, ea, cons_a, 0)
    refined_b, exact_b = _materialize(b, eb, cons_b, 1)
    stats.refined_faces_a, stats.refined_faces_b = refined_a.n_faces, refined_b.n_faces
    pair = RefinedPair(refined_a, refined_b, exact_a, exact_b, [], stats)
    return detect_coplanar_duplicates(pair)


def detect_coplanar_duplicates(pair: RefinedPair) -> RefinedPair:
    """List refined face pairs with identical exact corner positions.

    ``same_orientation`` is true when the two faces run through their
    shared corners in the same cyclic order.
    """
    ea, eb = pair.exact_a, pair.exact_b
    by_corners = defaultdict(list)
    for f, (i, j, k) in enumerate(pair.refined_a.faces.tolist()):
        key = frozenset((ea[i], ea[j], ea[k]))
        if len(key) == 3 and any(normal(ea[i], ea[j], ea[k])):
            by_corners[key].append(f)
    found = []
    for g, (i, j, k) in enumerate(pair.refined_b.faces.tolist()):
        cb = (eb[i], eb[j], eb[k])
        candidates = by_corners.get(frozenset(cb))
        if not candidates:
            continue
        f = candidates.pop(0)
        ca = [ea[v] for v in pair.refined_a.faces[f]]
        r = ca.index(cb[0])
        same = ca[(r + 1) % 3] == cb[1]
        found.append((f, g, same))
    found.sort()
    return RefinedPair(pair.refined_a, pair.refined_b, ea, eb, found, pair.stats)


def residual_intersections(pair: RefinedPair) -> list[tuple[int, int, object]]:
    """Exact all-pairs check for contacts that are not shared vertices/edges.

    Registered coplanar duplicates are allowed.  Returns the offending
    ``(face_a, face_b, intersection)`` triples; empty after a correct
    refinement.
    """
    ea, eb = pair.exact_a, pair.exact_b
    fa_list = [tuple(ea[i] for i in f) for f in pair.refined_a.faces.tolist()]
    fb_list = [tuple(eb[i] for i in f) for f in pair.refined_b.faces.tolist()]

    def box(t):
        return tuple(min(p[i] for p in t) for i in range(3)), tuple(max(p[i] for p in t) for i in range(3))

    boxes_b = [box(t) for t in fb_list]
    registered = {(f, g) for f, g, _ in pair.coplanar_pairs}
    bad = []
    for f, ta in enumerate(fa_list):
        lo, hi = box(ta)
        for g, tb in enumerate(fb_list):
            lo2, hi2 = boxes_b[g]
            if any(lo[i] > hi2[i] or lo2[i] > hi[i] for i in range(3)):
                continue
            try:
                r = tri_tri_intersect(*ta, *tb)
            except DegenerateTriangleError:
                continue
            if r is None or (f, g) in registered:
                continue
            if isinstance(r, CoplanarOverlap):
                contact = r.polygon if r.area2 == 0 else None
            else:
                contact = r.points
            if contact is None or not all(p in ta and p in tb for p in contact):
                bad.append((f, g, r))
    return bad
