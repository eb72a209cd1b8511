"""Constrained Delaunay triangulation of a triangle with interior constraints.

Works on exact 2D coordinates.  The triangulation is stored as a map from
each directed edge ``(u, v)`` of a counter-clockwise triangle to its apex.
"""

from __future__ import annotations

from .predicates import incircle, orient2d


class _Triangulation:
    def __init__(self, pts, keys):
        self.pts = pts
        self.keys = keys
        self.apex = {}
        self.fixed = set()

    def add(self, u, v, w):
        self.apex[(u, v)] = w
        self.apex[(v, w)] = u
        self.apex[(w, u)] = v

    def remove(self, u, v, w):
        del self.apex[(u, v)], self.apex[(v, w)], self.apex[(w, u)]

    def triangles(self):
        return [(u, v, w) for (u, v), w in self.apex.items() if u < v and u < w]

    def incircle(self, a, b, c, d):
        p, k = self.pts, self.keys
        return incircle(p[a], p[b], p[c], p[d], (k[a], k[b], k[c], k[d]))

    def insert_point(self, q):
        p = self.pts
        for u, v, w in self.triangles():
            o = (orient2d(p[u], p[v], p[q]), orient2d(p[v], p[w], p[q]), orient2d(p[w], p[u], p[q]))
            if min(o) < 0:
                continue
            zeros = o.count(0)
            if zeros == 0:
                self.remove(u, v, w)
                self.add(u, v, q)
                self.add(v, w, q)
                self.add(w, u, q)
                return
            if zeros == 1:
                # rotate so that q lies on edge (u, v)
                r = o.index(0)
                u, v, w = (u, v, w)[r:] + (u, v, w)[:r]
                self._split_edge(u, v, w, q)
                return
            raise ValueError("point coincides with an existing vertex")
        raise ValueError("point lies outside the domain")

    def _split_edge(self, u, v, w, q):
        x = self.apex.get((v, u))
        self.remove(u, v, w)
        self.add(u, q, w)
        self.add(q, v, w)
        if x is not None:
            self.remove(v, u, x)
            self.add(v, q, x)
            self.add(q, u, x)
        if frozenset((u, v)) in self.fixed:
            self.fixed.discard(frozenset((u, v)))
            self.fixed.update((frozenset((u, q)), frozenset((q, v))))

    def insert_segment(self, a, b):
        """Force edge ab.  No vertex may lie on the open segment and no fixed edge may cross it."""
        self.fixed.add(frozenset((a, b)))
        if (a, b) in self.apex or (b, a) in self.apex:
            return
        p = self.pts
        for (s, x), y in self.apex.items():
            if s == a and orient2d(p[a], p[x], p[b]) > 0 and orient2d(p[a], p[y], p[b]) < 0:
                break
        else:
            raise ValueError("segment start not found")
        crossed = [(a, x, y)]
        left, right = [y], [x]
        r, l = x, y
        while True:
            z = self.apex[(l, r)]
            crossed.append((l, r, z))
            if z == b:
                break
            if orient2d(p[a], p[b], p[z]) > 0:
                left.append(z)
                l = z
            else:
                right.append(z)
                r = z
        for t in crossed:
            self.remove(*t)
        self._fill(a, b, left)
        self._fill(b, a, right[::-1])

    def _fill(self, a, b, chain):
        # chain lies left of a -> b, ordered from a's side to b's side
        if not chain:
            return
        c = 0
        for j in range(1, len(chain)):
            if self.incircle(a, b, chain[c], chain[j]) > 0:
                c = j
        self._fill(a, chain[c], chain[:c])
        self._fill(chain[c], b, chain[c + 1:])
        self.add(a, b, chain[c])

    def make_delaunay(self):
        stack = [e for e in self.apex if e[0] < e[1] and (e[1], e[0]) in self.apex]
        while stack:
            u, v = stack.pop()
            if (u, v) not in self.apex or (v, u) not in self.apex:
                continue
            if frozenset((u, v)) in self.fixed:
                continue
            w, x = self.apex[(u, v)], self.apex[(v, u)]
            if self.incircle(u, v, w, x) > 0:
                self.remove(u, v, w)
                self.remove(v, u, x)
                self.add(u, x, w)
                self.add(x, v, w)
                stack += [(u, x), (x, v), (v, w), (w, u)]


def triangulate(pts, domain, segments, keys):
    """Constrained Delaunay triangulation of the triangle ``domain``.

    Args:
        pts: exact 2D points; every point lies in the closed domain triangle.
        domain: three indices into ``pts`` in counter-clockwise order.
        segments: index pairs to keep as edges.  They must not cross each
            other and no point may lie in the interior of one.
        keys: one comparable per point for deterministic tie-breaking.

    Returns:
        Counter-clockwise index triples covering the domain.
    """
    tri = _Triangulation(pts, keys)
    tri.add(*domain)
    rest = sorted(set(range(len(pts))) - set(domain), key=lambda i: keys[i])
    for q in rest:
        tri.insert_point(q)
    for a, b in segments:
        if a != b:
            tri.insert_segment(a, b)
    tri.make_delaunay()
    return sorted(tri.triangles())
