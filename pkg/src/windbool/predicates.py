"""Exact rational geometry on points with ``Fraction`` coordinates.

Doubles convert to ``Fraction`` without loss, so every predicate here is
exact for double input and for points constructed from it.
"""

from __future__ import annotations

from fractions import Fraction

Point = tuple  # (Fraction, Fraction, Fraction) or (Fraction, Fraction)


def exact(p) -> Point:
    return tuple(Fraction(x) if not isinstance(x, Fraction) else x for x in p)


def sign(x) -> int:
    return (x > 0) - (x < 0)


def sub(a, b):
    return tuple(x - y for x, y in zip(a, b))


def dot(a, b):
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]


def cross(a, b):
    return (
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    )


def normal(a, b, c):
    """Unnormalized face normal; the zero vector for collinear corners."""
    return cross(sub(b, a), sub(c, a))


def lerp(a, b, t):
    return tuple(x + (y - x) * t for x, y in zip(a, b))


def orient3d(a, b, c, d) -> int:
    """Sign of det[b - a, c - a, d - a]; positive when d is on the side ``normal(a, b, c)`` points to."""
    return sign(dot(normal(a, b, c), sub(d, a)))


def dominant_axis(n) -> int:
    """Index of the largest-magnitude component (lowest index on ties)."""
    m = [abs(x) for x in n]
    return max(range(3), key=lambda i: (m[i], -i))


def project(p, axis: int):
    """Drop ``axis``, keeping the other two in cyclic order.

    A triangle's 2D orientation after projection equals the sign of its
    normal's ``axis`` component.
    """
    return (p[(axis + 1) % 3], p[(axis + 2) % 3])


def orient2d_value(a, b, c):
    return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])


def orient2d(a, b, c) -> int:
    return sign(orient2d_value(a, b, c))


def _det3(r0, r1, r2):
    return (
        r0[0] * (r1[1] * r2[2] - r1[2] * r2[1])
        - r0[1] * (r1[0] * r2[2] - r1[2] * r2[0])
        + r0[2] * (r1[0] * r2[1] - r1[1] * r2[0])
    )


def incircle(a, b, c, d, keys=None) -> int:
    """Positive when d is inside the circle through counter-clockwise a, b, c.

    With ``keys`` (one comparable per point) cocircular ties are broken by
    symbolically raising each point's paraboloid lift by an infinitesimal
    that is larger for larger keys, so the result is never zero for
    distinct points and depends only on the points and their keys.
    """
    pts = (a, b, c, d)
    rows = []
    for p in pts[:3]:
        dx, dy = p[0] - d[0], p[1] - d[1]
        rows.append((dx, dy, dx * dx + dy * dy))
    s = sign(_det3(*rows))
    if s or keys is None:
        return s
    for i in sorted(range(4), key=lambda i: keys[i], reverse=True):
        lift = [1 if j == i else 0 for j in range(4)]
        rows = [
            (pts[j][0] - d[0], pts[j][1] - d[1], lift[j] - lift[3]) for j in range(3)
        ]
        s = sign(_det3(*rows))
        if s:
            return s
    return 0


def on_open_segment_2d(a, b, p) -> bool:
    """True when p lies strictly between a and b on the segment ab."""
    if orient2d_value(a, b, p) != 0:
        return False
    t = (p[0] - a[0]) * (b[0] - a[0]) + (p[1] - a[1]) * (b[1] - a[1])
    return 0 < t < (b[0] - a[0]) ** 2 + (b[1] - a[1]) ** 2


def segment_param_2d(a, b, p):
    """Parameter of p (assumed on line ab) along a -> b."""
    i = 0 if a[0] != b[0] else 1
    return (p[i] - a[i]) / (b[i] - a[i])
