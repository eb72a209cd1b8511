"""Independent oracles and corpus builders shared by the test modules."""

import numpy as np

from windbool import shapes
from windbool.mesh import TriMesh


def point_triangle_distance(points, corners):
    """Euclidean distance from each point to the nearest triangle.

    Closest-point-on-triangle by Voronoi region classification, vectorized
    over all point/triangle combinations.
    """
    p = np.asarray(points, float)[:, None, :]
    a, b, c = (corners[None, :, i, :] for i in range(3))
    ab, ac, ap = b - a, c - a, p - a
    d1, d2 = (ab * ap).sum(-1), (ac * ap).sum(-1)
    bp = p - b
    d3, d4 = (ab * bp).sum(-1), (ac * bp).sum(-1)
    cp = p - c
    d5, d6 = (ab * cp).sum(-1), (ac * cp).sum(-1)
    va = d3 * d6 - d5 * d4
    vb = d5 * d2 - d1 * d6
    vc = d1 * d4 - d3 * d2
    with np.errstate(divide="ignore", invalid="ignore"):
        denom = va + vb + vc
        v = vb / denom
        w = vc / denom
        q = a + ab * v[..., None] + ac * w[..., None]
        # edge regions
        t_ab = d1 / (d1 - d3)
        q_ab = a + ab * t_ab[..., None]
        t_ac = d2 / (d2 - d6)
        q_ac = a + ac * t_ac[..., None]
        t_bc = (d4 - d3) / ((d4 - d3) + (d5 - d6))
        q_bc = b + (c - b) * t_bc[..., None]
    cases = [
        (d1 <= 0) & (d2 <= 0),
        (d3 >= 0) & (d4 <= d3),
        (vc <= 0) & (d1 >= 0) & (d3 <= 0),
        (d6 >= 0) & (d5 <= d6),
        (vb <= 0) & (d2 >= 0) & (d6 <= 0),
        (va <= 0) & ((d4 - d3) >= 0) & ((d5 - d6) >= 0),
    ]
    choices = [a, b, q_ab, c, q_ac, q_bc]
    q = np.select([np.broadcast_to(cs[..., None], q.shape) for cs in cases],
                  [np.broadcast_to(ch, q.shape) for ch in choices], q)
    return np.sqrt(((p - q) ** 2).sum(-1)).min(axis=1)


def surface_distance(points, *meshes, chunk=2000):
    points = np.asarray(points, float)
    out = np.full(len(points), np.inf)
    for m in meshes:
        if m.n_faces == 0:
            continue
        corners = m.vertices[m.faces]
        for s in range(0, len(points), chunk):
            d = point_triangle_distance(points[s:s + chunk], corners)
            out[s:s + chunk] = np.minimum(out[s:s + chunk], d)
    return out


# A = unit cube; B varies.  Every box is axis aligned, so the exact
# overlap volume is a product of interval overlaps.
UNIT = ((0.0, 0.0, 0.0), (1.0, 1.0, 1.0))
CUBE_CONFIGS = {
    "corner": ((0.5, 0.5, 0.5), (1.5, 1.5, 1.5)),
    "corner-skew": ((0.3, 0.6, -0.4), (1.3, 1.6, 0.6)),
    "edge": ((0.5, 0.5, 0.25), (1.5, 1.5, 0.75)),
    "face-poke": ((0.25, 0.25, 0.5), (0.75, 0.75, 1.5)),
    "tunnel": ((0.25, 0.25, -0.5), (0.75, 0.75, 1.5)),
    "slab": ((-0.5, -0.5, 0.25), (1.5, 1.5, 0.75)),
    "b-inside-a": ((0.25, 0.25, 0.25), (0.75, 0.75, 0.75)),
    "a-inside-b": ((-1.0, -1.0, -1.0), (2.0, 2.0, 2.0)),
    "disjoint": ((2.0, 0.0, 0.0), (3.0, 1.0, 1.0)),
    "face-share": ((1.0, 0.0, 0.0), (2.0, 1.0, 1.0)),
    "coplanar-partial": ((0.5, 0.0, 0.0), (1.5, 1.0, 1.0)),
    "identical": UNIT,
}


def box_volume(lo, hi):
    return float(np.prod(np.maximum(np.subtract(hi, lo), 0.0)))


def overlap_volume(b1, b2):
    lo = np.maximum(b1[0], b2[0])
    hi = np.minimum(b1[1], b2[1])
    return box_volume(lo, hi)


def expected_volumes(b1, b2):
    va, vb, vi = box_volume(*b1), box_volume(*b2), overlap_volume(b1, b2)
    return {
        "union": va + vb - vi,
        "intersection": vi,
        "difference_ab": va - vi,
        "difference_ba": vb - vi,
        "symmetric_difference": va + vb - 2 * vi,
    }


def cube_pair(name):
    return shapes.box(*UNIT), shapes.box(*CUBE_CONFIGS[name])


def convex_inside(mesh: TriMesh, points):
    """Half-space test against every face plane of a convex outward mesh."""
    p = mesh.vertices[mesh.faces]
    n = np.cross(p[:, 1] - p[:, 0], p[:, 2] - p[:, 0])
    s = np.einsum("fk,nk->nf", n, points) - np.einsum("fk,fk->f", n, p[:, 0])[None, :]
    return np.all(s < 0, axis=1)


def closed_corpus():
    """Closed meshes paired with a function giving the exact winding number.

    Each entry is ``(name, mesh, oracle)``; the oracle combines half-space
    tests on the convex parts, so it shares no code with the evaluator.
    """
    def convex(m, sign=1):
        return lambda q: sign * convex_inside(m, q).astype(float)

    def total(*fs):
        return lambda q: sum(f(q) for f in fs)

    from windbool.mesh import concatenate, flip_all

    cube = shapes.box()
    slab = shapes.box((-1.0, 2.0, 0.0), (0.5, 3.0, 4.0))
    octa = shapes.octahedron(1.5)
    ico = [shapes.icosphere(s, radius=1.0 + 0.1 * s) for s in (1, 2, 3)]
    inner, outer = shapes.icosphere(1, radius=1.0), shapes.icosphere(2, radius=2.0)
    far = shapes.box((3.0, 0.0, 0.0), (4.0, 1.0, 1.0))
    big = shapes.box((-1.0, -1.0, -1.0), (2.0, 2.0, 2.0))
    return [
        ("cube", cube, convex(cube)),
        ("slab", slab, convex(slab)),
        ("octahedron", octa, convex(octa)),
        ("icosphere-1", ico[0], convex(ico[0])),
        ("icosphere-2", ico[1], convex(ico[1])),
        ("icosphere-3", ico[2], convex(ico[2])),
        ("nested-spheres", concatenate(outer, inner), total(convex(outer), convex(inner))),
        ("nested-cubes", concatenate(big, cube), total(convex(big), convex(cube))),
        ("inside-out-cube", flip_all(cube), convex(cube, -1)),
        ("two-cubes", concatenate(cube, far), total(convex(cube), convex(far))),
    ]


def off_surface_samples(mesh, n, rng, margin=1e-6, pad=0.3):
    lo, hi = mesh.vertices.min(axis=0), mesh.vertices.max(axis=0)
    ext = hi - lo
    out = np.zeros((0, 3))
    while len(out) < n:
        q = rng.uniform(lo - pad * ext, hi + pad * ext, size=(2 * n, 3))
        q = q[surface_distance(q, mesh) > margin]
        out = np.concatenate([out, q])
    return out[:n]


def sphere_pairs():
    """Curved operand pairs in general position for refinement checks."""
    return {
        "spheres": (shapes.icosphere(1), shapes.icosphere(1, radius=0.9, center=(0.7, 0.31, 0.13))),
        "octa-box": (shapes.octahedron(1.0), shapes.box((0.2, -0.3, -0.4), (1.2, 0.7, 0.6))),
    }
