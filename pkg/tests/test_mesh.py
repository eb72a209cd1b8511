import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from windbool import shapes
from windbool.mesh import (
    TriMesh,
    audit,
    barycenter,
    concatenate,
    degenerate_faces,
    flip_all,
    flip_face,
    signed_volume,
)


def brute_force_boundary(faces):
    """Unmatched directed edges counted by explicit pairing."""
    remaining = [tuple(e) for f in faces for e in ((f[0], f[1]), (f[1], f[2]), (f[2], f[0]))]
    unmatched = []
    while remaining:
        u, v = remaining.pop()
        if (v, u) in remaining:
            remaining.remove((v, u))
        else:
            unmatched.append(frozenset((u, v)))
    return len(set(unmatched))


def test_construction_validates():
    with pytest.raises(ValueError):
        TriMesh([[0, 0, 0], [1, 0, 0]], [[0, 1, 2]])
    with pytest.raises(ValueError):
        TriMesh([[0, 0, 0], [1, 0, 0], [0, 1, 0]], [[0, 1, 1]])
    with pytest.raises(ValueError):
        TriMesh([[0, 0, np.nan], [1, 0, 0], [0, 1, 0]], [[0, 1, 2]])
    m = shapes.box()
    with pytest.raises(ValueError):
        m.vertices[0, 0] = 5.0


def test_barycenter_examples():
    m = TriMesh([[0, 0, 0], [3, 0, 0], [0, 3, 0]], [[0, 1, 2]])
    assert barycenter(m, 0).tolist() == [1.0, 1.0, 0.0]
    with pytest.raises(IndexError):
        barycenter(m, 1)
    with pytest.raises(IndexError):
        barycenter(m, -1)


def test_flip_face_reverses_one_face():
    m = shapes.box()
    f = flip_face(m, 3)
    assert f.faces[3].tolist() == m.faces[3][::-1].tolist()
    assert not np.array_equal(f.faces[3], m.faces[3])
    assert np.array_equal(np.delete(f.faces, 3, 0), np.delete(m.faces, 3, 0))
    assert flip_face(f, 3) == m


def test_signed_volume_examples():
    cube = shapes.box()
    assert signed_volume(cube) == 1.0
    assert signed_volume(flip_all(cube)) == -1.0
    two = concatenate(cube, shapes.box((2, 0, 0), (3, 1, 1)))
    assert signed_volume(two) == 2.0
    assert signed_volume(TriMesh(np.zeros((0, 3)), np.zeros((0, 3)))) == 0.0


def test_audit_examples():
    rep = audit(shapes.box())
    assert rep.is_closed and rep.is_edge_manifold and rep.boundary_edge_count == 0
    empty = audit(TriMesh(np.zeros((0, 3)), np.zeros((0, 3))))
    assert empty.is_closed and empty.boundary_edge_count == 0 and empty.degenerate_face_count == 0


@pytest.mark.parametrize("removed", [[0], [5], [0, 1], [2, 3], [0, 7]])
def test_audit_boundary_matches_brute_force(removed):
    m = shapes.remove_faces(shapes.box(), removed)
    rep = audit(m)
    assert not rep.is_closed
    assert rep.boundary_edge_count == brute_force_boundary(m.faces.tolist())
    if len(removed) == 1:
        assert rep.boundary_edge_count == 3


def test_audit_counts_degenerate_and_nonmanifold():
    v = [[0, 0, 0], [1, 0, 0], [2, 0, 0], [0, 1, 0]]
    m = TriMesh(v, [[0, 1, 2], [0, 1, 3]])
    assert audit(m).degenerate_face_count == 1
    assert degenerate_faces(m).tolist() == [0]
    # a fin: three faces around one edge
    fin = TriMesh([[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, -1, 0], [0, 0, 1]],
                  [[0, 1, 2], [1, 0, 3], [0, 1, 4]])
    assert not audit(fin).is_edge_manifold


def test_audit_does_not_mutate():
    m = shapes.remove_faces(shapes.icosphere(1), [4])
    before = (m.vertices.copy(), m.faces.copy())
    audit(m)
    assert np.array_equal(m.vertices, before[0]) and np.array_equal(m.faces, before[1])


coords = arrays(np.float64, (6, 3), elements=st.floats(-100, 100, allow_nan=False, width=64))


@settings(max_examples=60, deadline=None)
@given(coords)
def test_flip_properties(v):
    m = TriMesh(v, [[0, 1, 2], [3, 4, 5], [0, 2, 4]])
    for f in range(3):
        assert flip_face(flip_face(m, f), f) == m
    assert signed_volume(flip_all(m)) == -signed_volume(m)


@settings(max_examples=60, deadline=None)
@given(coords)
def test_barycenter_in_face_box(v):
    m = TriMesh(v, [[0, 1, 2], [3, 4, 5]])
    for f in range(2):
        p = m.vertices[m.faces[f]]
        c = barycenter(m, f)
        slack = np.spacing(np.abs(p).max(axis=0))
        assert np.all(c >= p.min(axis=0) - slack) and np.all(c <= p.max(axis=0) + slack)
