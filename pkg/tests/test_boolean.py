import numpy as np
import pytest
from scipy.stats import qmc

from helpers import CUBE_CONFIGS, cube_pair, sphere_pairs, surface_distance
from windbool import shapes
from windbool.boolean import (
    Action,
    BoolOp,
    BoolOpSpec,
    InsideRule,
    RobustnessError,
    boolean,
    classify,
    face_action,
    inside,
    resolve_coplanar,
)
from windbool.corefine import corefine
from windbool.mesh import TriMesh, audit, flip_all, signed_volume
from windbool.winding import build_bvh, winding_number, winding_number_batch

SET_ALGEBRA = {
    BoolOp.UNION: lambda a, b: a | b,
    BoolOp.INTERSECTION: lambda a, b: a & b,
    BoolOp.DIFFERENCE_AB: lambda a, b: a & ~b,
    BoolOp.DIFFERENCE_BA: lambda a, b: b & ~a,
    BoolOp.SYMMETRIC_DIFFERENCE: lambda a, b: a ^ b,
}


def test_inside_rules():
    assert not inside(0.5) and inside(0.5000001) and not inside(-1.0)
    assert inside(-1.0, InsideRule.ABS_WINDING_GT_HALF)
    assert not inside(0.5, InsideRule.ABS_WINDING_GT_HALF)
    assert inside(0.3, InsideRule.WINDING_POSITIVE)
    assert not inside(1e-10, InsideRule.WINDING_POSITIVE)
    assert not inside(-0.3, InsideRule.WINDING_POSITIVE)
    assert inside(-0.3, InsideRule.ABS_WINDING_POSITIVE)
    assert not inside(-1e-10, InsideRule.ABS_WINDING_POSITIVE)


def test_face_action_table():
    assert face_action("A", BoolOp.UNION, False) is Action.KEEP
    assert face_action("A", BoolOp.UNION, True) is Action.DISCARD
    assert face_action("B", BoolOp.INTERSECTION, True) is Action.KEEP
    assert face_action("B", BoolOp.DIFFERENCE_AB, True) is Action.KEEP_FLIP
    assert face_action("B", BoolOp.DIFFERENCE_AB, False) is Action.DISCARD
    assert face_action("A", BoolOp.DIFFERENCE_BA, True) is Action.KEEP_FLIP
    assert face_action("A", BoolOp.SYMMETRIC_DIFFERENCE, True) is Action.KEEP_FLIP
    assert face_action("B", BoolOp.SYMMETRIC_DIFFERENCE, False) is Action.KEEP


def constant_evaluator(value):
    return lambda mesh, points: np.full(len(points), value)


def test_classify_uses_evaluator_and_skips_duplicates():
    a, b = cube_pair("coplanar-partial")
    pair = corefine(a, b)
    spec = BoolOpSpec(BoolOp.DIFFERENCE_AB)
    out = classify(pair, spec, constant_evaluator(1.0))
    dups = {("A", f) for f, _, _ in pair.coplanar_pairs} | {("B", g) for _, g, _ in pair.coplanar_pairs}
    keys = {(c.source, c.face) for c in out}
    assert not keys & dups
    assert len(keys) == pair.refined_a.n_faces + pair.refined_b.n_faces - len(dups)
    assert {c.action for c in out if c.source == "A"} == {Action.DISCARD}
    assert {c.action for c in out if c.source == "B"} == {Action.KEEP_FLIP}
    with pytest.raises(RobustnessError):
        classify(pair, spec, constant_evaluator(np.nan))


def test_robustness_error_from_real_contact():
    a = TriMesh([[0, 0, 0], [3, 0, 0], [0, 3, 0]], [[0, 1, 2]])
    # a collinear sliver passing through a's barycenter (1, 1, 0)
    b = TriMesh([[1, 1, -1], [1, 1, 1], [1, 1, 2]], [[0, 1, 2]])
    with pytest.raises(RobustnessError):
        boolean(a, b, BoolOp.UNION)


@pytest.mark.parametrize("op", list(BoolOp))
def test_resolve_coplanar_rows(op):
    a = shapes.box()
    keep = {Action.KEEP}
    same = resolve_coplanar(corefine(a, a), BoolOpSpec(op))
    opp = resolve_coplanar(corefine(a, flip_all(a)), BoolOpSpec(op))
    kept_same = {k[0] for k, v in same.items() if v in keep}
    kept_opp = {k[0] for k, v in opp.items() if v in keep}
    expected_same = {"A"} if op in (BoolOp.UNION, BoolOp.INTERSECTION) else set()
    expected_opp = {BoolOp.DIFFERENCE_AB: {"A"}, BoolOp.DIFFERENCE_BA: {"B"}}.get(op, set())
    assert kept_same == expected_same
    assert kept_opp == expected_opp
    assert all(v is not Action.KEEP_FLIP for v in (*same.values(), *opp.values()))


def test_resolve_coplanar_rejects_non_duplicates():
    a, b = cube_pair("corner")
    pair = corefine(a, b)
    pair.coplanar_pairs.append((0, 0, True))
    with pytest.raises(ValueError):
        resolve_coplanar(pair, BoolOpSpec(BoolOp.UNION))


def test_assemble_flips_and_tags():
    a, b = cube_pair("b-inside-a")
    res = boolean(a, b, BoolOp.DIFFERENCE_AB)
    out = res.mesh
    assert out.n_faces == 24
    assert out.source.tolist().count(1) == 12
    # B's faces were flipped: they enclose negative volume on their own
    inner = TriMesh(out.vertices, out.faces[out.source == 1])
    assert signed_volume(inner) == pytest.approx(-0.125)
    assert set(out.origin[out.source == 1].tolist()) == set(range(12))
    counts = res.action_counts()
    assert counts["B"]["keep-flip"] == 12 and counts["A"]["keep"] == 12


def test_assemble_welds_shared_curve():
    a, b = sphere_pairs()["spheres"]
    out = boolean(a, b, BoolOp.UNION).mesh
    rep = audit(out)
    assert rep.is_closed and rep.is_edge_manifold
    assert len(np.unique(out.vertices, axis=0)) == out.n_vertices


def test_empty_results():
    a = shapes.box()
    for op in (BoolOp.DIFFERENCE_AB, BoolOp.SYMMETRIC_DIFFERENCE):
        out = boolean(a, a, op).mesh
        assert out.n_faces == 0 and out.n_vertices == 0
    a, b = cube_pair("disjoint")
    assert boolean(a, b, BoolOp.INTERSECTION).mesh.n_faces == 0


@pytest.mark.parametrize("name", ["spheres", "octa-box"])
def test_volume_identities_curved(name):
    a, b = sphere_pairs()[name]
    vol = {op: signed_volume(boolean(a, b, op).mesh) for op in BoolOp}
    va, vb = signed_volume(a), signed_volume(b)
    u, i = vol[BoolOp.UNION], vol[BoolOp.INTERSECTION]
    assert u + i == pytest.approx(va + vb, abs=1e-12)
    assert vol[BoolOp.DIFFERENCE_AB] == pytest.approx(va - i, abs=1e-12)
    assert vol[BoolOp.DIFFERENCE_BA] == pytest.approx(vb - i, abs=1e-12)
    assert vol[BoolOp.SYMMETRIC_DIFFERENCE] == pytest.approx(u - i, abs=1e-12)
    assert 0 < i < min(va, vb)


CORPUS = {**{n: cube_pair(n) for n in CUBE_CONFIGS}, **sphere_pairs()}


@pytest.mark.parametrize("name", sorted(CORPUS))
def test_output_matches_set_algebra(name):
    """10,000 quasi-random samples more than 1e-3 from either input surface.

    Output faces are pieces of input faces, so the distance to the output
    is at least the distance to the nearer input.
    """
    a, b = CORPUS[name]
    lo = np.minimum(a.vertices.min(0), b.vertices.min(0)) - 0.25
    hi = np.maximum(a.vertices.max(0), b.vertices.max(0)) + 0.25
    pts = qmc.scale(qmc.Sobol(3, seed=3).random(2 ** 14), lo, hi)
    pts = pts[surface_distance(pts, a, b) > 1e-3][:10000]
    assert len(pts) == 10000

    def ins(m):
        if m.n_faces == 0:
            return np.zeros(len(pts), bool)
        return winding_number_batch(m, build_bvh(m), pts) > 0.5

    in_a, in_b = ins(a), ins(b)
    pair = corefine(a, b)
    for op in BoolOp:
        res = boolean(a, b, op)
        assert audit(res.mesh).is_closed
        assert np.array_equal(ins(res.mesh), SET_ALGEBRA[op](in_a, in_b)), op
        again = classify(pair, BoolOpSpec(op))
        assert [c.action for c in again] == [c.action for c in res.classified]


def test_edge_touching_union_is_balanced():
    a = shapes.box()
    b = shapes.box((1, 1, 0), (2, 2, 1))
    out = boolean(a, b, BoolOp.UNION).mesh
    assert signed_volume(out) == 2.0
    assert audit(out).is_closed


def test_abs_rule_treats_inside_out_as_inside():
    a, b = cube_pair("corner")
    plain = boolean(a, b, BoolOp.DIFFERENCE_AB)
    spec = BoolOpSpec(BoolOp.DIFFERENCE_AB, InsideRule.ABS_WINDING_GT_HALF)
    inverted = boolean(a, flip_all(b), spec)
    # the rule changes classification only; kept faces keep their own orientation

    def actions(res):
        meshes = {"A": res.pair.refined_a, "B": res.pair.refined_b}
        out = {}
        for c in res.classified:
            m = meshes[c.source]
            corners = frozenset(map(tuple, m.vertices[m.faces[c.face]].tolist()))
            out[c.source, corners] = c.action
        return out

    assert actions(inverted) == actions(plain)


@pytest.mark.parametrize("op, inside_b, inside_a_only", [
    (BoolOp.DIFFERENCE_AB, 0.0, 1.0),
    (BoolOp.SYMMETRIC_DIFFERENCE, 0.0, 1.0),
    (BoolOp.UNION, 1.0, 1.0),
    (BoolOp.INTERSECTION, 1.0, 0.0),
])
def test_nested_inputs_flip_contract(op, inside_b, inside_a_only):
    a, b = cube_pair("b-inside-a")
    out = boolean(a, b, op).mesh
    assert abs(winding_number(out, [0.5, 0.5, 0.5]) - inside_b) < 1e-9
    assert abs(winding_number(out, [0.1, 0.1, 0.1]) - inside_a_only) < 1e-9


def test_difference_ba_of_nested():
    a, b = cube_pair("a-inside-b")
    out = boolean(a, b, BoolOp.DIFFERENCE_BA).mesh
    assert signed_volume(out) == pytest.approx(26.0)
    assert abs(winding_number(out, [0.5, 0.5, 0.5])) < 1e-9
    assert abs(winding_number(out, [1.5, 1.5, 1.5]) - 1) < 1e-9


def test_open_operand_completes():
    a = shapes.remove_faces(shapes.box(), [2])
    _, b = cube_pair("corner")
    res = boolean(a, b, BoolOp.DIFFERENCE_AB)
    # far from the hole the result behaves like the closed difference
    assert winding_number(res.mesh, [0.25, 0.25, 0.75]) > 0.5
    assert winding_number(res.mesh, [0.75, 0.75, 0.75]) < 0.5
    # the missing triangle leaves its boundary open; nothing is patched over
    assert audit(res.mesh).boundary_edge_count > 0
