"""Boolean operations by classifying co-refined faces with winding numbers.

Each refined face of A is judged by the winding number of B at its
barycenter and vice versa; depending on the operation the face is kept,
kept with reversed orientation, or discarded.  Exactly coincident faces of
the two inputs are resolved separately by their relative orientation.
"""

from __future__ import annotations

import enum
import time
from dataclasses import dataclass, field

import numpy as np

from .corefine import RefinedPair, corefine
from .mesh import TriMesh, barycenters
from .winding import build_bvh, winding_number_batch

__all__ = [
    "BoolOp",
    "InsideRule",
    "Action",
    "BoolOpSpec",
    "ClassifiedFace",
    "RobustnessError",
    "inside",
    "classify",
    "resolve_coplanar",
    "assemble",
    "boolean",
    "bvh_evaluator",
]

A, B = "A", "B"
ZERO_BAND = 1e-9


class BoolOp(enum.Enum):
    UNION = "union"
    INTERSECTION = "intersection"
    DIFFERENCE_AB = "difference_ab"
    DIFFERENCE_BA = "difference_ba"
    SYMMETRIC_DIFFERENCE = "symmetric_difference"


class InsideRule(enum.Enum):
    WINDING_GT_HALF = "gt-half"
    ABS_WINDING_GT_HALF = "abs-gt-half"
    WINDING_POSITIVE = "positive"
    ABS_WINDING_POSITIVE = "abs-positive"


class Action(enum.Enum):
    KEEP = "keep"
    KEEP_FLIP = "keep-flip"
    DISCARD = "discard"


class RobustnessError(RuntimeError):
    """A barycenter landed exactly on the other surface."""


@dataclass(frozen=True)
class BoolOpSpec:
    op: BoolOp
    inside_rule: InsideRule = InsideRule.WINDING_GT_HALF


@dataclass(frozen=True)
class ClassifiedFace:
    source: str
    face: int
    winding_of_other: float
    action: Action


def inside(w: float, rule: InsideRule = InsideRule.WINDING_GT_HALF) -> bool:
    """Turn a winding value into an inside/outside decision.

    The half rules are strict, so exactly 1/2 counts as outside.  The
    positive rules treat ``|w| <= 1e-9`` as zero.
    """
    if rule is InsideRule.WINDING_GT_HALF:
        return w > 0.5
    if rule is InsideRule.ABS_WINDING_GT_HALF:
        return abs(w) > 0.5
    if rule is InsideRule.WINDING_POSITIVE:
        return w > ZERO_BAND
    if rule is InsideRule.ABS_WINDING_POSITIVE:
        return abs(w) > ZERO_BAND
    raise ValueError(f"unknown inside rule {rule!r}")


K, F, D = Action.KEEP, Action.KEEP_FLIP, Action.DISCARD

# (op, source) -> (action when outside the other, action when inside it)
_TABLE = {
    (BoolOp.UNION, A): (K, D),
    (BoolOp.UNION, B): (K, D),
    (BoolOp.INTERSECTION, A): (D, K),
    (BoolOp.INTERSECTION, B): (D, K),
    (BoolOp.DIFFERENCE_AB, A): (K, D),
    (BoolOp.DIFFERENCE_AB, B): (D, F),
    (BoolOp.DIFFERENCE_BA, A): (D, F),
    (BoolOp.DIFFERENCE_BA, B): (K, D),
    (BoolOp.SYMMETRIC_DIFFERENCE, A): (K, F),
    (BoolOp.SYMMETRIC_DIFFERENCE, B): (K, F),
}

# op -> (actions for (t_a, t_b) when same orientation, when opposite)
_COPLANAR = {
    BoolOp.UNION: ((K, D), (D, D)),
    BoolOp.INTERSECTION: ((K, D), (D, D)),
    BoolOp.DIFFERENCE_AB: ((D, D), (K, D)),
    BoolOp.DIFFERENCE_BA: ((D, D), (D, K)),
    BoolOp.SYMMETRIC_DIFFERENCE: ((D, D), (D, D)),
}


def face_action(source: str, op: BoolOp, is_inside: bool) -> Action:
    return _TABLE[op, source][is_inside]


def bvh_evaluator(threads=None, compensated=True):
    """Batch evaluator backed by :func:`winding_number_batch`."""

    def evaluate(mesh: TriMesh, points: np.ndarray) -> np.ndarray:
        if mesh.n_faces == 0:
            return np.zeros(len(points))
        return winding_number_batch(mesh, build_bvh(mesh), points, threads, compensated)

    return evaluate


def classify(pair: RefinedPair, spec: BoolOpSpec, winding_eval=None) -> list[ClassifiedFace]:
    """Classify every refined face not involved in a coplanar duplicate.

    Raises:
        RobustnessError: the other mesh's winding number is undefined at a
            barycenter (it lies exactly on that surface).
    """
    winding_eval = winding_eval or bvh_evaluator()
    dup_a = {f for f, _, _ in pair.coplanar_pairs}
    dup_b = {g for _, g, _ in pair.coplanar_pairs}
    out = []
    for source, mine, other, dups in (
        (A, pair.refined_a, pair.refined_b, dup_a),
        (B, pair.refined_b, pair.refined_a, dup_b),
    ):
        faces = np.array([f for f in range(mine.n_faces) if f not in dups], dtype=np.int64)
        if len(faces) == 0:
            continue
        w = np.asarray(winding_eval(other, barycenters(mine)[faces]), dtype=np.float64)
        bad = np.flatnonzero(~np.isfinite(w))
        if len(bad):
            f = int(faces[bad[0]])
            raise RobustnessError(
                f"barycenter of refined face {f} of {source} lies on the other mesh"
            )
        for f, wf in zip(faces.tolist(), w.tolist()):
            out.append(ClassifiedFace(source, f, wf, face_action(source, spec.op, inside(wf, spec.inside_rule))))
    return out


def resolve_coplanar(pair: RefinedPair, spec: BoolOpSpec) -> dict[tuple[str, int], Action]:
    """Actions for coincident face pairs: keep one of them or discard both.

    Raises:
        ValueError: a listed pair does not have identical corner positions.
    """
    ea, eb = pair.exact_a, pair.exact_b
    actions = {}
    for f, g, same in pair.coplanar_pairs:
        ca = {ea[i] for i in pair.refined_a.faces[f]}
        cb = {eb[i] for i in pair.refined_b.faces[g]}
        if ca != cb:
            raise ValueError(f"coplanar pair ({f}, {g}) is not an exact duplicate")
        act_a, act_b = _COPLANAR[spec.op][0 if same else 1]
        actions[A, f] = act_a
        actions[B, g] = act_b
    return actions


@dataclass
class BooleanResult:
    mesh: TriMesh
    pair: RefinedPair
    classified: list
    coplanar_actions: dict
    timings: dict = field(default_factory=dict)

    def action_counts(self) -> dict[str, dict[str, int]]:
        counts = {A: {a.value: 0 for a in Action}, B: {a.value: 0 for a in Action}}
        for c in self.classified:
            counts[c.source][c.action.value] += 1
        for (source, _), act in self.coplanar_actions.items():
            counts[source][act.value] += 1
        return counts


def assemble(classified, coplanar_actions, pair: RefinedPair) -> TriMesh:
    """Materialize the kept faces as one mesh.

    Vertices are welded on exact coordinate equality and unused ones
    dropped.  Faces whose corners collapse onto fewer than three distinct
    vertices are dropped.  ``origin`` holds the original input face and
    ``source`` is 0 for A and 1 for B.
    """
    actions = {(c.source, c.face): c.action for c in classified}
    actions.update(coplanar_actions)
    meshes = {A: pair.refined_a, B: pair.refined_b}
    index, verts, faces, origin, source = {}, [], [], [], []
    for (src, f) in sorted(actions, key=lambda k: (k[0], k[1])):
        act = actions[src, f]
        if act is Action.DISCARD:
            continue
        m = meshes[src]
        ids = []
        for v in m.faces[f].tolist():
            # adding 0.0 folds -0.0 onto +0.0
            key = tuple(x + 0.0 for x in m.vertices[v].tolist())
            if key not in index:
                index[key] = len(verts)
                verts.append(key)
            ids.append(index[key])
        if len(set(ids)) < 3:
            continue
        faces.append(ids[::-1] if act is Action.KEEP_FLIP else ids)
        origin.append(int(m.origin[f]) if m.origin is not None else f)
        source.append(0 if src == A else 1)
    return TriMesh(
        np.array(verts, dtype=np.float64).reshape(-1, 3),
        np.array(faces, dtype=np.int64).reshape(-1, 3),
        origin,
        source,
    )


def boolean(a: TriMesh, b: TriMesh, spec: BoolOpSpec | BoolOp, winding_eval=None,
            threads=None) -> BooleanResult:
    """Run the whole pipeline: co-refine, classify, resolve duplicates, assemble."""
    if isinstance(spec, BoolOp):
        spec = BoolOpSpec(spec)
    winding_eval = winding_eval or bvh_evaluator(threads)
    timings = {}
    t = time.perf_counter()
    pair = corefine(a, b)
    timings["corefine"] = time.perf_counter() - t
    t = time.perf_counter()
    classified = classify(pair, spec, winding_eval)
    timings["classify"] = time.perf_counter() - t
    t = time.perf_counter()
    dup = resolve_coplanar(pair, spec)
    out = assemble(classified, dup, pair)
    timings["assemble"] = time.perf_counter() - t
    return BooleanResult(out, pair, classified, dup, timings)
