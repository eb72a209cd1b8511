"""OBJ / binary STL mesh files and CSV winding-field samples."""

from __future__ import annotations

import math
import os
import struct
import tempfile
from pathlib import Path

import numpy as np

from .mesh import TriMesh

__all__ = [
    "MeshIOError",
    "ParseError",
    "read_mesh",
    "write_mesh",
    "write_field",
    "read_points",
    "parse_obj",
    "parse_stl",
]

STL_HEADER = 80
STL_RECORD = np.dtype(
    [("normal", "<f4", 3), ("corners", "<f4", (3, 3)), ("attr", "<u2")]
)
STL_MAX_FACES = 0xFFFFFFFF


class MeshIOError(Exception):
    """Reading or writing a mesh file failed."""


class ParseError(MeshIOError):
    """A file's content is malformed; the message carries the line or byte offset."""


def _format_from(path, fmt=None) -> str:
    fmt = (fmt or Path(path).suffix.lstrip(".")).lower()
    if fmt not in ("obj", "stl"):
        raise MeshIOError(f"unknown mesh format {fmt!r} (expected obj or stl)")
    return fmt


def read_mesh(path, weld: bool = False) -> TriMesh:
    """Read an OBJ or binary STL file; the format follows the file suffix.

    ``weld`` merges STL vertices with identical coordinates (OBJ files
    already share vertices).
    """
    fmt = _format_from(path)
    try:
        data = Path(path).read_bytes()
    except OSError as e:
        raise MeshIOError(f"cannot read {path!s}: {e.strerror or e}") from e
    if fmt == "obj":
        try:
            text = data.decode("utf-8")
        except UnicodeDecodeError as e:
            raise ParseError(f"{path}: byte {e.start}: not valid UTF-8") from e
        return parse_obj(text, name=str(path))
    return parse_stl(data, weld=weld, name=str(path))


def _obj_index(token: str, n: int, where: str) -> int:
    head = token.split("/", 1)[0]
    try:
        i = int(head)
    except ValueError:
        raise ParseError(f"{where}: bad vertex index {token!r}") from None
    if i > 0:
        i -= 1
    elif i < 0:
        i += n
    else:
        raise ParseError(f"{where}: vertex index 0 is not valid")
    if not 0 <= i < n:
        raise ParseError(f"{where}: vertex index {token!r} out of range")
    return i


def parse_obj(text: str, name: str = "<obj>") -> TriMesh:
    """Parse OBJ ``v``/``f`` records; polygons are fan-triangulated.

    Other records (normals, texture coordinates, groups, ...) are ignored.
    """
    verts, faces = [], []
    for lineno, line in enumerate(text.splitlines(), 1):
        parts = line.split("#", 1)[0].split()
        if not parts:
            continue
        where = f"{name}:{lineno}"
        if parts[0] == "v":
            if len(parts) < 4:
                raise ParseError(f"{where}: vertex needs three coordinates")
            try:
                xyz = [float(t) for t in parts[1:4]]
            except ValueError:
                raise ParseError(f"{where}: bad vertex coordinate") from None
            if not all(math.isfinite(x) for x in xyz):
                raise ParseError(f"{where}: non-finite vertex coordinate")
            verts.append(xyz)
        elif parts[0] == "f":
            idx = [_obj_index(t, len(verts), where) for t in parts[1:]]
            if len(idx) < 3:
                raise ParseError(f"{where}: face needs at least three vertices")
            for k in range(1, len(idx) - 1):
                tri = (idx[0], idx[k], idx[k + 1])
                if len(set(tri)) < 3:
                    raise ParseError(f"{where}: face repeats a vertex")
                faces.append(tri)
    return TriMesh(np.array(verts).reshape(-1, 3), np.array(faces, dtype=np.int64).reshape(-1, 3))


def parse_stl(data: bytes, weld: bool = False, name: str = "<stl>") -> TriMesh:
    """Parse binary STL; facet normals are ignored in favor of corner order."""
    if len(data) < STL_HEADER + 4:
        raise ParseError(f"{name}: byte {len(data)}: truncated header")
    (count,) = struct.unpack_from("<I", data, STL_HEADER)
    expected = STL_HEADER + 4 + count * STL_RECORD.itemsize
    if len(data) != expected:
        hint = " (ASCII STL is not supported)" if data[:5] == b"solid" else ""
        raise ParseError(
            f"{name}: byte {min(len(data), expected)}: expected {expected} bytes "
            f"for {count} facets, found {len(data)}{hint}"
        )
    rec = np.frombuffer(data, dtype=STL_RECORD, count=count, offset=STL_HEADER + 4)
    corners = rec["corners"].astype(np.float64).reshape(-1, 3)
    bad = np.flatnonzero(~np.isfinite(corners).all(axis=1))
    if len(bad):
        offset = STL_HEADER + 4 + (bad[0] // 3) * STL_RECORD.itemsize
        raise ParseError(f"{name}: byte {offset}: non-finite vertex coordinate")
    if not weld:
        return TriMesh(corners, np.arange(len(corners)).reshape(-1, 3))
    verts, inv = np.unique(corners, axis=0, return_inverse=True)
    faces = inv.reshape(-1, 3)
    ok = (faces[:, 0] != faces[:, 1]) & (faces[:, 1] != faces[:, 2]) & (faces[:, 2] != faces[:, 0])
    return TriMesh(verts, faces[ok])


def _atomic_write(path, payload: bytes):
    path = Path(path)
    try:
        fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.")
    except OSError as e:
        raise MeshIOError(f"cannot write {path!s}: {e.strerror or e}") from e
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(payload)
        os.replace(tmp, path)
    except OSError as e:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise MeshIOError(f"cannot write {path!s}: {e.strerror or e}") from e


def _obj_bytes(mesh: TriMesh) -> bytes:
    lines = [f"v {x!r} {y!r} {z!r}" for x, y, z in mesh.vertices.tolist()]
    lines += [f"f {a + 1} {b + 1} {c + 1}" for a, b, c in mesh.faces.tolist()]
    return ("\n".join(lines) + "\n" if lines else "").encode()


def _stl_bytes(mesh: TriMesh) -> bytes:
    n = len(mesh.faces)
    if n > STL_MAX_FACES:
        raise MeshIOError(f"binary STL holds at most {STL_MAX_FACES} facets, mesh has {n}")
    rec = np.zeros(n, dtype=STL_RECORD)
    p = mesh.vertices[mesh.faces]
    nrm = np.cross(p[:, 1] - p[:, 0], p[:, 2] - p[:, 0])
    length = np.linalg.norm(nrm, axis=1, keepdims=True)
    rec["normal"] = np.divide(nrm, length, out=np.zeros_like(nrm), where=length > 0)
    rec["corners"] = p
    header = b"binary STL".ljust(STL_HEADER, b" ")
    return header + struct.pack("<I", n) + rec.tobytes()


def write_mesh(mesh: TriMesh, path, fmt: str | None = None) -> None:
    """Write OBJ (shortest round-trip decimals) or binary STL (float32)."""
    fmt = _format_from(path, fmt)
    payload = _obj_bytes(mesh) if fmt == "obj" else _stl_bytes(mesh)
    _atomic_write(path, payload)


def _num(x: float) -> str:
    r = repr(float(x))
    return r[:-2] if r.endswith(".0") else r


def field_csv(points, values) -> str:
    points = np.asarray(points, dtype=np.float64).reshape(-1, 3)
    values = np.asarray(values, dtype=np.float64).reshape(-1)
    if len(points) != len(values):
        raise ValueError(f"{len(points)} points but {len(values)} values")
    rows = ["x,y,z,w"]
    rows += [",".join(map(_num, (*p, w))) for p, w in zip(points.tolist(), values.tolist())]
    return "\n".join(rows) + "\n"


def write_field(points, values, path) -> None:
    """CSV ``x,y,z,w`` with one row per point in input order."""
    _atomic_write(path, field_csv(points, values).encode())


def read_points(path) -> np.ndarray:
    """Points from a CSV whose first three columns are x, y, z.

    A non-numeric first line is taken as a header.
    """
    try:
        text = Path(path).read_text()
    except (OSError, UnicodeDecodeError) as e:
        raise MeshIOError(f"cannot read {path!s}: {e}") from e
    pts = []
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        cells = line.split(",")
        try:
            xyz = [float(c) for c in cells[:3]]
        except ValueError:
            if lineno == 1:
                continue
            raise ParseError(f"{path}:{lineno}: bad coordinate") from None
        if len(xyz) < 3 or not all(math.isfinite(x) for x in xyz):
            raise ParseError(f"{path}:{lineno}: expected three finite coordinates")
        pts.append(xyz)
    return np.array(pts, dtype=np.float64).reshape(-1, 3)
