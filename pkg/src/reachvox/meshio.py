"""STL and OBJ loading. Units are meters; only triangle geometry is kept."""

from __future__ import annotations

import struct
import warnings
from pathlib import Path

import numpy as np

from .collision import TriMesh, drop_degenerate_triangles


def load_mesh(path) -> TriMesh:
    path = Path(path)
    suffix = path.suffix.lower()
    if suffix == ".obj":
        mesh = load_obj(path)
    elif suffix == ".stl":
        mesh = load_stl(path)
    else:
        raise ValueError(f"unsupported mesh format: {path.name}")
    if mesh.is_empty:
        raise ValueError(f"{path.name}: mesh contains no triangles")
    return drop_degenerate_triangles(mesh)


def load_obj(path) -> TriMesh:
    vertices: list[list[float]] = []
    faces: list[list[int]] = []
    skipped: set[str] = set()
    fanned = 0
    with open(path, "r", encoding="utf-8", errors="replace") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            tag = parts[0]
            if tag == "v":
                if len(parts) < 4:
                    raise ValueError(f"{path}:{lineno}: malformed vertex record")
                vertices.append([float(parts[1]), float(parts[2]), float(parts[3])])
            elif tag == "f":
                idx = []
                for token in parts[1:]:
                    v = token.split("/")[0]
                    i = int(v)
                    # OBJ is 1-based; negatives count back from the current end
                    idx.append(i - 1 if i > 0 else len(vertices) + i)
                if len(idx) < 3:
                    raise ValueError(f"{path}:{lineno}: face needs at least 3 vertices")
                if len(idx) > 3:
                    fanned += 1
                for k in range(1, len(idx) - 1):
                    faces.append([idx[0], idx[k], idx[k + 1]])
            else:
                skipped.add(tag)
    if skipped:
        warnings.warn(f"{path.name}: ignored OBJ record(s): {', '.join(sorted(skipped))}", stacklevel=2)
    if fanned:
        warnings.warn(f"{path.name}: fan-triangulated {fanned} non-triangular face(s)", stacklevel=2)
    return TriMesh(np.asarray(vertices, dtype=float) if vertices else np.zeros((0, 3)), faces or np.zeros((0, 3), dtype=np.int32))


def save_obj(mesh: TriMesh, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for v in mesh.vertices:
            fh.write(f"v {v[0]:.9g} {v[1]:.9g} {v[2]:.9g}\n")
        for t in mesh.triangles:
            fh.write(f"f {t[0] + 1} {t[1] + 1} {t[2] + 1}\n")


def load_stl(path) -> TriMesh:
    data = Path(path).read_bytes()
    if _looks_ascii_stl(data):
        return _parse_ascii_stl(data, path)
    return _parse_binary_stl(data, path)


def _looks_ascii_stl(data: bytes) -> bool:
    head = data[:512].lstrip()
    if not head.startswith(b"solid"):
        return False
    # binary files sometimes start with "solid" in the 80-byte header
    return b"facet" in data[:1024] or len(data) < 84


def _parse_ascii_stl(data: bytes, path) -> TriMesh:
    verts: list[list[float]] = []
    for lineno, raw in enumerate(data.decode("ascii", errors="replace").splitlines(), 1):
        line = raw.strip()
        if line.startswith("vertex"):
            parts = line.split()
            if len(parts) != 4:
                raise ValueError(f"{path}:{lineno}: malformed STL vertex")
            verts.append([float(parts[1]), float(parts[2]), float(parts[3])])
    if len(verts) % 3 != 0:
        raise ValueError(f"{path}: ASCII STL vertex count {len(verts)} is not a multiple of 3")
    n = len(verts) // 3
    return TriMesh(np.asarray(verts, dtype=float), np.arange(3 * n, dtype=np.int32).reshape(n, 3))


def _parse_binary_stl(data: bytes, path) -> TriMesh:
    if len(data) < 84:
        raise ValueError(f"{path}: binary STL shorter than its 84-byte header")
    (count,) = struct.unpack_from("<I", data, 80)
    expected = 84 + 50 * count
    if len(data) != expected:
        raise ValueError(f"{path}: binary STL length {len(data)} != expected {expected} for {count} triangles")
    rec = np.frombuffer(data, dtype=np.dtype([("n", "<f4", 3), ("v", "<f4", (3, 3)), ("attr", "<u2")]), count=count, offset=84)
    verts = rec["v"].reshape(-1, 3).astype(np.float64)
    return TriMesh(verts, np.arange(3 * count, dtype=np.int32).reshape(count, 3))


def save_stl_binary(mesh: TriMesh, path) -> None:
    v0, v1, v2 = mesh.corners()
    n = np.cross(v1 - v0, v2 - v0)
    norms = np.linalg.norm(n, axis=1, keepdims=True)
    n = np.where(norms > 0, n / np.maximum(norms, 1e-30), 0.0)
    rec = np.zeros(len(mesh), dtype=np.dtype([("n", "<f4", 3), ("v", "<f4", (3, 3)), ("attr", "<u2")]))
    rec["n"] = n
    rec["v"][:, 0] = v0
    rec["v"][:, 1] = v1
    rec["v"][:, 2] = v2
    with open(path, "wb") as fh:
        fh.write(b"\0" * 80)
        fh.write(struct.pack("<I", len(mesh)))
        fh.write(rec.tobytes())
