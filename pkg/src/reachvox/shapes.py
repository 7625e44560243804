"""Procedural triangle meshes: boxes, plates, and the engine surrogate workpiece."""

from __future__ import annotations

import numpy as np

from .collision import TriMesh

_BOX_FACES = np.array(
    [
        [0, 1, 3], [0, 3, 2],  # -x
        [4, 6, 7], [4, 7, 5],  # +x
        [0, 4, 5], [0, 5, 1],  # -y
        [2, 3, 7], [2, 7, 6],  # +y
        [0, 2, 6], [0, 6, 4],  # -z
        [1, 5, 7], [1, 7, 3],  # +z
    ],
    dtype=np.int32,
)

_BOX_CORNERS = np.array([[x, y, z] for x in (-1, 1) for y in (-1, 1) for z in (-1, 1)], dtype=float)


def box_mesh(center, size) -> TriMesh:
    """Axis-aligned box as 12 triangles."""
    c = np.asarray(center, dtype=float)
    s = np.asarray(size, dtype=float) / 2.0
    return TriMesh(c + _BOX_CORNERS * s, _BOX_FACES.copy())


def merge_meshes(meshes) -> TriMesh:
    verts, tris, offset = [], [], 0
    for m in meshes:
        verts.append(m.vertices)
        tris.append(m.triangles + offset)
        offset += len(m.vertices)
    return TriMesh(np.vstack(verts), np.vstack(tris))


def plate_mesh(center, size_x, size_y, thickness=0.02) -> TriMesh:
    return box_mesh(center, [size_x, size_y, thickness])


def wall_mesh(x, y_extent, z_extent, thickness=0.02, center_y=0.0, center_z=0.0) -> TriMesh:
    """Thin wall in the plane x = const."""
    return box_mesh([x, center_y, center_z], [thickness, y_extent, z_extent])


def engine_surrogate() -> TriMesh:
    """Boxy engine stand-in with an open cavity and protrusions (~0.8 x 0.5 x 0.6 m).

    Centered on the origin of its local frame (the crane hang point). The top
    channel between the two ribs is reachable only from above, which gives the
    maps interesting blocked regions.
    """
    parts = [
        box_mesh([0.0, 0.0, -0.20], [0.80, 0.50, 0.20]),     # base block
        box_mesh([-0.30, 0.0, 0.05], [0.20, 0.50, 0.30]),    # left rib
        box_mesh([0.30, 0.0, 0.05], [0.20, 0.50, 0.30]),     # right rib
        box_mesh([0.0, -0.21, 0.05], [0.40, 0.08, 0.30]),    # back wall of channel
        box_mesh([0.0, 0.18, 0.28], [0.64, 0.14, 0.16]),     # head bar over the channel
        box_mesh([0.0, 0.0, -0.34], [0.24, 0.24, 0.08]),     # sump stub
    ]
    return merge_meshes(parts)
