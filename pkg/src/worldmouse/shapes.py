"""Mesh builders used by tests, fixtures and demo scenes."""

from __future__ import annotations

import math

import numpy as np

from .geometry import TriMesh


def quad(width: float, height: float, z: float = 0.0, facing=-1.0) -> TriMesh:
    """Axis-aligned rectangle in the XY plane at the given z.

    facing=-1 makes the front normal point toward -Z (at the viewer when the
    quad sits in front of a +Z-looking camera).
    """
    hw, hh = width / 2.0, height / 2.0
    verts = [[-hw, -hh, z], [hw, -hh, z], [hw, hh, z], [-hw, hh, z]]
    if facing < 0:
        tris = [[0, 2, 1], [0, 3, 2]]
        n = [0.0, 0.0, -1.0]
    else:
        tris = [[0, 1, 2], [0, 2, 3]]
        n = [0.0, 0.0, 1.0]
    return TriMesh(verts, tris, [n] * 4)


def uv_sphere(radius: float = 1.0, segments: int = 48, rings: int = 24) -> TriMesh:
    """Unit-normal UV sphere centered at the origin."""
    verts = []
    normals = []
    for i in range(rings + 1):
        theta = math.pi * i / rings
        for j in range(segments):
            phi = 2.0 * math.pi * j / segments
            n = (math.sin(theta) * math.cos(phi),
                 math.sin(theta) * math.sin(phi),
                 math.cos(theta))
            normals.append(n)
            verts.append((radius * n[0], radius * n[1], radius * n[2]))
    tris = []
    for i in range(rings):
        for j in range(segments):
            a = i * segments + j
            b = i * segments + (j + 1) % segments
            c = (i + 1) * segments + j
            d = (i + 1) * segments + (j + 1) % segments
            if i > 0:
                tris.append([a, b, c])
            if i < rings - 1:
                tris.append([b, d, c])
    return TriMesh(verts, tris, normals)


def box(sx: float, sy: float, sz: float) -> TriMesh:
    hx, hy, hz = sx / 2.0, sy / 2.0, sz / 2.0
    corners = np.array([[x, y, z] for x in (-hx, hx) for y in (-hy, hy) for z in (-hz, hz)])
    faces = [
        [0, 1, 3], [0, 3, 2],  # -x
        [4, 6, 7], [4, 7, 5],  # +x
        [0, 4, 5], [0, 5, 1],  # -y
        [2, 3, 7], [2, 7, 6],  # +y
        [0, 2, 6], [0, 6, 4],  # -z
        [1, 5, 7], [1, 7, 3],  # +z
    ]
    return TriMesh(corners, faces)


def box_corners(sx: float, sy: float, sz: float) -> np.ndarray:
    hx, hy, hz = sx / 2.0, sy / 2.0, sz / 2.0
    return np.array([[x, y, z] for x in (-hx, hx) for y in (-hy, hy) for z in (-hz, hz)])
