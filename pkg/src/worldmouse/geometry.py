"""Pure geometric kernel: vectors, transforms, triangle meshes, BVH raycasting,
normal interpolation, and convex hulls.

Everything here is immutable after construction and free of hidden state, so
results are bit-reproducible for identical inputs on the same platform.
Vectors are plain float64 numpy arrays of shape (3,).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.spatial import ConvexHull as _QhullHull
from scipy.spatial import QhullError

Vec3 = np.ndarray

DEGENERATE_TRIANGLE_AREA = 1e-12
HULL_EPSILON = 1e-6
_TIE_EPS = 1e-9


class GeometryError(ValueError):
    pass


class DegenerateTriangleError(GeometryError):
    pass


class DegenerateHullError(GeometryError):
    pass


def vec3(x: float, y: float, z: float) -> Vec3:
    v = np.array([x, y, z], dtype=np.float64)
    if not np.all(np.isfinite(v)):
        raise GeometryError(f"non-finite vector component: {v}")
    return v


def norm(v: Vec3) -> float:
    return float(math.sqrt(float(v[0]) ** 2 + float(v[1]) ** 2 + float(v[2]) ** 2))


def normalize(v: Vec3) -> Vec3:
    n = norm(v)
    if n <= 1e-12:
        raise GeometryError("cannot normalize a near-zero vector")
    return v / n


def cross(a: Vec3, b: Vec3) -> Vec3:
    return np.array(
        [
            a[1] * b[2] - a[2] * b[1],
            a[2] * b[0] - a[0] * b[2],
            a[0] * b[1] - a[1] * b[0],
        ],
        dtype=np.float64,
    )


def angle_between(a: Vec3, b: Vec3) -> float:
    """Angle in radians between two unit vectors, clamped against fp drift."""
    return float(math.acos(min(1.0, max(-1.0, float(np.dot(a, b))))))


@dataclass(frozen=True)
class Ray:
    origin: Vec3
    direction: Vec3

    def __post_init__(self):
        if abs(norm(self.direction) - 1.0) > 1e-9:
            raise GeometryError("ray direction must be unit length")

    def at(self, t: float) -> Vec3:
        return self.origin + t * self.direction


# --- quaternions (xyzw) -----------------------------------------------------

def quat_identity() -> np.ndarray:
    return np.array([0.0, 0.0, 0.0, 1.0])


def quat_normalize(q: np.ndarray) -> np.ndarray:
    n = float(np.linalg.norm(q))
    if n <= 1e-12:
        raise GeometryError("cannot normalize a near-zero quaternion")
    return q / n


def quat_to_matrix(q: np.ndarray) -> np.ndarray:
    x, y, z, w = (float(c) for c in q)
    return np.array(
        [
            [1 - 2 * (y * y + z * z), 2 * (x * y - z * w), 2 * (x * z + y * w)],
            [2 * (x * y + z * w), 1 - 2 * (x * x + z * z), 2 * (y * z - x * w)],
            [2 * (x * z - y * w), 2 * (y * z + x * w), 1 - 2 * (x * x + y * y)],
        ],
        dtype=np.float64,
    )


def quat_from_unit_vectors(a: Vec3, b: Vec3) -> np.ndarray:
    """Shortest-arc rotation taking unit vector a onto unit vector b."""
    d = float(np.dot(a, b))
    if d > 1.0 - 1e-12:
        return quat_identity()
    if d < -1.0 + 1e-12:
        # 180 degrees: rotate about any axis perpendicular to a
        axis = cross(a, vec3(1.0, 0.0, 0.0))
        if norm(axis) < 1e-6:
            axis = cross(a, vec3(0.0, 1.0, 0.0))
        axis = normalize(axis)
        return np.array([axis[0], axis[1], axis[2], 0.0])
    c = cross(a, b)
    q = np.array([c[0], c[1], c[2], 1.0 + d])
    return quat_normalize(q)


@dataclass(frozen=True)
class Transform:
    translation: Vec3
    rotation: np.ndarray  # unit quaternion xyzw
    scale: Vec3

    def __post_init__(self):
        if abs(float(np.linalg.norm(self.rotation)) - 1.0) > 1e-9:
            raise GeometryError("transform rotation must be a unit quaternion")
        if not np.all(self.scale > 0):
            raise GeometryError("transform scale components must be positive")

    @staticmethod
    def identity() -> "Transform":
        return Transform(vec3(0, 0, 0), quat_identity(), vec3(1, 1, 1))

    def apply_points(self, points: np.ndarray) -> np.ndarray:
        m = quat_to_matrix(self.rotation)
        return (points * self.scale) @ m.T + self.translation

    def apply_normals(self, normals: np.ndarray) -> np.ndarray:
        """Transform direction vectors by the inverse-transpose; renormalizes."""
        m = quat_to_matrix(self.rotation)
        out = (normals / self.scale) @ m.T
        lens = np.linalg.norm(out, axis=-1, keepdims=True)
        lens[lens == 0] = 1.0
        return out / lens

    def invert_point(self, p: Vec3) -> Vec3:
        m = quat_to_matrix(self.rotation)
        return (m.T @ (p - self.translation)) / self.scale


class TriMesh:
    """Indexed triangle mesh with optional per-vertex unit normals."""

    def __init__(self, vertices, triangles, vertex_normals=None):
        self.vertices = np.asarray(vertices, dtype=np.float64).reshape(-1, 3)
        self.triangles = np.asarray(triangles, dtype=np.int64).reshape(-1, 3)
        if self.triangles.size and (
            self.triangles.min() < 0 or self.triangles.max() >= len(self.vertices)
        ):
            raise GeometryError("triangle index out of range")
        if not np.all(np.isfinite(self.vertices)):
            raise GeometryError("non-finite mesh vertex")
        if vertex_normals is not None:
            vn = np.asarray(vertex_normals, dtype=np.float64).reshape(-1, 3)
            if len(vn) != len(self.vertices):
                raise GeometryError("vertex normal count must match vertex count")
            lens = np.linalg.norm(vn, axis=1)
            if np.any(np.abs(lens - 1.0) > 1e-6):
                raise GeometryError("vertex normals must be unit length")
            self.vertex_normals = vn
        else:
            self.vertex_normals = None

    @property
    def triangle_count(self) -> int:
        return len(self.triangles)

    def triangle_vertices(self) -> np.ndarray:
        """(M, 3, 3) array of triangle corner positions."""
        return self.vertices[self.triangles]


@dataclass(frozen=True)
class SurfaceHit:
    t: float
    point: Vec3
    normal: Vec3
    triangle_index: int
    barycentric: tuple


def _intersect_triangle_block(origin, direction, tv):
    """Vectorized Moller-Trumbore against a (M,3,3) block of triangles.

    Returns (t, w0, w1, w2, hit_mask); degenerate triangles never hit.
    """
    v0 = tv[:, 0]
    e1 = tv[:, 1] - v0
    e2 = tv[:, 2] - v0
    area2 = np.linalg.norm(np.cross(e1, e2), axis=1)
    pvec = np.cross(np.broadcast_to(direction, e2.shape), e2)
    det = np.einsum("ij,ij->i", e1, pvec)
    ok = (np.abs(det) > 1e-14) & (area2 > 2.0 * DEGENERATE_TRIANGLE_AREA)
    inv_det = np.where(ok, 1.0 / np.where(det == 0.0, 1.0, det), 0.0)
    svec = origin - v0
    u = np.einsum("ij,ij->i", svec, pvec) * inv_det
    qvec = np.cross(svec, e1)
    v = (qvec @ direction) * inv_det
    t = np.einsum("ij,ij->i", e2, qvec) * inv_det
    # tiny slack so rays exactly through shared vertices/edges still register
    b_eps = 1e-12
    hit = ok & (u >= -b_eps) & (v >= -b_eps) & (u + v <= 1.0 + b_eps) & (t >= 0.0)
    return t, 1.0 - u - v, u, v, hit


def ray_triangle_intersect(ray: Ray, v0: Vec3, v1: Vec3, v2: Vec3):
    """Smallest t >= 0 where the ray crosses the triangle, with barycentrics.

    Returns None on a miss. Raises DegenerateTriangleError for triangles with
    area <= 1e-12 so callers can skip them explicitly.
    """
    tv = np.stack([np.stack([v0, v1, v2])])
    e1 = v1 - v0
    e2 = v2 - v0
    if 0.5 * norm(cross(e1, e2)) <= DEGENERATE_TRIANGLE_AREA:
        raise DegenerateTriangleError("triangle area below 1e-12")
    t, w0, w1, w2, hit = _intersect_triangle_block(ray.origin, ray.direction, tv)
    if not hit[0]:
        return None
    return float(t[0]), (float(w0[0]), float(w1[0]), float(w2[0]))


def interpolate_normal(mesh: TriMesh, triangle_index: int, barycentric) -> Vec3:
    """Normalized barycentric blend of the triangle's vertex normals.

    Falls back to the geometric face normal when the blend cancels out.
    """
    if mesh.vertex_normals is None:
        raise GeometryError("mesh has no vertex normals")
    i0, i1, i2 = mesh.triangles[triangle_index]
    w0, w1, w2 = barycentric
    n = (
        w0 * mesh.vertex_normals[i0]
        + w1 * mesh.vertex_normals[i1]
        + w2 * mesh.vertex_normals[i2]
    )
    if norm(n) <= 1e-12:
        return face_normal(mesh, triangle_index)
    return normalize(n)


def face_normal(mesh: TriMesh, triangle_index: int) -> Vec3:
    i0, i1, i2 = mesh.triangles[triangle_index]
    n = cross(mesh.vertices[i1] - mesh.vertices[i0], mesh.vertices[i2] - mesh.vertices[i0])
    return normalize(n)


# --- BVH --------------------------------------------------------------------

class Bvh:
    """Static binary AABB tree over a mesh's triangles.

    Built with a median split on the longest box axis (ties resolved toward
    the lower axis index) so construction is deterministic.
    """

    __slots__ = ("box_min", "box_max", "left", "right", "leaf_start", "leaf_count",
                 "tri_order", "_lists")

    def __init__(self, box_min, box_max, left, right, leaf_start, leaf_count, tri_order):
        self.box_min = box_min
        self.box_max = box_max
        self.left = left
        self.right = right
        self.leaf_start = leaf_start
        self.leaf_count = leaf_count
        self.tri_order = tri_order
        self._lists = None

    def as_lists(self):
        """Plain-Python copies of the node arrays; traversal is much faster on
        scalars than on length-3 numpy views."""
        if self._lists is None:
            self._lists = (self.box_min.tolist(), self.box_max.tolist(),
                           self.left.tolist(), self.right.tolist(),
                           self.leaf_start.tolist(), self.leaf_count.tolist())
        return self._lists

    @property
    def empty(self) -> bool:
        return len(self.tri_order) == 0


def build_bvh(mesh: TriMesh, leaf_size: int = 8) -> Bvh:
    tv = mesh.triangle_vertices()
    n = len(tv)
    if n == 0:
        z = np.zeros((0, 3))
        return Bvh(z, z, np.zeros(0, np.int64), np.zeros(0, np.int64),
                   np.zeros(0, np.int64), np.zeros(0, np.int64), np.zeros(0, np.int64))

    # Pad boxes so the slab test stays conservative relative to the small
    # barycentric slack in the triangle test; a ray that grazes a shared
    # vertex must not be culled by an exact-fit box.
    pad = 1e-9
    tri_min = tv.min(axis=1) - pad
    tri_max = tv.max(axis=1) + pad
    centroids = tv.mean(axis=1)

    box_min, box_max, left, right, leaf_start, leaf_count = [], [], [], [], [], []
    order: list[int] = []

    def emit(bmin, bmax, l, r, s, c) -> int:
        box_min.append(bmin)
        box_max.append(bmax)
        left.append(l)
        right.append(r)
        leaf_start.append(s)
        leaf_count.append(c)
        return len(box_min) - 1

    def recurse(idx: np.ndarray) -> int:
        bmin = tri_min[idx].min(axis=0)
        bmax = tri_max[idx].max(axis=0)
        if len(idx) <= leaf_size:
            start = len(order)
            order.extend(int(i) for i in idx)
            return emit(bmin, bmax, -1, -1, start, len(idx))
        extent = bmax - bmin
        axis = int(np.argmax(extent))  # argmax takes the lowest index on ties
        perm = np.argsort(centroids[idx, axis], kind="stable")
        idx = idx[perm]
        mid = len(idx) // 2
        node = emit(bmin, bmax, -2, -2, -1, 0)
        l = recurse(idx[:mid])
        r = recurse(idx[mid:])
        left[node] = l
        right[node] = r
        return node

    recurse(np.arange(n, dtype=np.int64))
    return Bvh(
        np.array(box_min), np.array(box_max),
        np.array(left, np.int64), np.array(right, np.int64),
        np.array(leaf_start, np.int64), np.array(leaf_count, np.int64),
        np.array(order, np.int64),
    )


def _ray_box_entry(bmin, bmax, o0, o1, o2, i0, i1, i2):
    """Entry parameter of the ray into an AABB, or inf on a miss.

    A zero direction component is handled as an inclusive containment check so
    a ray gliding exactly along a box face is never rejected.
    """
    tmin = -math.inf
    tmax = math.inf
    if i0 is None:
        if o0 < bmin[0] or o0 > bmax[0]:
            return math.inf
    else:
        t0 = (bmin[0] - o0) * i0
        t1 = (bmax[0] - o0) * i0
        if t0 > t1:
            t0, t1 = t1, t0
        tmin = t0
        tmax = t1
    if i1 is None:
        if o1 < bmin[1] or o1 > bmax[1]:
            return math.inf
    else:
        t0 = (bmin[1] - o1) * i1
        t1 = (bmax[1] - o1) * i1
        if t0 > t1:
            t0, t1 = t1, t0
        if t0 > tmin:
            tmin = t0
        if t1 < tmax:
            tmax = t1
    if i2 is None:
        if o2 < bmin[2] or o2 > bmax[2]:
            return math.inf
    else:
        t0 = (bmin[2] - o2) * i2
        t1 = (bmax[2] - o2) * i2
        if t0 > t1:
            t0, t1 = t1, t0
        if t0 > tmin:
            tmin = t0
        if t1 < tmax:
            tmax = t1
    if tmax < tmin or tmax < 0.0:
        return math.inf
    return tmin if tmin > 0.0 else 0.0


def _better(t, tri, best_t, best_tri) -> bool:
    if t < best_t - _TIE_EPS:
        return True
    return t < best_t + _TIE_EPS and tri < best_tri


def raycast_bvh(bvh: Bvh, mesh: TriMesh, ray: Ray) -> Optional[SurfaceHit]:
    """Nearest hit over the mesh; near ties (<1e-9) go to the lower triangle index."""
    if bvh.empty:
        return None
    tv = mesh.triangle_vertices()
    origin = ray.origin
    direction = ray.direction
    box_min, box_max, left, right, leaf_start, leaf_count = bvh.as_lists()
    o0, o1, o2 = float(origin[0]), float(origin[1]), float(origin[2])
    d0, d1, d2 = float(direction[0]), float(direction[1]), float(direction[2])
    i0 = 1.0 / d0 if d0 != 0.0 else None
    i1 = 1.0 / d1 if d1 != 0.0 else None
    i2 = 1.0 / d2 if d2 != 0.0 else None

    best_t = math.inf
    best_tri = -1
    best_bary = None

    stack = [0]
    while stack:
        node = stack.pop()
        tb = _ray_box_entry(box_min[node], box_max[node], o0, o1, o2, i0, i1, i2)
        if tb == math.inf or tb > best_t + _TIE_EPS:
            continue
        if left[node] < 0:
            s = leaf_start[node]
            tris = bvh.tri_order[s : s + leaf_count[node]]
            t, w0, w1, w2, hit = _intersect_triangle_block(origin, direction, tv[tris])
            for k in np.flatnonzero(hit):
                tk = float(t[k])
                trik = int(tris[k])
                if _better(tk, trik, best_t, best_tri):
                    best_t = tk
                    best_tri = trik
                    best_bary = (float(w0[k]), float(w1[k]), float(w2[k]))
        else:
            l, r = left[node], right[node]
            tl = _ray_box_entry(box_min[l], box_max[l], o0, o1, o2, i0, i1, i2)
            tr = _ray_box_entry(box_min[r], box_max[r], o0, o1, o2, i0, i1, i2)
            # push farther child first so the nearer one is explored first
            if tl <= tr:
                if tr != math.inf and tr <= best_t + _TIE_EPS:
                    stack.append(r)
                if tl != math.inf and tl <= best_t + _TIE_EPS:
                    stack.append(l)
            else:
                if tl != math.inf and tl <= best_t + _TIE_EPS:
                    stack.append(l)
                if tr != math.inf and tr <= best_t + _TIE_EPS:
                    stack.append(r)

    if best_tri < 0:
        return None
    return _make_hit(mesh, ray, best_t, best_tri, best_bary)


def _make_hit(mesh: TriMesh, ray: Ray, t: float, tri: int, bary) -> SurfaceHit:
    if mesh.vertex_normals is not None:
        n = interpolate_normal(mesh, tri, bary)
    else:
        n = face_normal(mesh, tri)
        if float(np.dot(n, ray.direction)) > 0.0:
            n = -n
    return SurfaceHit(t=t, point=ray.at(t), normal=n, triangle_index=tri, barycentric=bary)


def raycast_linear(mesh: TriMesh, ray: Ray) -> Optional[SurfaceHit]:
    """Exhaustive scan over every triangle; same tie rule as raycast_bvh."""
    if mesh.triangle_count == 0:
        return None
    t, w0, w1, w2, hit = _intersect_triangle_block(ray.origin, ray.direction, mesh.triangle_vertices())
    best_t = math.inf
    best_tri = -1
    best_bary = None
    for k in np.flatnonzero(hit):
        tk = float(t[k])
        if _better(tk, k, best_t, best_tri):
            best_t = tk
            best_tri = int(k)
            best_bary = (float(w0[k]), float(w1[k]), float(w2[k]))
    if best_tri < 0:
        return None
    return _make_hit(mesh, ray, best_t, best_tri, best_bary)


# --- convex hulls -----------------------------------------------------------

class ConvexHull:
    """Watertight triangulated convex hull with outward-oriented face planes."""

    def __init__(self, vertices, faces, face_normals, face_offsets):
        self.vertices = np.asarray(vertices, dtype=np.float64)
        self.faces = np.asarray(faces, dtype=np.int64)
        self.face_normals = np.asarray(face_normals, dtype=np.float64)
        self.face_offsets = np.asarray(face_offsets, dtype=np.float64)

    def to_trimesh(self) -> TriMesh:
        return TriMesh(self.vertices, self.faces)

    def volume(self) -> float:
        tv = self.vertices[self.faces]
        return float(np.einsum("ij,ij->i", tv[:, 0], np.cross(tv[:, 1], tv[:, 2])).sum() / 6.0)


def convex_hull(points) -> ConvexHull:
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 3)
    if len(pts) < 4:
        raise DegenerateHullError(f"need at least 4 points, got {len(pts)}")
    centered = pts - pts.mean(axis=0)
    sv = np.linalg.svd(centered, compute_uv=False)
    if sv[-1] <= 1e-9 * max(1.0, sv[0]):
        kind = "collinear" if sv[1] <= 1e-9 * max(1.0, sv[0]) else "coplanar"
        raise DegenerateHullError(f"input points are {kind}")
    try:
        qh = _QhullHull(pts)
    except QhullError as e:  # pragma: no cover - prechecks catch typical cases
        raise DegenerateHullError(f"hull construction failed: {e}") from e

    # keep only hull vertices, ordered by original input index
    keep = np.sort(qh.vertices)
    remap = np.full(len(pts), -1, dtype=np.int64)
    remap[keep] = np.arange(len(keep))
    verts = pts[keep]
    faces = remap[qh.simplices]

    normals = qh.equations[:, :3].copy()
    offsets = -qh.equations[:, 3].copy()  # plane: n.x = d, outside positive

    # fix winding so each triangle's geometric normal points outward
    tv = verts[faces]
    geo = np.cross(tv[:, 1] - tv[:, 0], tv[:, 2] - tv[:, 0])
    flip = np.einsum("ij,ij->i", geo, normals) < 0
    faces[flip] = faces[flip][:, [0, 2, 1]]
    return ConvexHull(verts, faces, normals, offsets)


def signed_distance_to_hull(hull: ConvexHull, p: Vec3) -> float:
    """Negative inside (minus the least face-plane clearance), positive outside
    (distance to the hull surface)."""
    side = hull.face_normals @ p - hull.face_offsets
    if np.all(side <= 0.0):
        return float(side.max())
    tv = hull.vertices[hull.faces]
    return float(min(_point_triangle_distance(p, tv[i]) for i in range(len(tv))))


def _point_triangle_distance(p: Vec3, tri: np.ndarray) -> float:
    a, b, c = tri
    ab = b - a
    ac = c - a
    ap = p - a
    d1 = float(np.dot(ab, ap))
    d2 = float(np.dot(ac, ap))
    if d1 <= 0 and d2 <= 0:
        return norm(ap)
    bp = p - b
    d3 = float(np.dot(ab, bp))
    d4 = float(np.dot(ac, bp))
    if d3 >= 0 and d4 <= d3:
        return norm(bp)
    vc = d1 * d4 - d3 * d2
    if vc <= 0 <= d1 and d3 <= 0:
        v = d1 / (d1 - d3)
        return norm(p - (a + v * ab))
    cp = p - c
    d5 = float(np.dot(ab, cp))
    d6 = float(np.dot(ac, cp))
    if d6 >= 0 and d5 <= d6:
        return norm(cp)
    vb = d5 * d2 - d1 * d6
    if vb <= 0 <= d2 and d6 <= 0:
        w = d2 / (d2 - d6)
        return norm(p - (a + w * ac))
    va = d3 * d6 - d5 * d4
    if va <= 0 and d4 - d3 >= 0 and d5 - d6 >= 0:
        w = (d4 - d3) / ((d4 - d3) + (d5 - d6))
        return norm(p - (b + w * (c - b)))
    denom = va + vb + vc
    v = vb / denom
    w = vc / denom
    return norm(p - (a + v * ab + w * ac))


# --- view pose --------------------------------------------------------------

@dataclass(frozen=True)
class ViewPose:
    """Viewpoint the cursor ray originates from; forward/up are orthonormal."""

    origin: Vec3
    forward: Vec3
    up: Vec3

    def __post_init__(self):
        if abs(norm(self.forward) - 1.0) > 1e-6 or abs(norm(self.up) - 1.0) > 1e-6:
            raise GeometryError("view forward/up must be unit length")
        if abs(float(np.dot(self.forward, self.up))) > 1e-6:
            raise GeometryError("view forward and up must be orthogonal")

    @property
    def right(self) -> Vec3:
        return cross(self.up, self.forward)

    @staticmethod
    def from_vectors(origin, forward, up) -> "ViewPose":
        f = normalize(np.asarray(forward, dtype=np.float64))
        u = np.asarray(up, dtype=np.float64)
        u = u - f * float(np.dot(u, f))
        return ViewPose(np.asarray(origin, dtype=np.float64), f, normalize(u))
