"""Blended scene graph: real and virtual nodes with semantic labels, a strict
textual scene format (.wmscene), scene-level raycasts, and the per-view
silhouette cache that powers depth interpolation in empty space.

Scenes are mutated only between cursor steps by a single owner; queries are
read-only. Lazy world-space rebuilds are guarded by a lock so concurrent
readers see either the old or the new structure, never a partial one.
"""

from __future__ import annotations

import json
import math
import re
import threading
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .config import EngineConfig
from .geometry import (
    Bvh,
    ConvexHull,
    GeometryError,
    Ray,
    SurfaceHit,
    Transform,
    TriMesh,
    Vec3,
    ViewPose,
    angle_between,
    build_bvh,
    convex_hull,
    cross,
    normalize,
    norm,
    raycast_bvh,
    vec3,
)

_ID_RE = re.compile(r"^[A-Za-z0-9_.\-]+$")


class SceneError(ValueError):
    pass


class SceneFormatError(SceneError):
    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


class UnknownNodeError(SceneError):
    pass


class NotVisibleError(SceneError):
    """Raised when a node is absent from the silhouette cache."""


@dataclass(frozen=True)
class SemanticLabel:
    class_name: str
    confidence: float

    def __post_init__(self):
        if not self.class_name:
            raise SceneError("semantic label class must be non-empty")
        if not 0.0 <= self.confidence <= 1.0:
            raise SceneError("label confidence must be in [0, 1]")


@dataclass(frozen=True)
class PanelSpec:
    """2D interactive rectangle; plane is the node's local XY, +Z is the front."""

    width: float
    height: float
    resolution_x: int
    resolution_y: int

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise SceneError("panel extents must be positive")
        if self.resolution_x <= 0 or self.resolution_y <= 0:
            raise SceneError("panel resolution must be positive")


@dataclass
class MeshGeometry:
    mesh: TriMesh


@dataclass
class HullGeometry:
    points: np.ndarray   # original detected point set, kept for serialization
    hull: ConvexHull


@dataclass
class PanelGeometry:
    panel: PanelSpec


@dataclass
class SceneNode:
    id: str
    label: SemanticLabel
    origin_kind: str                # "real" | "virtual"
    transform: Transform
    geometry: object                # MeshGeometry | HullGeometry | PanelGeometry
    interactable: bool = True
    dynamic: bool = False

    def __post_init__(self):
        if not _ID_RE.match(self.id):
            raise SceneError(f"invalid node id {self.id!r}")
        if self.origin_kind not in ("real", "virtual"):
            raise SceneError(f"invalid origin kind {self.origin_kind!r}")
        if self.origin_kind == "real" and isinstance(self.geometry, PanelGeometry):
            raise SceneError("real nodes must carry mesh or hull geometry")

    @property
    def is_panel(self) -> bool:
        return isinstance(self.geometry, PanelGeometry)


class _NodeRuntime:
    """Lazily built world-space mesh + BVH for one node."""

    __slots__ = ("revision", "mesh", "bvh", "front_normal")

    def __init__(self):
        self.revision = -1
        self.mesh = None
        self.bvh = None
        self.front_normal = None  # world front normal, panels only


def _local_mesh(node: SceneNode) -> TriMesh:
    g = node.geometry
    if isinstance(g, MeshGeometry):
        return g.mesh
    if isinstance(g, HullGeometry):
        return g.hull.to_trimesh()
    p: PanelSpec = g.panel
    hw, hh = p.width / 2.0, p.height / 2.0
    verts = [[-hw, -hh, 0.0], [hw, -hh, 0.0], [hw, hh, 0.0], [-hw, hh, 0.0]]
    return TriMesh(verts, [[0, 1, 2], [0, 2, 3]])


class Scene:
    def __init__(self, nodes: list[SceneNode], view: ViewPose, config_overrides: Optional[dict] = None):
        ids = [n.id for n in nodes]
        dupes = {i for i in ids if ids.count(i) > 1}
        if dupes:
            raise SceneError(f"duplicate node id {sorted(dupes)[0]!r}")
        self.nodes: list[SceneNode] = list(nodes)
        self.view = view
        self.config_overrides = dict(config_overrides or {})
        self.revision = 0
        self._node_revision: dict[str, int] = {n.id: 0 for n in nodes}
        self._runtime: dict[str, _NodeRuntime] = {}
        self._lock = threading.Lock()

    # --- structure ----------------------------------------------------------

    def node(self, node_id: str) -> SceneNode:
        for n in self.nodes:
            if n.id == node_id:
                return n
        raise UnknownNodeError(f"unknown node id {node_id!r}")

    def has_node(self, node_id: str) -> bool:
        return any(n.id == node_id for n in self.nodes)

    def add_node(self, node: SceneNode) -> None:
        if self.has_node(node.id):
            raise SceneError(f"duplicate node id {node.id!r}")
        self.nodes.append(node)
        self._node_revision[node.id] = 0
        self.revision += 1

    def remove_node(self, node_id: str) -> None:
        n = self.node(node_id)
        self.nodes.remove(n)
        self._node_revision.pop(node_id, None)
        with self._lock:
            self._runtime.pop(node_id, None)
        self.revision += 1

    def update_node_transform(self, node_id: str, transform: Transform) -> None:
        node = self.node(node_id)
        node.transform = transform
        self._node_revision[node_id] += 1
        self.revision += 1

    def node_revision(self, node_id: str) -> int:
        if node_id not in self._node_revision:
            raise UnknownNodeError(f"unknown node id {node_id!r}")
        return self._node_revision[node_id]

    def set_interactable(self, node_id: str, value: bool) -> None:
        self.node(node_id).interactable = value
        self.revision += 1

    # --- queries ------------------------------------------------------------

    def _runtime_for(self, node: SceneNode) -> _NodeRuntime:
        rt = self._runtime.get(node.id)
        rev = self._node_revision[node.id]
        if rt is not None and rt.revision == rev:
            return rt
        with self._lock:
            rt = self._runtime.get(node.id)
            rev = self._node_revision[node.id]
            if rt is not None and rt.revision == rev:
                return rt
            local = _local_mesh(node)
            world_verts = node.transform.apply_points(local.vertices)
            normals = None
            if local.vertex_normals is not None:
                normals = node.transform.apply_normals(local.vertex_normals)
            mesh = TriMesh(world_verts, local.triangles, normals)
            fresh = _NodeRuntime()
            fresh.mesh = mesh
            fresh.bvh = build_bvh(mesh)
            if node.is_panel:
                fresh.front_normal = node.transform.apply_normals(np.array([[0.0, 0.0, 1.0]]))[0]
            fresh.revision = rev
            self._runtime[node.id] = fresh
            return fresh

    def world_mesh(self, node_id: str) -> TriMesh:
        return self._runtime_for(self.node(node_id)).mesh

    def raycast_node(self, node_id: str, ray: Ray) -> Optional[SurfaceHit]:
        """Raycast one node regardless of interactability; panels front-face only."""
        node = self.node(node_id)
        rt = self._runtime_for(node)
        if node.is_panel and float(np.dot(ray.direction, rt.front_normal)) >= 0.0:
            return None
        return raycast_bvh(rt.bvh, rt.mesh, ray)

    def raycast(self, ray: Ray, ignore: Optional[set] = None) -> Optional[tuple[str, SurfaceHit]]:
        """Nearest interactable hit across all nodes (world-space t).

        Non-interactable nodes are transparent. Near ties between nodes go to
        the node that appears earlier in the scene.
        """
        best: Optional[tuple[str, SurfaceHit]] = None
        for node in self.nodes:
            if not node.interactable:
                continue
            if ignore and node.id in ignore:
                continue
            hit = self.raycast_node(node.id, ray)
            if hit is None:
                continue
            if best is None or hit.t < best[1].t - 1e-9:
                best = (node.id, hit)
        return best


# --- silhouette cache -------------------------------------------------------

class SilhouetteCache:
    """Per-view boundary samples of each interactable node's projected outline.

    Each sample is a (unit direction from the view origin, surface depth along
    that direction) pair found by bisecting the hit/miss boundary of the node,
    so every sample reprojects onto the node's surface exactly.
    """

    def __init__(self, scene: Scene, view_origin: Vec3, scene_revision: int):
        self.scene = scene
        self.view_origin = np.asarray(view_origin, dtype=np.float64)
        self.scene_revision = scene_revision
        self.order: list[str] = []
        self.directions: dict[str, np.ndarray] = {}
        self.depths: dict[str, np.ndarray] = {}

    def add(self, node_id: str, directions: np.ndarray, depths: np.ndarray) -> None:
        self.order.append(node_id)
        self.directions[node_id] = directions
        self.depths[node_id] = depths

    def __contains__(self, node_id: str) -> bool:
        return node_id in self.directions

    def __len__(self) -> int:
        return len(self.order)


def _azimuth_basis(d0: Vec3) -> tuple[Vec3, Vec3]:
    axis_idx = int(np.argmin(np.abs(d0)))  # lowest index wins ties
    axis = np.zeros(3)
    axis[axis_idx] = 1.0
    u = normalize(cross(d0, axis))
    return u, cross(d0, u)


def build_silhouette_cache(scene: Scene, view: ViewPose, config: EngineConfig) -> SilhouetteCache:
    cache = SilhouetteCache(scene, view.origin, scene.revision)
    n_samples = config.silhouette_samples
    for node in scene.nodes:
        if not node.interactable:
            continue
        mesh = scene.world_mesh(node.id)
        if len(mesh.vertices) == 0:
            continue
        rel = mesh.vertices - view.origin
        if float((rel @ view.forward).max()) <= 0.0:
            continue  # fully behind the viewer
        centroid = mesh.vertices.mean(axis=0)
        radius = float(np.linalg.norm(mesh.vertices - centroid, axis=1).max())
        dist = norm(centroid - view.origin)
        if dist <= 1e-9:
            continue
        d0 = normalize(centroid - view.origin)
        center_hit = scene.raycast_node(node.id, Ray(view.origin, d0))
        if center_hit is None:
            continue  # e.g. a back-facing panel
        if dist > radius:
            theta_max = math.asin(min(1.0, radius / dist))
        else:
            theta_max = math.pi / 2.0
        u, v = _azimuth_basis(d0)

        dirs = np.empty((n_samples, 3))
        depths = np.empty(n_samples)
        for k in range(n_samples):
            phi = 2.0 * math.pi * k / n_samples
            lateral = math.cos(phi) * u + math.sin(phi) * v

            def probe(theta: float) -> Optional[float]:
                d = math.cos(theta) * d0 + math.sin(theta) * lateral
                hit = scene.raycast_node(node.id, Ray(view.origin, d))
                return None if hit is None else hit.t

            lo, t_lo = 0.0, center_hit.t
            hi = theta_max + max(0.01, 0.05 * theta_max)
            while hi < math.pi and probe(hi) is not None:
                hi = min(math.pi, hi + 0.1)
            for _ in range(8):
                mid = 0.5 * (lo + hi)
                t_mid = probe(mid)
                if t_mid is not None:
                    lo, t_lo = mid, t_mid
                else:
                    hi = mid
            dirs[k] = math.cos(lo) * d0 + math.sin(lo) * lateral
            depths[k] = t_lo
        cache.add(node.id, dirs, depths)
    return cache


def angular_gap(cache: SilhouetteCache, node_id: str, direction: Vec3) -> tuple[float, float]:
    """Smallest angle from `direction` to the node's silhouette, plus the depth
    of that boundary sample. Directions that hit the node have gap zero and the
    hit depth. Ties between samples go to the lower sample index."""
    if node_id not in cache:
        raise NotVisibleError(f"node {node_id!r} is not visible in this view")
    hit = cache.scene.raycast_node(node_id, Ray(cache.view_origin, direction))
    if hit is not None:
        return 0.0, hit.t
    dirs = cache.directions[node_id]
    cosines = np.clip(dirs @ direction, -1.0, 1.0)
    idx = int(np.argmax(cosines))  # argmax returns the lowest index on ties
    return float(math.acos(float(cosines[idx]))), float(cache.depths[node_id][idx])


# --- scene text format ------------------------------------------------------

def _fmt(x: float) -> str:
    x = float(x)
    if x == 0.0:
        x = 0.0  # normalize -0.0 so round-trips are stable
    return f"{x:.17g}"


def _expect_keys(data: dict, path: str, required: tuple, optional: tuple = ()):
    if not isinstance(data, dict):
        raise SceneFormatError(path, "expected an object")
    for key in data:
        if key not in required and key not in optional:
            raise SceneFormatError(f"{path}.{key}", "unknown field")
    for key in required:
        if key not in data:
            raise SceneFormatError(path, f"missing required field {key!r}")


def _number(value, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SceneFormatError(path, "expected a number")
    if not math.isfinite(value):
        raise SceneFormatError(path, "number must be finite")
    return float(value)


def _integer(value, path: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise SceneFormatError(path, "expected an integer")
    return value


def _vec(value, path: str, n: int = 3) -> np.ndarray:
    if not isinstance(value, list) or len(value) != n:
        raise SceneFormatError(path, f"expected a list of {n} numbers")
    return np.array([_number(c, f"{path}[{i}]") for i, c in enumerate(value)])


def _vec_list(value, path: str) -> np.ndarray:
    if not isinstance(value, list):
        raise SceneFormatError(path, "expected a list")
    return np.array([_vec(v, f"{path}[{i}]") for i, v in enumerate(value)]).reshape(-1, 3)


def _tri_list(value, path: str) -> np.ndarray:
    if not isinstance(value, list):
        raise SceneFormatError(path, "expected a list")
    out = []
    for i, tri in enumerate(value):
        if not isinstance(tri, list) or len(tri) != 3:
            raise SceneFormatError(f"{path}[{i}]", "expected a list of 3 indices")
        out.append([_integer(c, f"{path}[{i}][{j}]") for j, c in enumerate(tri)])
    return np.array(out, dtype=np.int64).reshape(-1, 3)


def _parse_transform(data, path: str) -> Transform:
    _expect_keys(data, path, (), ("t", "r", "s"))
    t = _vec(data["t"], f"{path}.t") if "t" in data else vec3(0, 0, 0)
    r = _vec(data["r"], f"{path}.r", 4) if "r" in data else np.array([0.0, 0.0, 0.0, 1.0])
    s = _vec(data["s"], f"{path}.s") if "s" in data else vec3(1, 1, 1)
    try:
        return Transform(t, r, s)
    except GeometryError as e:
        raise SceneFormatError(path, str(e)) from e


def _parse_geometry(data, path: str):
    _expect_keys(data, path, (), ("mesh", "hull_points", "panel"))
    kinds = [k for k in ("mesh", "hull_points", "panel") if k in data]
    if len(kinds) != 1:
        raise SceneFormatError(path, "geometry must have exactly one of mesh, hull_points, panel")
    kind = kinds[0]
    if kind == "mesh":
        m = data["mesh"]
        _expect_keys(m, f"{path}.mesh", ("vertices", "triangles"), ("normals",))
        verts = _vec_list(m["vertices"], f"{path}.mesh.vertices")
        tris = _tri_list(m["triangles"], f"{path}.mesh.triangles")
        normals = _vec_list(m["normals"], f"{path}.mesh.normals") if "normals" in m else None
        try:
            return MeshGeometry(TriMesh(verts, tris, normals))
        except GeometryError as e:
            raise SceneFormatError(f"{path}.mesh", str(e)) from e
    if kind == "hull_points":
        pts = _vec_list(data["hull_points"], f"{path}.hull_points")
        try:
            return HullGeometry(pts, convex_hull(pts))
        except GeometryError as e:
            raise SceneFormatError(f"{path}.hull_points", str(e)) from e
    p = data["panel"]
    _expect_keys(p, f"{path}.panel", ("w", "h", "px", "py"))
    try:
        return PanelGeometry(PanelSpec(
            _number(p["w"], f"{path}.panel.w"),
            _number(p["h"], f"{path}.panel.h"),
            _integer(p["px"], f"{path}.panel.px"),
            _integer(p["py"], f"{path}.panel.py"),
        ))
    except SceneError as e:
        raise SceneFormatError(f"{path}.panel", str(e)) from e


def _parse_node(data, path: str) -> SceneNode:
    _expect_keys(data, path, ("id", "label", "origin", "transform", "geometry"),
                 ("interactable", "dynamic"))
    node_id = data["id"]
    if not isinstance(node_id, str) or not _ID_RE.match(node_id):
        raise SceneFormatError(f"{path}.id", "node id must match [A-Za-z0-9_.-]+")
    label = data["label"]
    _expect_keys(label, f"{path}.label", ("class", "confidence"))
    if not isinstance(label["class"], str) or not label["class"]:
        raise SceneFormatError(f"{path}.label.class", "expected a non-empty string")
    confidence = _number(label["confidence"], f"{path}.label.confidence")
    if not 0.0 <= confidence <= 1.0:
        raise SceneFormatError(f"{path}.label.confidence", "must be in [0, 1]")
    origin = data["origin"]
    if origin not in ("real", "virtual"):
        raise SceneFormatError(f"{path}.origin", 'expected "real" or "virtual"')
    for flag in ("interactable", "dynamic"):
        if flag in data and not isinstance(data[flag], bool):
            raise SceneFormatError(f"{path}.{flag}", "expected a boolean")
    transform = _parse_transform(data["transform"], f"{path}.transform")
    geometry = _parse_geometry(data["geometry"], f"{path}.geometry")
    try:
        return SceneNode(
            id=node_id,
            label=SemanticLabel(label["class"], confidence),
            origin_kind=origin,
            transform=transform,
            geometry=geometry,
            interactable=data.get("interactable", True),
            dynamic=data.get("dynamic", False),
        )
    except SceneError as e:
        raise SceneFormatError(path, str(e)) from e


def parse_scene(text: str) -> Scene:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise SceneFormatError("$", f"not valid JSON: {e}") from e
    _expect_keys(data, "$", ("view", "nodes"), ("config_overrides",))
    view = data["view"]
    _expect_keys(view, "$.view", ("position", "forward", "up"))
    try:
        pose = ViewPose.from_vectors(
            _vec(view["position"], "$.view.position"),
            _vec(view["forward"], "$.view.forward"),
            _vec(view["up"], "$.view.up"),
        )
    except GeometryError as e:
        raise SceneFormatError("$.view", str(e)) from e
    if not isinstance(data["nodes"], list):
        raise SceneFormatError("$.nodes", "expected a list")
    nodes = []
    seen = set()
    for i, nd in enumerate(data["nodes"]):
        node = _parse_node(nd, f"$.nodes[{i}]")
        if node.id in seen:
            raise SceneFormatError(f"$.nodes[{i}].id", f"duplicate node id {node.id!r}")
        seen.add(node.id)
        nodes.append(node)
    overrides = data.get("config_overrides", {})
    if not isinstance(overrides, dict):
        raise SceneFormatError("$.config_overrides", "expected an object")
    return Scene(nodes, pose, overrides)


def _emit(value) -> str:
    if isinstance(value, str):
        return json.dumps(value)
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return _fmt(value)
    if isinstance(value, (list, tuple, np.ndarray)):
        return "[" + ",".join(_emit(v) for v in value) + "]"
    if isinstance(value, dict):
        return "{" + ",".join(f"{json.dumps(k)}:{_emit(v)}" for k, v in value.items()) + "}"
    raise TypeError(f"cannot serialize {type(value)}")


def serialize_scene(scene: Scene) -> str:
    """Single-line textual form; floats carry 17 significant digits."""
    doc = {
        "view": {
            "position": list(scene.view.origin),
            "forward": list(scene.view.forward),
            "up": list(scene.view.up),
        },
        "nodes": [_node_doc(n) for n in scene.nodes],
    }
    if scene.config_overrides:
        doc["config_overrides"] = scene.config_overrides
    return _emit(doc)


def _node_doc(node: SceneNode) -> dict:
    g = node.geometry
    if isinstance(g, MeshGeometry):
        mesh_doc = {
            "vertices": [list(v) for v in g.mesh.vertices],
            "triangles": [[int(i) for i in t] for t in g.mesh.triangles],
        }
        if g.mesh.vertex_normals is not None:
            mesh_doc["normals"] = [list(v) for v in g.mesh.vertex_normals]
        geometry = {"mesh": mesh_doc}
    elif isinstance(g, HullGeometry):
        geometry = {"hull_points": [list(p) for p in g.points]}
    else:
        p = g.panel
        geometry = {"panel": {"w": p.width, "h": p.height,
                              "px": p.resolution_x, "py": p.resolution_y}}
    return {
        "id": node.id,
        "label": {"class": node.label.class_name, "confidence": node.label.confidence},
        "origin": node.origin_kind,
        "transform": {
            "t": list(node.transform.translation),
            "r": list(node.transform.rotation),
            "s": list(node.transform.scale),
        },
        "geometry": geometry,
        "interactable": node.interactable,
        "dynamic": node.dynamic,
    }
