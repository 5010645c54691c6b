import json
import math

import numpy as np
import pytest

from worldmouse.geometry import TriMesh
from worldmouse.scene import parse_scene
from worldmouse.shapes import box_corners, quad, uv_sphere


def view_doc(pos=(0, 0, 0), fwd=(0, 0, 1), up=(0, 1, 0)):
    return {"position": list(pos), "forward": list(fwd), "up": list(up)}


def mesh_doc(mesh: TriMesh):
    doc = {
        "vertices": [list(map(float, v)) for v in mesh.vertices],
        "triangles": [[int(i) for i in t] for t in mesh.triangles],
    }
    if mesh.vertex_normals is not None:
        doc["normals"] = [list(map(float, n)) for n in mesh.vertex_normals]
    return doc


def node_doc(node_id, geometry, t=(0, 0, 0), r=(0, 0, 0, 1), s=(1, 1, 1),
             cls="object", confidence=1.0, origin="virtual", **flags):
    doc = {
        "id": node_id,
        "label": {"class": cls, "confidence": confidence},
        "origin": origin,
        "transform": {"t": list(t), "r": list(r), "s": list(s)},
        "geometry": geometry,
    }
    doc.update(flags)
    return doc


def scene_text(nodes, view=None, overrides=None):
    doc = {"view": view or view_doc(), "nodes": nodes}
    if overrides:
        doc["config_overrides"] = overrides
    return json.dumps(doc)


def sphere_node(node_id, center, radius=1.0, segments=32, rings=16, **kw):
    mesh = uv_sphere(radius, segments, rings)
    return node_doc(node_id, {"mesh": mesh_doc(mesh)}, t=center, **kw)


def plane_scene_text():
    """Large wall quad at z=2 facing a viewer at the origin looking +Z."""
    wall = quad(1000.0, 1000.0, 0.0, facing=-1.0)
    return scene_text([node_doc("wall", {"mesh": mesh_doc(wall)}, t=(0, 0, 2), cls="wall")])


def two_sphere_scene_text(radius=0.4, offset=0.8, dist=2.5):
    return scene_text([
        sphere_node("left", (-offset, 0, dist), radius, cls="ball"),
        sphere_node("right", (offset, 0, dist), radius, cls="ball"),
    ])


def panel_scene_text():
    """1m x 1m, 1000x1000 px panel at (0,0,2); the viewer sits at (0,0,4)
    looking -Z so the unrotated panel's +Z front faces the viewer."""
    view = view_doc(pos=(0, 0, 4), fwd=(0, 0, -1), up=(0, 1, 0))
    panel = node_doc("browser", {"panel": {"w": 1.0, "h": 1.0, "px": 1000, "py": 1000}},
                     t=(0, 0, 2), cls="panel")
    return scene_text([panel], view=view)


def table_hull_node(node_id="table", center=(0, -1, 3), size=(2.0, 0.1, 1.0)):
    pts = box_corners(*size) + np.array(center)
    return node_doc(node_id, {"hull_points": [list(map(float, p)) for p in pts]},
                    cls="table", origin="real")


@pytest.fixture
def plane_scene():
    return parse_scene(plane_scene_text())


@pytest.fixture
def panel_scene():
    return parse_scene(panel_scene_text())


def random_soup_mesh(rng: np.random.Generator, n_triangles: int, extent=2.0) -> TriMesh:
    verts = rng.uniform(-extent, extent, size=(n_triangles * 3, 3))
    tris = np.arange(n_triangles * 3).reshape(-1, 3)
    return TriMesh(verts, tris)


def random_ray(rng: np.random.Generator, origin_extent=4.0):
    origin = rng.uniform(-origin_extent, origin_extent, size=3)
    d = rng.normal(size=3)
    d /= np.linalg.norm(d)
    return origin, d
