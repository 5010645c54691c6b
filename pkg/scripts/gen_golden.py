#!/usr/bin/env python3
"""Regenerate the committed golden (scene, trace, log) triples in tests/golden/.

Scenes and traces are authored here; logs are produced by replaying them with
the current engine. Run from the repository root:

    python3 scripts/gen_golden.py
"""

import json
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from worldmouse.harness import format_log, parse_trace, replay  # noqa: E402
from worldmouse.scene import parse_scene, serialize_scene  # noqa: E402
from worldmouse.shapes import box_corners, quad, uv_sphere  # noqa: E402

GOLDEN = Path(__file__).resolve().parent.parent / "tests" / "golden"


def mesh_doc(mesh):
    doc = {
        "vertices": [list(map(float, v)) for v in mesh.vertices],
        "triangles": [[int(i) for i in t] for t in mesh.triangles],
    }
    if mesh.vertex_normals is not None:
        doc["normals"] = [list(map(float, n)) for n in mesh.vertex_normals]
    return doc


def node(node_id, geometry, t=(0, 0, 0), r=(0, 0, 0, 1), s=(1, 1, 1),
         cls="object", origin="virtual", **flags):
    doc = {
        "id": node_id,
        "label": {"class": cls, "confidence": 1.0},
        "origin": origin,
        "transform": {"t": list(t), "r": list(r), "s": list(s)},
        "geometry": geometry,
    }
    doc.update(flags)
    return doc


def scene(nodes, view_pos=(0, 0, 0), view_fwd=(0, 0, 1)):
    return json.dumps({
        "view": {"position": list(view_pos), "forward": list(view_fwd),
                 "up": [0, 1, 0]},
        "nodes": nodes,
    })


def plane_scene():
    wall = quad(1000.0, 1000.0, 0.0, facing=-1.0)
    return scene([node("wall", {"mesh": mesh_doc(wall)}, t=(0, 0, 2), cls="wall")])


def two_sphere_scene():
    ball = uv_sphere(0.4, 48, 24)
    return scene([
        node("left", {"mesh": mesh_doc(ball)}, t=(-0.8, 0, 2.5), cls="ball"),
        node("right", {"mesh": mesh_doc(ball)}, t=(0.8, 0, 2.5), cls="ball"),
    ])


def panel_scene():
    panel = node("browser", {"panel": {"w": 1.0, "h": 1.0, "px": 1000, "py": 1000}},
                 t=(0, 0, 2), cls="panel")
    return scene([panel], view_pos=(0, 0, 4), view_fwd=(0, 0, -1))


def demo_scene():
    """One of everything: a sphere to the left, a table below it, a panel to
    the right (rotated to face the viewer), and a note template for ghosts."""
    ball = uv_sphere(0.5, 48, 24)
    table_pts = box_corners(1.6, 0.1, 0.8) + [-1.2, -0.9, 3.0]
    note = uv_sphere(0.08, 12, 6)
    return scene([
        node("sphere", {"mesh": mesh_doc(ball)}, t=(-1.2, 0, 3), cls="ball"),
        node("table", {"hull_points": [list(map(float, p)) for p in table_pts]},
             cls="table", origin="real"),
        node("browser", {"panel": {"w": 1.0, "h": 1.0, "px": 1000, "py": 1000}},
             t=(1.2, 0, 3), r=(0, 1, 0, 0), cls="panel"),
        node("note", {"mesh": mesh_doc(note)}, t=(0, 5, 0), cls="note",
             interactable=False),
    ])


PLANE_TRACE = """\
# single step onto the wall: yaw 5 degrees
16 DELTA 100 0
"""

# 1-count sweep across the gap between the spheres (yaw -30 to +30 degrees)
SWEEP_TRACE = "# gap sweep, 1-count deltas\n0 DELTA -600 0\n" + "".join(
    f"{8 * (i + 1)} DELTA 1 0\n" for i in range(1200)
)

PANEL_TRACE = """\
# enter the panel at its center, walk to the right edge, then out into the void
0 DELTA 0 0
8 DELTA 225 0
16 DELTA 100 0
24 DELTA 100 0
"""

DEMO_TRACE = """\
# void -> sphere surface -> void -> panel -> void, with a select and a menu
0 DELTA 0 0
8 DELTA -440 0
16 BTN LEFT DOWN
24 BTN LEFT UP
32 BTN RIGHT DOWN
40 DELTA 10 0
48 BTN RIGHT UP
56 DELTA 440 0
64 DELTA 440 0
72 DELTA 500 0
80 DELTA 2000 0
"""


def write_triple(name, scene_text, trace_text):
    canonical = serialize_scene(parse_scene(scene_text))
    (GOLDEN / f"{name}.wmscene").write_text(canonical + "\n")
    (GOLDEN / f"{name}.trace").write_text(trace_text)
    samples = replay(parse_scene(canonical), parse_trace(trace_text))
    (GOLDEN / f"{name}.log").write_text(format_log(samples))
    print(f"{name}: {len(samples)} samples")


def write_invalid_fixtures():
    doc = json.loads(plane_scene())
    doc["nodes"].append(doc["nodes"][0])
    (GOLDEN / "duplicate_id.wmscene").write_text(json.dumps(doc))
    (GOLDEN / "bad.trace").write_text("10 DELTA 1 1\n5 DELTA 1 1\n")


def main():
    GOLDEN.mkdir(parents=True, exist_ok=True)
    write_triple("plane", plane_scene(), PLANE_TRACE)
    write_triple("two_sphere", two_sphere_scene(), SWEEP_TRACE)
    write_triple("panel", panel_scene(), PANEL_TRACE)
    write_triple("demo", demo_scene(), DEMO_TRACE)
    write_invalid_fixtures()


if __name__ == "__main__":
    main()
