"""World-mouse style cursor engine: a depth-adaptive 3D cursor over a blended
scene graph of virtual meshes and hull-approximated real objects, with a
deterministic replay harness and an interactive session server."""

from .config import EngineConfig
from .cursor import CursorState, InputEvent
from .geometry import Ray, Transform, TriMesh, ViewPose, convex_hull, vec3
from .harness import Trace, compute_metrics, parse_trace, replay
from .scene import Scene, SceneNode, parse_scene, serialize_scene
from .session import EngineSession, TrajectorySample

__all__ = [
    "EngineConfig",
    "CursorState",
    "InputEvent",
    "Ray",
    "Transform",
    "TriMesh",
    "ViewPose",
    "convex_hull",
    "vec3",
    "Trace",
    "compute_metrics",
    "parse_trace",
    "replay",
    "Scene",
    "SceneNode",
    "parse_scene",
    "serialize_scene",
    "EngineSession",
    "TrajectorySample",
]
