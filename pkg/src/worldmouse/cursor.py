"""Depth-adaptive cursor: 2D delta to angular mapping, surface following,
distance-weighted depth interpolation in empty space, and 2D/3D panel
transitions.

The cursor direction is anchored to the world frame derived from the scene's
initial view (yaw about world up, yaw 0 = initial forward), so later view-pose
changes never drag the cursor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, Optional

import numpy as np

from .config import EngineConfig
from .geometry import Ray, SurfaceHit, Vec3, ViewPose, cross, normalize, norm
from .scene import PanelGeometry, Scene, SceneNode, SilhouetteCache, angular_gap

MODE_SURFACE = "SURFACE"
MODE_VOID = "VOID"
MODE_PANEL = "PANEL"


@dataclass(frozen=True)
class CursorFrame:
    """Fixed reference frame for yaw/pitch, taken from the scene's initial view."""

    forward: Vec3
    up: Vec3
    right: Vec3

    @staticmethod
    def from_view(view: ViewPose) -> "CursorFrame":
        return CursorFrame(view.forward, view.up, cross(view.up, view.forward))


@dataclass(frozen=True)
class InputEvent:
    t: int
    kind: str                       # "delta" | "button" | "scroll" | "view"
    dx: int = 0
    dy: int = 0
    button: str = ""                # LEFT | RIGHT | MIDDLE
    pressed: bool = False
    ticks: int = 0
    view: Optional[ViewPose] = None


@dataclass(frozen=True)
class CursorState:
    yaw: float                      # degrees
    pitch: float                    # degrees
    mode: str                       # MODE_SURFACE | MODE_VOID | MODE_PANEL
    position: Vec3
    orientation: Vec3               # cursor disc normal
    depth: float                    # meters from the view origin
    node_id: Optional[str] = None   # surface / panel node
    hit: Optional[SurfaceHit] = None
    u: float = 0.0                  # panel coords, [0,1]^2, v grows downward
    v: float = 0.0


def direction_from_angles(frame: CursorFrame, yaw: float, pitch: float) -> Vec3:
    """Yaw rotates about world up (right-positive), pitch elevates toward up."""
    ry, rp = math.radians(yaw), math.radians(pitch)
    horizontal = math.cos(ry) * frame.forward + math.sin(ry) * frame.right
    return math.cos(rp) * horizontal + math.sin(rp) * frame.up


def angles_from_direction(frame: CursorFrame, direction: Vec3) -> tuple[float, float]:
    s = min(1.0, max(-1.0, float(np.dot(direction, frame.up))))
    pitch = math.degrees(math.asin(s))
    h = direction - float(np.dot(direction, frame.up)) * frame.up
    if norm(h) < 1e-12:
        return 0.0, pitch
    yaw = math.degrees(math.atan2(float(np.dot(h, frame.right)), float(np.dot(h, frame.forward))))
    return yaw, pitch


def wrap_yaw(yaw: float) -> float:
    y = (yaw + 180.0) % 360.0 - 180.0
    return 180.0 if y == -180.0 else y


def apply_delta(yaw: float, pitch: float, dx: float, dy: float,
                config: EngineConfig) -> tuple[float, float]:
    """Positive dx turns right; positive dy (screen-down) pitches down."""
    new_yaw = wrap_yaw(yaw + dx * config.angular_gain)
    new_pitch = pitch - dy * config.angular_gain
    new_pitch = max(-config.pitch_limit, min(config.pitch_limit, new_pitch))
    return new_yaw, new_pitch


def void_depth(direction: Vec3, cache: SilhouetteCache, config: EngineConfig,
               prev_depth: Optional[float] = None) -> float:
    """Inverse-distance weighting over the K angularly-nearest visible nodes.

    Weight 1/(gap+eps)^p makes the depth converge to a node's boundary depth
    as the direction approaches its silhouette, which keeps surface-to-void
    handoffs continuous.
    """
    gaps: list[tuple[float, int, float]] = []
    for i, node_id in enumerate(cache.order):
        alpha, boundary_depth = angular_gap(cache, node_id, direction)
        gaps.append((alpha, i, boundary_depth))
    if gaps:
        gaps.sort(key=lambda g: (g[0], g[1]))
        chosen = gaps[: config.k_nearest]
        weights = [1.0 / (alpha + config.idw_epsilon) ** config.idw_power
                   for alpha, _, _ in chosen]
        depth = sum(w * d for w, (_, _, d) in zip(weights, chosen)) / sum(weights)
    else:
        depth = config.default_depth
    lam = config.depth_smoothing
    if lam > 0.0 and prev_depth is not None:
        depth = lam * prev_depth + (1.0 - lam) * depth
    return depth


# --- panel coordinate mapping -----------------------------------------------

def panel_point(node: SceneNode, u: float, v: float) -> Vec3:
    """World position of normalized panel coords (origin top-left, v down).

    u runs along local -x so that, for a viewer facing the panel's +z front,
    u grows in the same world direction as positive yaw; mouse-right therefore
    means the same thing on the panel and in free space.
    """
    spec = node.geometry.panel
    local = np.array([(0.5 - u) * spec.width, (0.5 - v) * spec.height, 0.0])
    return node.transform.apply_points(local.reshape(1, 3))[0]


def panel_uv(node: SceneNode, point: Vec3) -> tuple[float, float]:
    spec = node.geometry.panel
    local = node.transform.invert_point(point)
    u = 0.5 - float(local[0]) / spec.width
    v = 0.5 - float(local[1]) / spec.height
    return min(1.0, max(0.0, u)), min(1.0, max(0.0, v))


def _panel_front_normal(node: SceneNode) -> Vec3:
    return node.transform.apply_normals(np.array([[0.0, 0.0, 1.0]]))[0]


# --- mode resolution --------------------------------------------------------

CacheFn = Callable[[], SilhouetteCache]


def resolve_mode(yaw: float, pitch: float, scene: Scene, view: ViewPose,
                 frame: CursorFrame, config: EngineConfig, cache_fn: CacheFn,
                 prev_void_depth: Optional[float] = None,
                 ignore: Optional[set] = None) -> CursorState:
    """Cast the cursor ray and classify the result into a cursor mode."""
    direction = direction_from_angles(frame, yaw, pitch)
    result = scene.raycast(Ray(view.origin, direction), ignore=ignore)
    if result is not None:
        node_id, hit = result
        node = scene.node(node_id)
        if isinstance(node.geometry, PanelGeometry):
            u, v = panel_uv(node, hit.point)
            return CursorState(
                yaw=yaw, pitch=pitch, mode=MODE_PANEL,
                position=hit.point, orientation=_panel_front_normal(node),
                depth=hit.t, node_id=node_id, hit=hit, u=u, v=v,
            )
        return CursorState(
            yaw=yaw, pitch=pitch, mode=MODE_SURFACE,
            position=hit.point, orientation=hit.normal,
            depth=hit.t, node_id=node_id, hit=hit,
        )
    depth = void_depth(direction, cache_fn(), config, prev_void_depth)
    return CursorState(
        yaw=yaw, pitch=pitch, mode=MODE_VOID,
        position=view.origin + depth * direction, orientation=-direction,
        depth=depth,
    )


def _panel_delta_step(state: CursorState, scene: Scene, view: ViewPose,
                      frame: CursorFrame, dx: int, dy: int, config: EngineConfig,
                      cache_fn: CacheFn, ignore: Optional[set]) -> CursorState:
    node = scene.node(state.node_id)
    spec = node.geometry.panel
    du = dx * config.panel_gain / spec.resolution_x
    dv = dy * config.panel_gain / spec.resolution_y
    u2, v2 = state.u + du, state.v + dv
    if 0.0 <= u2 <= 1.0 and 0.0 <= v2 <= 1.0:
        pos = panel_point(node, u2, v2)
        return replace(state, u=u2, v=v2, position=pos,
                       depth=norm(pos - view.origin))

    # crossing fraction s in [0,1) where the motion first leaves the unit square
    s = 1.0
    if du > 0 and u2 > 1.0:
        s = min(s, (1.0 - state.u) / du)
    elif du < 0 and u2 < 0.0:
        s = min(s, (0.0 - state.u) / du)
    if dv > 0 and v2 > 1.0:
        s = min(s, (1.0 - state.v) / dv)
    elif dv < 0 and v2 < 0.0:
        s = min(s, (0.0 - state.v) / dv)
    s = max(0.0, min(1.0, s))
    edge_u = min(1.0, max(0.0, state.u + s * du))
    edge_v = min(1.0, max(0.0, state.v + s * dv))
    edge_world = panel_point(node, edge_u, edge_v)

    # aim the cursor ray exactly through the crossing point, then spend the
    # leftover counts as a normal 3D delta
    yaw, pitch = angles_from_direction(frame, normalize(edge_world - view.origin))
    pitch = max(-config.pitch_limit, min(config.pitch_limit, pitch))
    yaw, pitch = apply_delta(yaw, pitch, dx * (1.0 - s), dy * (1.0 - s), config)
    prev_void = state.depth if state.mode == MODE_VOID else None
    return resolve_mode(yaw, pitch, scene, view, frame, config, cache_fn,
                        prev_void_depth=prev_void, ignore=ignore)


def step(state: CursorState, scene: Scene, view: ViewPose, frame: CursorFrame,
         event: InputEvent, config: EngineConfig, cache_fn: CacheFn,
         ignore: Optional[set] = None) -> CursorState:
    """Advance the cursor for one Delta or View event.

    Button and Scroll events do not move the cursor; callers route them to the
    interaction layer and keep the state unchanged.
    """
    if event.kind == "delta":
        if state.mode == MODE_PANEL:
            return _panel_delta_step(state, scene, view, frame, event.dx, event.dy,
                                     config, cache_fn, ignore)
        yaw, pitch = apply_delta(state.yaw, state.pitch, event.dx, event.dy, config)
        prev_void = state.depth if state.mode == MODE_VOID else None
        return resolve_mode(yaw, pitch, scene, view, frame, config, cache_fn,
                            prev_void_depth=prev_void, ignore=ignore)
    if event.kind == "view":
        if state.mode == MODE_PANEL:
            # panel coords are view independent; only the depth reading changes
            return replace(state, depth=norm(state.position - event.view.origin))
        prev_void = state.depth if state.mode == MODE_VOID else None
        return resolve_mode(state.yaw, state.pitch, scene, event.view, frame, config,
                            cache_fn, prev_void_depth=prev_void, ignore=ignore)
    return state
