"""Desktop-metaphor interactions over the blended scene: hover, click-select,
drag & drop with scroll depth, axis-constrained gizmo moves, radial context
menus, and ghost placement."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .config import EngineConfig
from .cursor import MODE_SURFACE, MODE_VOID, MODE_PANEL, CursorState
from .geometry import (
    Ray,
    Transform,
    Vec3,
    ViewPose,
    normalize,
    norm,
    quat_from_unit_vectors,
    vec3,
)
from .scene import Scene, SceneNode

MENU_DEADZONE = 8.0   # accumulated counts before a sector highlights
MENU_MAX_ITEMS = 12


class InteractError(ValueError):
    pass


class ImmovableNodeError(InteractError):
    """Raised when a drag is attempted on a real-origin node."""


@dataclass
class Selection:
    node_ids: list[str] = field(default_factory=list)

    def set(self, node_id: str) -> None:
        self.node_ids = [node_id]

    def clear(self) -> None:
        self.node_ids = []

    def drop(self, node_id: str) -> None:
        self.node_ids = [i for i in self.node_ids if i != node_id]


@dataclass
class DragState:
    node_id: str
    grab_depth: float
    grab_offset: Vec3      # node origin minus grab point, world space
    active: bool = True

    def __post_init__(self):
        if self.grab_depth <= 0:
            raise InteractError("grab depth must be positive")


@dataclass
class RadialMenu:
    items: list[tuple[str, str]]      # (label, action_id), item 0 at North
    ax: float = 0.0
    ay: float = 0.0
    open: bool = True
    highlighted: Optional[int] = None

    def __post_init__(self):
        if not 1 <= len(self.items) <= MENU_MAX_ITEMS:
            raise InteractError(f"radial menu needs 1..{MENU_MAX_ITEMS} items")


@dataclass(frozen=True)
class GizmoAxis:
    axis: Vec3      # unit direction in world space
    origin: Vec3    # object position at drag start


def hover_target(state: CursorState) -> Optional[str]:
    if state.mode in (MODE_SURFACE, MODE_PANEL):
        return state.node_id
    return None


def menu_items_for(label_class: str, config: EngineConfig) -> list[tuple[str, str]]:
    table = config.menu_actions
    entries = table.get(label_class, table.get("*", []))
    return [(str(label), str(action)) for label, action in entries]


def open_menu(node: Optional[SceneNode], config: EngineConfig) -> Optional[RadialMenu]:
    """Right-click menu; items adapt to the node's semantic label class."""
    label_class = node.label.class_name if node is not None else "*"
    items = menu_items_for(label_class, config)
    if not items:
        return None
    return RadialMenu(items=items)


def menu_navigate(menu: RadialMenu, dx: float, dy: float) -> Optional[int]:
    menu.ax += dx
    menu.ay += dy
    if math.hypot(menu.ax, menu.ay) < MENU_DEADZONE:
        menu.highlighted = None
    else:
        n = len(menu.items)
        sector = 2.0 * math.pi / n
        menu.highlighted = round(math.atan2(menu.ax, -menu.ay) / sector) % n
    return menu.highlighted


def menu_confirm(menu: RadialMenu) -> Optional[str]:
    menu.open = False
    if menu.highlighted is None:
        return None
    return menu.items[menu.highlighted][1]


# --- drag & drop ------------------------------------------------------------

def begin_drag(state: CursorState, scene: Scene) -> Optional[DragState]:
    """Start dragging the node under the cursor. Real nodes are immovable;
    in the void there is nothing to grab."""
    if state.mode != MODE_SURFACE:
        return None
    node = scene.node(state.node_id)
    if node.origin_kind == "real":
        raise ImmovableNodeError(f"node {node.id!r} is a real object and cannot be moved")
    grab_point = state.position
    offset = node.transform.translation - grab_point
    drag = DragState(node_id=node.id, grab_depth=state.depth, grab_offset=offset)
    # the payload must never occlude the cursor's own raycast while dragged
    scene.set_interactable(node.id, False)
    return drag


def drag_update(drag: DragState, scene: Scene, view: ViewPose, direction: Vec3,
                scroll_ticks: int, config: EngineConfig) -> None:
    """Keep the grab point on the cursor ray; scroll reels depth in or out."""
    if not drag.active:
        return
    if scroll_ticks:
        drag.grab_depth *= config.scroll_depth_factor ** scroll_ticks
    node = scene.node(drag.node_id)
    new_origin = view.origin + drag.grab_depth * direction + drag.grab_offset
    scene.update_node_transform(
        drag.node_id, replace(node.transform, translation=new_origin))


def end_drag(drag: DragState, scene: Scene, config: EngineConfig) -> None:
    """Drop the payload; if its lowest point is within snap_distance above a
    surface, translate it down into contact."""
    if not drag.active:
        return
    drag.active = False
    node = scene.node(drag.node_id)
    mesh = scene.world_mesh(drag.node_id)
    low_idx = int(np.argmin(mesh.vertices[:, 1]))
    low_point = mesh.vertices[low_idx]
    down = vec3(0.0, -1.0, 0.0)
    hit = scene.raycast(Ray(low_point, down), ignore={drag.node_id})
    if hit is not None and hit[1].t <= config.snap_distance:
        drop = node.transform.translation + hit[1].t * down
        scene.update_node_transform(drag.node_id, replace(node.transform, translation=drop))
    scene.set_interactable(drag.node_id, True)


def handle_click(state: CursorState, scene: Scene, selection: Selection,
                 button: str, config: EngineConfig) -> Optional[RadialMenu]:
    """Left selects (or clears in the void); right opens the radial menu."""
    target = hover_target(state)
    if button == "LEFT":
        if target is not None:
            selection.set(target)
        else:
            selection.clear()
        return None
    if button == "RIGHT":
        node = scene.node(target) if target is not None else None
        return open_menu(node, config)
    return None


# --- gizmo ------------------------------------------------------------------

def gizmo_drag(gizmo: GizmoAxis, ray: Ray) -> Vec3:
    """Closest point on the gizmo axis line to the cursor ray; parallel rays
    leave the position unchanged."""
    a = gizmo.axis
    d = ray.direction
    w = gizmo.origin - ray.origin
    b = float(np.dot(a, d))
    denom = 1.0 - b * b
    if abs(denom) < 1e-6:
        return gizmo.origin
    dk = float(np.dot(a, w))
    e = float(np.dot(d, w))
    s = (b * e - dk) / denom
    return gizmo.origin + s * a


# --- ghosts -----------------------------------------------------------------

@dataclass
class GhostState:
    node_id: str


def spawn_ghost(scene: Scene, template: SceneNode) -> GhostState:
    """Add a non-interactable copy of the template that rides on the cursor."""
    n = 0
    ghost_id = f"{template.id}-ghost"
    while scene.has_node(ghost_id):
        n += 1
        ghost_id = f"{template.id}-ghost{n}"
    ghost = SceneNode(
        id=ghost_id,
        label=template.label,
        origin_kind="virtual",
        transform=template.transform,
        geometry=template.geometry,
        interactable=False,
        dynamic=True,
    )
    scene.add_node(ghost)
    return GhostState(node_id=ghost_id)


def follow_cursor(ghost: GhostState, scene: Scene, state: CursorState) -> None:
    node = scene.node(ghost.node_id)
    scene.update_node_transform(
        ghost.node_id, replace(node.transform, translation=state.position))


def place_ghost(scene: Scene, ghost: Optional[GhostState], state: CursorState) -> str:
    """Anchor the ghost at the cursor and make it interactable. On a surface it
    is aligned with the surface normal and offset into resting contact."""
    if ghost is None or not scene.has_node(ghost.node_id):
        raise InteractError("no active ghost to place")
    node = scene.node(ghost.node_id)
    transform = replace(node.transform, translation=state.position)
    if state.mode == MODE_SURFACE:
        normal = state.orientation
        rotation = quat_from_unit_vectors(vec3(0.0, 0.0, 1.0), normal)
        transform = Transform(state.position, rotation, node.transform.scale)
        scene.update_node_transform(ghost.node_id, transform)
        # push out along the normal until nothing penetrates the surface plane
        verts = scene.world_mesh(ghost.node_id).vertices
        penetration = -float(((verts - state.position) @ normal).min())
        if penetration > 0:
            transform = replace(transform, translation=state.position + penetration * normal)
    scene.update_node_transform(ghost.node_id, transform)
    scene.set_interactable(ghost.node_id, True)
    return ghost.node_id
