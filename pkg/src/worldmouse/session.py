"""One engine session: event-ordered state machine combining the cursor with
selection, drag, menu and ghost handling. A session is strictly single
threaded; state n+1 depends only on state n and event n+1."""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from . import cursor as cur
from . import interact
from .config import EngineConfig
from .cursor import CursorFrame, CursorState, InputEvent, MODE_SURFACE, MODE_VOID
from .geometry import Vec3, ViewPose, norm
from .interact import DragState, GhostState, ImmovableNodeError, RadialMenu, Selection
from .scene import Scene, SilhouetteCache, build_silhouette_cache

CACHE_VIEW_SLACK = 0.01  # meters the view origin may move before a rebuild


@dataclass(frozen=True)
class TrajectorySample:
    t: int
    mode: str
    position: Vec3
    depth: float
    yaw: float
    pitch: float
    hovered: Optional[str]
    selection: tuple
    emitted_action: Optional[str]


class EngineSession:
    def __init__(self, scene: Scene, config: Optional[EngineConfig] = None):
        base = config if config is not None else EngineConfig()
        self.config = base.with_overrides(scene.config_overrides)
        self.scene = scene
        self.view = scene.view
        self.frame = CursorFrame.from_view(scene.view)
        self.selection = Selection()
        self.menu: Optional[RadialMenu] = None
        self.drag: Optional[DragState] = None
        self.ghost: Optional[GhostState] = None
        self._cache: Optional[SilhouetteCache] = None
        self._cache_key = None
        self.state: CursorState = cur.resolve_mode(
            0.0, 0.0, scene, self.view, self.frame, self.config, self._cache_fn)

    # --- silhouette cache ---------------------------------------------------

    def _current_cache_key(self):
        nodes = tuple((n.id, self.scene.node_revision(n.id))
                      for n in self.scene.nodes if n.interactable)
        return nodes

    def _cache_fn(self) -> SilhouetteCache:
        key = self._current_cache_key()
        stale = (
            self._cache is None
            or key != self._cache_key
            or norm(self.view.origin - self._cache.view_origin) > CACHE_VIEW_SLACK
        )
        if stale:
            self._cache = build_silhouette_cache(self.scene, self.view, self.config)
            self._cache_key = key
        return self._cache

    # --- event processing ---------------------------------------------------

    def process(self, event: InputEvent) -> TrajectorySample:
        action: Optional[str] = None
        if event.kind == "delta":
            action = self._on_delta(event)
        elif event.kind == "button":
            action = self._on_button(event)
        elif event.kind == "scroll":
            self._on_scroll(event)
        elif event.kind == "view":
            self._on_view(event)
        else:
            raise ValueError(f"unknown event kind {event.kind!r}")

        if self.ghost is not None:
            interact.follow_cursor(self.ghost, self.scene, self.state)
        return TrajectorySample(
            t=event.t,
            mode=self.state.mode,
            position=self.state.position,
            depth=self.state.depth,
            yaw=self.state.yaw,
            pitch=self.state.pitch,
            hovered=interact.hover_target(self.state),
            selection=tuple(self.selection.node_ids),
            emitted_action=action,
        )

    def _dragging(self) -> bool:
        return self.drag is not None and self.drag.active

    def _cursor_direction(self) -> Vec3:
        return cur.direction_from_angles(self.frame, self.state.yaw, self.state.pitch)

    def _on_delta(self, event: InputEvent) -> Optional[str]:
        if self.menu is not None and self.menu.open:
            interact.menu_navigate(self.menu, event.dx, event.dy)
            return None
        self.state = cur.step(self.state, self.scene, self.view, self.frame,
                              event, self.config, self._cache_fn)
        if self._dragging():
            interact.drag_update(self.drag, self.scene, self.view,
                                 self._cursor_direction(), 0, self.config)
        return None

    def _on_button(self, event: InputEvent) -> Optional[str]:
        if event.button == "LEFT":
            if event.pressed:
                if self.menu is not None and self.menu.open:
                    self.menu = None
                    return None
                if self.ghost is not None:
                    placed = interact.place_ghost(self.scene, self.ghost, self.state)
                    self.ghost = None
                    self.selection.set(placed)
                    return None
                interact.handle_click(self.state, self.scene, self.selection,
                                      "LEFT", self.config)
                if self.state.mode == MODE_SURFACE:
                    try:
                        self.drag = interact.begin_drag(self.state, self.scene)
                    except ImmovableNodeError:
                        self.drag = None
            else:
                if self._dragging():
                    interact.end_drag(self.drag, self.scene, self.config)
                    self.drag = None
            return None
        if event.button == "RIGHT":
            if event.pressed:
                self.menu = interact.handle_click(self.state, self.scene,
                                                  self.selection, "RIGHT", self.config)
                return None
            if self.menu is not None and self.menu.open:
                action = interact.menu_confirm(self.menu)
                self.menu = None
                return action
        return None

    def _on_scroll(self, event: InputEvent) -> None:
        if self._dragging():
            interact.drag_update(self.drag, self.scene, self.view,
                                 self._cursor_direction(), event.ticks, self.config)
            return
        target = interact.hover_target(self.state)
        if target is not None and target in self.selection.node_ids:
            node = self.scene.node(target)
            if node.origin_kind == "virtual" and not node.is_panel:
                factor = self.config.scroll_depth_factor ** event.ticks
                self.scene.update_node_transform(
                    target, replace(node.transform, scale=node.transform.scale * factor))

    def _on_view(self, event: InputEvent) -> None:
        self.view = event.view
        self.state = cur.step(self.state, self.scene, self.view, self.frame,
                              event, self.config, self._cache_fn)
        if self._dragging():
            interact.drag_update(self.drag, self.scene, self.view,
                                 self._cursor_direction(), 0, self.config)

    # --- authoring helpers ---------------------------------------------------

    def spawn_ghost(self, template_id: str) -> str:
        template = self.scene.node(template_id)
        self.ghost = interact.spawn_ghost(self.scene, template)
        interact.follow_cursor(self.ghost, self.scene, self.state)
        return self.ghost.node_id

    def remove_node(self, node_id: str) -> None:
        self.scene.remove_node(node_id)
        self.selection.drop(node_id)
