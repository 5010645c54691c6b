import numpy as np
import pytest

from conftest import (
    mesh_doc,
    node_doc,
    scene_text,
    sphere_node,
    table_hull_node,
    two_sphere_scene_text,
)
from worldmouse.cursor import InputEvent, MODE_SURFACE, MODE_VOID
from worldmouse.geometry import Ray, vec3
from worldmouse.scene import parse_scene
from worldmouse.session import EngineSession
from worldmouse.shapes import box


def delta(t, dx, dy):
    return InputEvent(t=t, kind="delta", dx=dx, dy=dy)


def btn(t, button, pressed):
    return InputEvent(t=t, kind="button", button=button, pressed=pressed)


def scroll(t, ticks):
    return InputEvent(t=t, kind="scroll", ticks=ticks)


def single_sphere_session():
    scene = parse_scene(scene_text([sphere_node("ball", (0, 0, 3), 0.5)]))
    return EngineSession(scene)


class TestSelectionAndDrag:
    def test_left_down_selects_and_grabs(self):
        session = single_sphere_session()
        assert session.state.mode == MODE_SURFACE
        sample = session.process(btn(0, "LEFT", True))
        assert sample.selection == ("ball",)
        assert session.drag is not None and session.drag.active

    def test_left_up_releases(self):
        session = single_sphere_session()
        session.process(btn(0, "LEFT", True))
        session.process(btn(8, "LEFT", False))
        assert session.drag is None
        assert session.scene.node("ball").interactable is True

    def test_drag_follows_cursor_ray(self):
        session = single_sphere_session()
        session.process(btn(0, "LEFT", True))
        session.process(delta(8, 100, 0))
        moved = session.scene.node("ball").transform.translation
        assert moved[0] > 0.05  # rotated right with the cursor

    def test_scroll_during_drag_changes_grab_depth(self):
        session = single_sphere_session()
        session.process(btn(0, "LEFT", True))
        d0 = session.drag.grab_depth
        session.process(scroll(8, 3))
        assert session.drag.grab_depth == pytest.approx(d0 * 1.05 ** 3)

    def test_real_node_click_selects_but_never_drags(self):
        scene = parse_scene(scene_text([table_hull_node("desk", (0, 0, 3), (1, 0.8, 1))]))
        session = EngineSession(scene)
        sample = session.process(btn(0, "LEFT", True))
        assert sample.selection == ("desk",)
        assert session.drag is None

    def test_left_click_in_void_clears_selection(self):
        session = single_sphere_session()
        session.process(btn(0, "LEFT", True))
        session.process(btn(8, "LEFT", False))
        session.process(delta(16, 2000, 0))  # rotate far off the sphere
        assert session.state.mode == MODE_VOID
        sample = session.process(btn(24, "LEFT", True))
        assert sample.selection == ()


class TestMenu:
    def test_right_click_cycle_emits_action(self):
        session = single_sphere_session()
        session.process(btn(0, "RIGHT", True))
        assert session.menu is not None and session.menu.open
        frozen = session.state
        session.process(delta(8, 10, 0))  # East: second item
        assert session.state is frozen  # cursor frozen while the menu is open
        sample = session.process(btn(16, "RIGHT", False))
        assert sample.emitted_action == "copy"
        assert session.menu is None

    def test_confirm_inside_deadzone_is_silent(self):
        session = single_sphere_session()
        session.process(btn(0, "RIGHT", True))
        session.process(delta(8, 2, 1))
        sample = session.process(btn(16, "RIGHT", False))
        assert sample.emitted_action is None

    def test_left_down_dismisses_menu(self):
        session = single_sphere_session()
        session.process(btn(0, "RIGHT", True))
        sample = session.process(btn(8, "LEFT", True))
        assert session.menu is None
        assert sample.selection == ()  # the dismissing click does not select


class TestScrollScale:
    def test_scroll_scales_hovered_selected_virtual_node(self):
        session = single_sphere_session()
        session.process(btn(0, "LEFT", True))
        session.process(btn(8, "LEFT", False))
        session.process(scroll(16, 2))
        scale = session.scene.node("ball").transform.scale
        assert np.allclose(scale, 1.05 ** 2)

    def test_scroll_without_selection_is_inert(self):
        session = single_sphere_session()
        session.process(scroll(0, 2))
        assert np.allclose(session.scene.node("ball").transform.scale, 1.0)

    def test_scroll_never_scales_real_nodes(self):
        scene = parse_scene(scene_text([table_hull_node("desk", (0, 0, 3), (1, 0.8, 1))]))
        session = EngineSession(scene)
        session.process(btn(0, "LEFT", True))
        session.process(btn(8, "LEFT", False))
        session.process(scroll(16, 2))
        assert np.allclose(session.scene.node("desk").transform.scale, 1.0)


class TestGhostFlow:
    def test_spawn_follow_place(self):
        mesh = box(0.1, 0.1, 0.02)
        scene = parse_scene(scene_text([
            node_doc("note", {"mesh": mesh_doc(mesh)}, t=(9, 9, 9), interactable=False),
            sphere_node("wall", (0, 0, 3), 1.0),
        ]))
        session = EngineSession(scene)
        gid = session.spawn_ghost("note")
        session.process(delta(0, 40, 0))
        ghost_pos = scene.node(gid).transform.translation
        assert np.allclose(ghost_pos, session.state.position)
        sample = session.process(btn(8, "LEFT", True))
        assert sample.selection == (gid,)
        assert scene.node(gid).interactable is True
        assert session.ghost is None


class TestViewEvents:
    def test_view_event_moves_origin_without_turning_cursor(self):
        session = EngineSession(parse_scene(two_sphere_scene_text()))
        session.process(delta(0, 100, 25))
        yaw, pitch = session.state.yaw, session.state.pitch
        pose = InputEvent(t=8, kind="view",
                          view=session.view.__class__.from_vectors(
                              vec3(0.5, 0.2, -0.5), vec3(0, 0, 1), vec3(0, 1, 0)))
        session.process(pose)
        assert (session.state.yaw, session.state.pitch) == (yaw, pitch)
        assert np.allclose(session.view.origin, [0.5, 0.2, -0.5])


class TestCacheLifecycle:
    def test_cache_rebuilds_when_nodes_change(self):
        session = EngineSession(parse_scene(two_sphere_scene_text()))
        session.process(delta(0, 2000, 0))  # force a void resolve, builds cache
        first = session._cache
        session.remove_node("left")
        session.process(delta(8, 1, 0))
        assert session._cache is not first
        assert "left" not in session._cache

    def test_cache_stable_across_plain_deltas(self):
        session = EngineSession(parse_scene(two_sphere_scene_text()))
        session.process(delta(0, 2000, 0))
        first = session._cache
        session.process(delta(8, 5, 5))
        assert session._cache is first

    def test_drag_does_not_thrash_cache(self):
        session = single_sphere_session()
        session.process(btn(0, "LEFT", True))
        session.process(delta(8, 10, 0))
        cache_mid = session._cache
        session.process(delta(16, 10, 0))
        assert session._cache is cache_mid
