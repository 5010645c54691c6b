"""Deterministic replay harness: trace format, trajectory logs, and metrics.

Everything is text with 17-significant-digit numerics so golden files diff
cleanly and reproduce byte-identically across runs on the same platform.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .config import EngineConfig
from .cursor import InputEvent
from .geometry import GeometryError, ViewPose
from .scene import Scene
from .session import EngineSession, TrajectorySample

_BUTTONS = ("LEFT", "RIGHT", "MIDDLE")


class TraceError(ValueError):
    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


@dataclass(frozen=True)
class Trace:
    events: tuple


def _fmt(x: float) -> str:
    return f"{float(x):.17g}"


def _parse_int(token: str, line_no: int, what: str) -> int:
    try:
        return int(token)
    except ValueError:
        raise TraceError(line_no, f"{what} must be an integer, got {token!r}") from None


def _parse_float(token: str, line_no: int, what: str) -> float:
    try:
        return float(token)
    except ValueError:
        raise TraceError(line_no, f"{what} must be a number, got {token!r}") from None


def parse_trace_line(line: str, line_no: int, last_t: Optional[int]) -> Optional[InputEvent]:
    """One trace line to an event; returns None for blank/comment lines."""
    stripped = line.strip()
    if not stripped or stripped.startswith("#"):
        return None
    parts = stripped.split()
    t = _parse_int(parts[0], line_no, "timestamp")
    if last_t is not None and t < last_t:
        raise TraceError(line_no, f"timestamp {t} is before previous timestamp {last_t}")
    if len(parts) < 2:
        raise TraceError(line_no, "missing event kind")
    kind = parts[1]
    if kind == "DELTA":
        if len(parts) != 4:
            raise TraceError(line_no, "DELTA takes exactly 2 arguments: dx dy")
        return InputEvent(t=t, kind="delta",
                          dx=_parse_int(parts[2], line_no, "dx"),
                          dy=_parse_int(parts[3], line_no, "dy"))
    if kind == "BTN":
        if len(parts) != 4 or parts[2] not in _BUTTONS or parts[3] not in ("DOWN", "UP"):
            raise TraceError(line_no, "BTN takes <LEFT|RIGHT|MIDDLE> <DOWN|UP>")
        return InputEvent(t=t, kind="button", button=parts[2], pressed=parts[3] == "DOWN")
    if kind == "SCROLL":
        if len(parts) != 3:
            raise TraceError(line_no, "SCROLL takes exactly 1 argument: ticks")
        return InputEvent(t=t, kind="scroll", ticks=_parse_int(parts[2], line_no, "ticks"))
    if kind == "VIEW":
        if len(parts) != 11:
            raise TraceError(line_no, "VIEW takes 9 numbers: px py pz fx fy fz ux uy uz")
        nums = [_parse_float(p, line_no, "view component") for p in parts[2:]]
        try:
            pose = ViewPose.from_vectors(nums[0:3], nums[3:6], nums[6:9])
        except GeometryError as e:
            raise TraceError(line_no, f"invalid view pose: {e}") from e
        return InputEvent(t=t, kind="view", view=pose)
    raise TraceError(line_no, f"unknown event kind {kind!r}")


def parse_trace(text: str) -> Trace:
    events = []
    last_t: Optional[int] = None
    for line_no, line in enumerate(text.splitlines(), start=1):
        event = parse_trace_line(line, line_no, last_t)
        if event is None:
            continue
        last_t = event.t
        events.append(event)
    return Trace(events=tuple(events))


# --- trajectory log ---------------------------------------------------------

LOG_COLUMNS = ("t", "mode", "x", "y", "z", "depth", "yaw", "pitch",
               "hovered", "selection", "action")


def format_sample(sample: TrajectorySample) -> str:
    fields = [
        str(sample.t),
        sample.mode,
        _fmt(sample.position[0]),
        _fmt(sample.position[1]),
        _fmt(sample.position[2]),
        _fmt(sample.depth),
        _fmt(sample.yaw),
        _fmt(sample.pitch),
        sample.hovered if sample.hovered is not None else "-",
        ",".join(sample.selection) if sample.selection else "-",
        sample.emitted_action if sample.emitted_action is not None else "-",
    ]
    return "\t".join(fields)


def format_log(samples) -> str:
    return "".join(format_sample(s) + "\n" for s in samples)


@dataclass(frozen=True)
class LogRow:
    t: int
    mode: str
    position: np.ndarray
    depth: float
    yaw: float
    pitch: float
    hovered: Optional[str]
    selection: tuple
    action: Optional[str]


def parse_log(text: str) -> list[LogRow]:
    rows = []
    for line_no, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) != len(LOG_COLUMNS):
            raise ValueError(f"log line {line_no}: expected {len(LOG_COLUMNS)} fields")
        rows.append(LogRow(
            t=int(parts[0]),
            mode=parts[1],
            position=np.array([float(parts[2]), float(parts[3]), float(parts[4])]),
            depth=float(parts[5]),
            yaw=float(parts[6]),
            pitch=float(parts[7]),
            hovered=None if parts[8] == "-" else parts[8],
            selection=tuple() if parts[9] == "-" else tuple(parts[9].split(",")),
            action=None if parts[10] == "-" else parts[10],
        ))
    return rows


# --- replay & metrics -------------------------------------------------------

def replay(scene: Scene, trace: Trace, config: Optional[EngineConfig] = None) -> list[TrajectorySample]:
    """Feed every trace event through one engine session, in order.

    The scene object is mutated by interactions; callers wanting a pristine
    scene should re-parse it.
    """
    session = EngineSession(scene, config)
    return [session.process(event) for event in trace.events]


@dataclass(frozen=True)
class Metrics:
    path_length: float
    mode_transitions: int
    max_depth_jump: float
    surface_time_fraction: float


def compute_metrics(samples) -> Metrics:
    if not samples:
        return Metrics(0.0, 0, 0.0, 0.0)
    positions = np.array([np.asarray(s.position, dtype=float) for s in samples])
    depths = np.array([s.depth for s in samples])
    modes = [s.mode for s in samples]
    path_length = float(np.linalg.norm(np.diff(positions, axis=0), axis=1).sum()) if len(samples) > 1 else 0.0
    transitions = sum(1 for a, b in zip(modes, modes[1:]) if a != b)
    max_jump = float(np.abs(np.diff(depths)).max()) if len(samples) > 1 else 0.0
    surface_fraction = sum(1 for m in modes if m == "SURFACE") / len(modes)
    return Metrics(path_length, transitions, max_jump, surface_fraction)


def metrics_from_log(rows: list[LogRow]) -> Metrics:
    return compute_metrics([
        TrajectorySample(r.t, r.mode, r.position, r.depth, r.yaw, r.pitch,
                         r.hovered, r.selection, r.action)
        for r in rows
    ])
