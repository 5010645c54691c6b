"""`wm` command line: validate scenes, replay traces, compute metrics, serve
interactive sessions. Exit codes: 0 success, 2 validation error, 1 runtime."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .config import ConfigError, EngineConfig, load_config_overrides
from .harness import (
    TraceError,
    compute_metrics,
    format_log,
    metrics_from_log,
    parse_log,
    parse_trace,
    replay,
)
from .scene import SceneError, parse_scene

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_VALIDATION = 2


def _load_config(path: str | None) -> EngineConfig:
    config = EngineConfig()
    if path:
        config = config.with_overrides(load_config_overrides(Path(path).read_text()))
    return config


def cmd_validate(args) -> int:
    try:
        scene = parse_scene(Path(args.scene).read_text())
    except (SceneError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_VALIDATION
    print(f"ok: {len(scene.nodes)} nodes")
    return EXIT_OK


def cmd_replay(args) -> int:
    try:
        config = _load_config(args.config)
        scene = parse_scene(Path(args.scene).read_text())
        trace = parse_trace(Path(args.trace).read_text())
    except (SceneError, TraceError, ConfigError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_VALIDATION
    samples = replay(scene, trace, config)
    Path(args.out).write_text(format_log(samples))
    print(f"wrote {len(samples)} samples to {args.out}")
    return EXIT_OK


def cmd_metrics(args) -> int:
    try:
        rows = parse_log(Path(args.log).read_text())
    except (ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_VALIDATION
    m = metrics_from_log(rows)
    print(f"path_length\t{m.path_length:.17g}")
    print(f"mode_transitions\t{m.mode_transitions}")
    print(f"max_depth_jump\t{m.max_depth_jump:.17g}")
    print(f"surface_time_fraction\t{m.surface_time_fraction:.17g}")
    return EXIT_OK


def cmd_serve(args) -> int:
    try:
        config = _load_config(args.config)
        scene_text = Path(args.scene).read_text()
        parse_scene(scene_text)
    except (SceneError, ConfigError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_VALIDATION
    from .server import serve

    print(f"serving {args.scene} on ws://{args.host}:{args.port}/session", flush=True)
    serve(scene_text, args.port, config, host=args.host)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="wm", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a scene file")
    p.add_argument("--scene", required=True)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("replay", help="replay a trace against a scene")
    p.add_argument("--scene", required=True)
    p.add_argument("--trace", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--config")
    p.set_defaults(func=cmd_replay)

    p = sub.add_parser("metrics", help="summarize a trajectory log")
    p.add_argument("--log", required=True)
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("serve", help="serve an interactive session")
    p.add_argument("--scene", required=True)
    p.add_argument("--port", type=int, required=True)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--config")
    p.set_defaults(func=cmd_serve)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except KeyboardInterrupt:
        return EXIT_RUNTIME
    except Exception as e:  # noqa: BLE001 - CLI boundary
        print(f"error: {e}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
