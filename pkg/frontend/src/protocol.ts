// Wire format shared with the engine: one text frame per line.
//
//   client -> engine : HELLO | EVT <trace-line> | BYE
//   engine -> client : SCENE <scene json> | STATE <tab-separated sample> | ERR <message>

export type Vec3 = [number, number, number];

export interface SemanticLabel {
  className: string;
  confidence: number;
}

export interface NodeTransform {
  t: Vec3;
  r: [number, number, number, number]; // quaternion xyzw
  s: Vec3;
}

export type NodeGeometry =
  | { kind: "mesh"; vertices: Vec3[]; triangles: [number, number, number][]; normals?: Vec3[] }
  | { kind: "hull"; points: Vec3[] }
  | { kind: "panel"; w: number; h: number; px: number; py: number };

export interface SceneNode {
  id: string;
  label: SemanticLabel;
  origin: "real" | "virtual";
  transform: NodeTransform;
  geometry: NodeGeometry;
  interactable: boolean;
  dynamic: boolean;
}

export interface SceneDoc {
  view: { position: Vec3; forward: Vec3; up: Vec3 };
  nodes: SceneNode[];
}

export type CursorMode = "SURFACE" | "VOID" | "PANEL";

export interface StateSample {
  t: number;
  mode: CursorMode;
  position: Vec3;
  depth: number;
  yaw: number;
  pitch: number;
  hovered: string | null;
  selection: string[];
  action: string | null;
}

export type ServerMessage =
  | { kind: "scene"; scene: SceneDoc }
  | { kind: "state"; sample: StateSample }
  | { kind: "err"; message: string };

export class ProtocolError extends Error {}

function asVec3(value: unknown, path: string): Vec3 {
  if (!Array.isArray(value) || value.length !== 3 || value.some((x) => typeof x !== "number")) {
    throw new ProtocolError(`${path}: expected a 3-number array`);
  }
  return [value[0], value[1], value[2]];
}

function parseGeometry(raw: Record<string, unknown>, path: string): NodeGeometry {
  if ("mesh" in raw) {
    const mesh = raw.mesh as Record<string, unknown>;
    return {
      kind: "mesh",
      vertices: (mesh.vertices as unknown[]).map((v, i) => asVec3(v, `${path}.mesh.vertices[${i}]`)),
      triangles: mesh.triangles as [number, number, number][],
      normals: mesh.normals
        ? (mesh.normals as unknown[]).map((n, i) => asVec3(n, `${path}.mesh.normals[${i}]`))
        : undefined,
    };
  }
  if ("hull_points" in raw) {
    return {
      kind: "hull",
      points: (raw.hull_points as unknown[]).map((p, i) => asVec3(p, `${path}.hull_points[${i}]`)),
    };
  }
  if ("panel" in raw) {
    const p = raw.panel as Record<string, number>;
    return { kind: "panel", w: p.w!, h: p.h!, px: p.px!, py: p.py! };
  }
  throw new ProtocolError(`${path}: unknown geometry`);
}

export function parseSceneDocument(text: string): SceneDoc {
  let doc: Record<string, unknown>;
  try {
    doc = JSON.parse(text);
  } catch (e) {
    throw new ProtocolError(`scene is not valid JSON: ${(e as Error).message}`);
  }
  const view = doc.view as Record<string, unknown>;
  if (!view) throw new ProtocolError("$.view: missing");
  const nodesRaw = doc.nodes;
  if (!Array.isArray(nodesRaw)) throw new ProtocolError("$.nodes: expected an array");
  const nodes = nodesRaw.map((n, i) => {
    const raw = n as Record<string, unknown>;
    const path = `$.nodes[${i}]`;
    const label = raw.label as Record<string, unknown>;
    const tf = raw.transform as Record<string, unknown>;
    if (typeof raw.id !== "string") throw new ProtocolError(`${path}.id: expected a string`);
    return {
      id: raw.id,
      label: { className: String(label.class), confidence: Number(label.confidence) },
      origin: raw.origin as "real" | "virtual",
      transform: {
        t: asVec3(tf.t, `${path}.transform.t`),
        r: tf.r as [number, number, number, number],
        s: asVec3(tf.s, `${path}.transform.s`),
      },
      geometry: parseGeometry(raw.geometry as Record<string, unknown>, `${path}.geometry`),
      interactable: raw.interactable !== false,
      dynamic: raw.dynamic === true,
    };
  });
  return {
    view: {
      position: asVec3(view.position, "$.view.position"),
      forward: asVec3(view.forward, "$.view.forward"),
      up: asVec3(view.up, "$.view.up"),
    },
    nodes,
  };
}

const STATE_FIELDS = 11;

export function parseStateLine(line: string): StateSample {
  const parts = line.split("\t");
  if (parts.length !== STATE_FIELDS) {
    throw new ProtocolError(`state line has ${parts.length} fields, expected ${STATE_FIELDS}`);
  }
  const num = (i: number, what: string): number => {
    const v = Number(parts[i]);
    if (Number.isNaN(v)) throw new ProtocolError(`${what}: not a number: ${parts[i]}`);
    return v;
  };
  const mode = parts[1] as CursorMode;
  if (mode !== "SURFACE" && mode !== "VOID" && mode !== "PANEL") {
    throw new ProtocolError(`unknown cursor mode ${parts[1]}`);
  }
  return {
    t: num(0, "t"),
    mode,
    position: [num(2, "x"), num(3, "y"), num(4, "z")],
    depth: num(5, "depth"),
    yaw: num(6, "yaw"),
    pitch: num(7, "pitch"),
    hovered: parts[8] === "-" ? null : parts[8]!,
    selection: parts[9] === "-" ? [] : parts[9]!.split(","),
    action: parts[10] === "-" ? null : parts[10]!,
  };
}

export function parseServerMessage(raw: string): ServerMessage {
  if (raw.startsWith("SCENE ")) return { kind: "scene", scene: parseSceneDocument(raw.slice(6)) };
  if (raw.startsWith("STATE ")) return { kind: "state", sample: parseStateLine(raw.slice(6)) };
  if (raw.startsWith("ERR ")) return { kind: "err", message: raw.slice(4) };
  throw new ProtocolError(`unknown server message: ${raw.split(" ", 1)[0]}`);
}

export type ClientEvent =
  | { kind: "delta"; dx: number; dy: number }
  | { kind: "button"; button: "LEFT" | "RIGHT" | "MIDDLE"; pressed: boolean }
  | { kind: "scroll"; ticks: number }
  | { kind: "view"; position: Vec3; forward: Vec3; up: Vec3 };

export function formatEventLine(t: number, event: ClientEvent): string {
  switch (event.kind) {
    case "delta":
      return `${t} DELTA ${event.dx} ${event.dy}`;
    case "button":
      return `${t} BTN ${event.button} ${event.pressed ? "DOWN" : "UP"}`;
    case "scroll":
      return `${t} SCROLL ${event.ticks}`;
    case "view":
      return `${t} VIEW ${[...event.position, ...event.forward, ...event.up].join(" ")}`;
  }
}

// Radial menu convention mirrored from the engine so the overlay can highlight
// the same sector the engine will confirm: item 0 at North, clockwise, with an
// 8-count deadzone on the accumulated delta.
export const MENU_DEADZONE = 8;

export function menuHighlight(ax: number, ay: number, itemCount: number): number | null {
  if (Math.hypot(ax, ay) < MENU_DEADZONE) return null;
  const sector = (2 * Math.PI) / itemCount;
  const index = Math.round(Math.atan2(ax, -ay) / sector) % itemCount;
  return (index + itemCount) % itemCount;
}
