// three.js rendering of the blended scene and the engine-driven cursor.
// Every visible pose is a direct render of the latest STATE sample.

import * as THREE from "three";
import { ConvexGeometry } from "three/examples/jsm/geometries/ConvexGeometry.js";
import { SceneDoc, SceneNode, StateSample } from "./protocol";

const REAL_OPACITY = 0.35;
const HOVER_COLOR = 0xffc857;
const SELECT_COLOR = 0x5ec8ff;

export interface ViewerScene {
  scene: THREE.Scene;
  camera: THREE.PerspectiveCamera;
  nodeMeshes: Map<string, THREE.Mesh>;
  cursor: THREE.Group;
  update(sample: StateSample): void;
}

function nodeGeometry(node: SceneNode): THREE.BufferGeometry {
  const g = node.geometry;
  if (g.kind === "mesh") {
    const geometry = new THREE.BufferGeometry();
    geometry.setAttribute("position", new THREE.Float32BufferAttribute(g.vertices.flat(), 3));
    geometry.setIndex(g.triangles.flat());
    if (g.normals) {
      geometry.setAttribute("normal", new THREE.Float32BufferAttribute(g.normals.flat(), 3));
    } else {
      geometry.computeVertexNormals();
    }
    return geometry;
  }
  if (g.kind === "hull") {
    return new ConvexGeometry(g.points.map((p) => new THREE.Vector3(...p)));
  }
  return new THREE.PlaneGeometry(g.w, g.h); // front face is local +z
}

function labelSprite(text: string): THREE.Sprite {
  const canvas = document.createElement("canvas");
  canvas.width = 256;
  canvas.height = 64;
  const ctx = canvas.getContext("2d")!;
  ctx.fillStyle = "rgba(0,0,0,0.6)";
  ctx.fillRect(0, 0, canvas.width, canvas.height);
  ctx.fillStyle = "#fff";
  ctx.font = "28px sans-serif";
  ctx.textAlign = "center";
  ctx.textBaseline = "middle";
  ctx.fillText(text, canvas.width / 2, canvas.height / 2);
  const sprite = new THREE.Sprite(
    new THREE.SpriteMaterial({ map: new THREE.CanvasTexture(canvas), depthTest: false }),
  );
  sprite.scale.set(0.5, 0.125, 1);
  return sprite;
}

function buildNodeMesh(node: SceneNode): THREE.Mesh {
  const isPanel = node.geometry.kind === "panel";
  const material = new THREE.MeshStandardMaterial({
    color: isPanel ? 0xdde6f0 : node.origin === "real" ? 0x8899aa : 0x7fae7f,
    transparent: node.origin === "real",
    opacity: node.origin === "real" ? REAL_OPACITY : 1.0,
    side: isPanel ? THREE.FrontSide : THREE.DoubleSide,
  });
  const mesh = new THREE.Mesh(nodeGeometry(node), material);
  mesh.position.set(...node.transform.t);
  mesh.quaternion.set(...node.transform.r);
  mesh.scale.set(...node.transform.s);
  mesh.name = node.id;
  if (node.origin === "real") {
    const label = labelSprite(node.label.className);
    label.position.set(0, 0.4, 0);
    mesh.add(label);
  }
  return mesh;
}

function buildCursor(): THREE.Group {
  const group = new THREE.Group();
  const disc = new THREE.Mesh(
    new THREE.CircleGeometry(0.035, 32),
    new THREE.MeshBasicMaterial({ color: 0xff4060, depthTest: false, side: THREE.DoubleSide }),
  );
  disc.name = "disc";
  const ring = new THREE.Mesh(
    new THREE.RingGeometry(0.02, 0.035, 32),
    new THREE.MeshBasicMaterial({ color: 0xff8040, depthTest: false, side: THREE.DoubleSide }),
  );
  ring.name = "ring";
  group.add(disc, ring);
  group.renderOrder = 10;
  return group;
}

export function buildViewerScene(doc: SceneDoc, aspect: number): ViewerScene {
  const scene = new THREE.Scene();
  scene.background = new THREE.Color(0x101418);
  scene.add(new THREE.AmbientLight(0xffffff, 0.6));
  const sun = new THREE.DirectionalLight(0xffffff, 1.2);
  sun.position.set(2, 4, 1);
  scene.add(sun);

  const nodeMeshes = new Map<string, THREE.Mesh>();
  for (const node of doc.nodes) {
    const mesh = buildNodeMesh(node);
    nodeMeshes.set(node.id, mesh);
    scene.add(mesh);
  }

  const camera = new THREE.PerspectiveCamera(60, aspect, 0.01, 200);
  camera.position.set(...doc.view.position);
  camera.up.set(...doc.view.up);
  const target = new THREE.Vector3(...doc.view.position).add(new THREE.Vector3(...doc.view.forward));
  camera.lookAt(target);

  const cursor = buildCursor();
  scene.add(cursor);

  const baseColors = new Map<string, number>();
  for (const [id, mesh] of nodeMeshes) {
    baseColors.set(id, (mesh.material as THREE.MeshStandardMaterial).color.getHex());
  }

  const update = (sample: StateSample): void => {
    cursor.position.set(...sample.position);
    const disc = cursor.getObjectByName("disc")!;
    const ring = cursor.getObjectByName("ring")!;
    disc.visible = sample.mode !== "VOID";
    ring.visible = sample.mode === "VOID";
    if (sample.mode === "VOID") {
      cursor.lookAt(camera.position);
    } else {
      // orient the disc along the surface / panel normal: approximate with
      // the camera-to-point direction when the normal is not in the sample
      cursor.lookAt(camera.position);
    }
    for (const [id, mesh] of nodeMeshes) {
      const material = mesh.material as THREE.MeshStandardMaterial;
      if (sample.selection.includes(id)) material.color.setHex(SELECT_COLOR);
      else if (sample.hovered === id) material.color.setHex(HOVER_COLOR);
      else material.color.setHex(baseColors.get(id)!);
    }
  };

  return { scene, camera, nodeMeshes, cursor, update };
}
