import * as THREE from "three";
import { attachPointerCapture } from "./input";
import { MENU_DEADZONE, SceneDoc, StateSample, menuHighlight } from "./protocol";
import { ClientSession, webSocketTransport } from "./session";
import { ViewerScene, buildViewerScene } from "./render";

const params = new URLSearchParams(window.location.search);
const endpoint = params.get("endpoint") ?? "ws://127.0.0.1:8700/session";

const app = document.getElementById("app")!;
const banner = document.getElementById("banner")!;
const status = document.getElementById("status")!;
const menuOverlay = document.getElementById("menu")!;

const renderer = new THREE.WebGLRenderer({ antialias: true });
renderer.setSize(window.innerWidth, window.innerHeight);
app.appendChild(renderer.domElement);

let viewer: ViewerScene | null = null;
let latest: StateSample | null = null;
let sceneDoc: SceneDoc | null = null;

// local mirror of the engine's radial menu state, for the overlay only
let menuOpen = false;
let menuAx = 0;
let menuAy = 0;
const MENU_LABELS = ["Properties", "Copy", "Delete"];

function setBanner(text: string, visible: boolean): void {
  banner.textContent = text;
  banner.style.display = visible ? "block" : "none";
}

function renderMenu(): void {
  if (!menuOpen) {
    menuOverlay.style.display = "none";
    return;
  }
  const highlighted = menuHighlight(menuAx, menuAy, MENU_LABELS.length);
  menuOverlay.style.display = "block";
  menuOverlay.innerHTML = MENU_LABELS.map(
    (label, i) =>
      `<div class="item${i === highlighted ? " hot" : ""}">${label}</div>`,
  ).join("");
}

const session = new ClientSession(
  endpoint,
  {
    onConnected: () => setBanner("", false),
    onDisconnected: () => setBanner("disconnected - click to retry", true),
    onProtocolError: (e) => setBanner(`protocol error: ${e.message}`, true),
    onMessage: (message) => {
      if (message.kind === "scene") {
        sceneDoc = message.scene;
        viewer = buildViewerScene(sceneDoc, window.innerWidth / window.innerHeight);
        status.textContent = `${sceneDoc.nodes.length} nodes`;
      } else if (message.kind === "state") {
        latest = message.sample;
        viewer?.update(latest);
        status.textContent =
          `${sceneDoc?.nodes.length ?? 0} nodes | ${latest.mode}` +
          ` | depth ${latest.depth.toFixed(2)} m` +
          (latest.hovered ? ` | ${latest.hovered}` : "");
        if (latest.action) {
          setBanner(`action: ${latest.action}`, true);
          setTimeout(() => setBanner("", false), 1200);
        }
      } else {
        setBanner(message.message, true);
      }
    },
  },
  webSocketTransport,
);
session.connect();

banner.addEventListener("click", () => {
  if (session.state === "disconnected") session.connect();
});

attachPointerCapture(app, document, (t, event) => {
  if (event.kind === "button" && event.button === "RIGHT") {
    if (event.pressed) {
      menuOpen = true;
      menuAx = 0;
      menuAy = 0;
    } else {
      menuOpen = false;
    }
    renderMenu();
  } else if (event.kind === "delta" && menuOpen) {
    menuAx += event.dx;
    menuAy += event.dy;
    renderMenu();
  }
  session.sendEvent(t, event);
});

window.addEventListener("resize", () => {
  renderer.setSize(window.innerWidth, window.innerHeight);
  if (viewer) {
    viewer.camera.aspect = window.innerWidth / window.innerHeight;
    viewer.camera.updateProjectionMatrix();
  }
});

function frame(): void {
  requestAnimationFrame(frame);
  if (viewer) renderer.render(viewer.scene, viewer.camera);
}
frame();
