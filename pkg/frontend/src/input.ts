// Pointer-lock input capture. Raw movement deltas, buttons, and wheel ticks
// become engine events in occurrence order; nothing is coalesced or predicted.

import { ClientEvent } from "./protocol";

export type EventSink = (t: number, event: ClientEvent) => void;

const BUTTONS: Record<number, "LEFT" | "RIGHT" | "MIDDLE"> = {
  0: "LEFT",
  1: "MIDDLE",
  2: "RIGHT",
};

/** One wheel notch is ~100 units of deltaY in most browsers; scrolling up
 * (negative deltaY) reels the grabbed object in, matching positive ticks. */
export function wheelTicks(deltaY: number): number {
  if (deltaY === 0) return 0;
  return Math.sign(-deltaY) * Math.max(1, Math.round(Math.abs(deltaY) / 100));
}

export interface CaptureHandle {
  readonly locked: () => boolean;
  dispose(): void;
}

export function attachPointerCapture(
  element: HTMLElement,
  doc: Document,
  sink: EventSink,
  now: () => number = () => performance.now(),
): CaptureHandle {
  const isLocked = () => doc.pointerLockElement === element;

  const onClick = () => {
    if (!isLocked()) element.requestPointerLock();
  };
  const onMove = (ev: MouseEvent) => {
    if (!isLocked()) return;
    if (ev.movementX !== 0 || ev.movementY !== 0) {
      sink(now(), { kind: "delta", dx: ev.movementX, dy: ev.movementY });
    }
  };
  const onButton = (pressed: boolean) => (ev: MouseEvent) => {
    if (!isLocked()) return;
    const button = BUTTONS[ev.button];
    if (button !== undefined) {
      ev.preventDefault();
      sink(now(), { kind: "button", button, pressed });
    }
  };
  const onDown = onButton(true);
  const onUp = onButton(false);
  const onWheel = (ev: WheelEvent) => {
    if (!isLocked()) return;
    ev.preventDefault();
    const ticks = wheelTicks(ev.deltaY);
    if (ticks !== 0) sink(now(), { kind: "scroll", ticks });
  };
  const onContextMenu = (ev: Event) => {
    if (isLocked()) ev.preventDefault();
  };

  element.addEventListener("click", onClick);
  doc.addEventListener("mousemove", onMove);
  doc.addEventListener("mousedown", onDown);
  doc.addEventListener("mouseup", onUp);
  doc.addEventListener("wheel", onWheel, { passive: false });
  doc.addEventListener("contextmenu", onContextMenu);

  return {
    locked: isLocked,
    dispose() {
      element.removeEventListener("click", onClick);
      doc.removeEventListener("mousemove", onMove);
      doc.removeEventListener("mousedown", onDown);
      doc.removeEventListener("mouseup", onUp);
      doc.removeEventListener("wheel", onWheel);
      doc.removeEventListener("contextmenu", onContextMenu);
    },
  };
}
