// Client session: owns the socket, keeps event order, and hands parsed
// messages to the UI. The transport is injectable so tests can drive the
// session without a network.

import {
  ClientEvent,
  ServerMessage,
  formatEventLine,
  parseServerMessage,
} from "./protocol";

export interface Transport {
  send(text: string): void;
  close(): void;
  onMessage(handler: (text: string) => void): void;
  onOpen(handler: () => void): void;
  onClose(handler: () => void): void;
}

export type TransportFactory = (url: string) => Transport;

export interface SessionHandlers {
  onMessage(message: ServerMessage): void;
  onConnected(): void;
  onDisconnected(): void;
  onProtocolError(error: Error): void;
}

export type ConnectionState = "connecting" | "connected" | "disconnected";

export class ClientSession {
  private transport: Transport | null = null;
  private lastT = -1;
  state: ConnectionState = "disconnected";

  constructor(
    private readonly url: string,
    private readonly handlers: SessionHandlers,
    private readonly makeTransport: TransportFactory,
  ) {}

  connect(): void {
    this.state = "connecting";
    this.lastT = -1;
    const transport = this.makeTransport(this.url);
    this.transport = transport;
    transport.onOpen(() => {
      this.state = "connected";
      transport.send("HELLO");
      this.handlers.onConnected();
    });
    transport.onClose(() => {
      this.state = "disconnected";
      this.transport = null;
      this.handlers.onDisconnected();
    });
    transport.onMessage((text) => {
      try {
        this.handlers.onMessage(parseServerMessage(text));
      } catch (e) {
        this.handlers.onProtocolError(e as Error);
      }
    });
  }

  /** Send one input event; timestamps are clamped to stay monotone. */
  sendEvent(t: number, event: ClientEvent): void {
    if (this.state !== "connected" || this.transport === null) return;
    const stamped = Math.max(Math.round(t), this.lastT < 0 ? 0 : this.lastT);
    this.lastT = stamped;
    this.transport.send("EVT " + formatEventLine(stamped, event));
  }

  disconnect(): void {
    if (this.transport !== null) {
      this.transport.send("BYE");
      this.transport.close();
    }
  }
}

/** Browser WebSocket adapter. */
export function webSocketTransport(url: string): Transport {
  const ws = new WebSocket(url);
  return {
    send: (text) => ws.send(text),
    close: () => ws.close(),
    onMessage: (h) => {
      ws.onmessage = (ev) => h(String(ev.data));
    },
    onOpen: (h) => {
      ws.onopen = () => h();
    },
    onClose: (h) => {
      ws.onclose = () => h();
    },
  };
}
