// WebSocket client for the session wire protocol.

import { decode, encode, WireMessage } from "./protocol.js";
import { reduce, ViewState } from "./state.js";

export class SessionClient {
  readonly view: ViewState;
  private ws: WebSocket | null = null;
  private role: string;

  constructor(view: ViewState, role: string) {
    this.view = view;
    this.role = role;
  }

  connect(host: string): void {
    const ws = new WebSocket(`ws://${host}`);
    this.ws = ws;
    ws.addEventListener("open", () => {
      ws.send(encode({
        kind: "hello",
        payload: { role: this.role, client: "freefall-frontend" },
        ts_ms: Date.now(),
      }));
    });
    ws.addEventListener("message", (event) => {
      try {
        const msg = decode(String(event.data));
        reduce(this.view, msg, performance.now());
      } catch (err) {
        this.view.events.push(String(err));
      }
    });
    ws.addEventListener("close", () => {
      this.view.connection = "closed";
    });
    ws.addEventListener("error", () => {
      this.view.connection = "closed";
    });
  }

  get connected(): boolean {
    return this.ws !== null && this.ws.readyState === WebSocket.OPEN;
  }

  sendInput(uArms: number, uLegs: number, tsMs: number): void {
    if (!this.connected || this.view.role !== "pilot") return;
    const msg: WireMessage = {
      kind: "input",
      payload: { u_arms: uArms, u_legs: uLegs },
      ts_ms: tsMs,
    };
    this.ws!.send(encode(msg));
  }
}
