// Session controller: a thin state machine around the service API.
//
// It owns no game rules.  It starts sessions, forwards captured inputs at
// window close, and hands every authoritative view to the renderer.
// Disabling rendering entirely changes nothing about outcomes.

import { ApiClient, StartOptions } from "./api.js";
import type { InputEventWire, ServerEvent, SessionView, UploadReceipt } from "./types.js";

export type ViewListener = (view: SessionView) => void;

export class SessionController {
  view: SessionView | null = null;
  stance = "None";
  private listeners: ViewListener[] = [];

  constructor(private api: ApiClient) {}

  onView(listener: ViewListener): void {
    this.listeners.push(listener);
  }

  private setView(view: SessionView): SessionView {
    this.view = view;
    for (const listener of this.listeners) listener(view);
    return view;
  }

  get sessionId(): string {
    if (!this.view) throw new Error("no session started");
    return this.view.session_id;
  }

  async start(playerName: string, options: StartOptions = {}): Promise<SessionView> {
    return this.setView(await this.api.startSession(playerName, options));
  }

  async submitWindow(inputs: InputEventWire[]): Promise<SessionView> {
    return this.setView(await this.api.submitWindow(this.sessionId, inputs, this.stance));
  }

  async allocate(attribute: string): Promise<SessionView> {
    return this.setView(await this.api.allocate(this.sessionId, attribute));
  }

  async retire(): Promise<SessionView> {
    return this.setView(await this.api.retire(this.sessionId));
  }

  async upload(): Promise<UploadReceipt> {
    return this.api.upload(this.sessionId);
  }

  async refresh(): Promise<SessionView> {
    return this.setView(await this.api.getSession(this.sessionId));
  }

  /** Last step's window events (judgements et al) for feedback rendering. */
  lastWindowEvents(): ServerEvent[] {
    return (this.view?.last_events ?? []).filter((e) => e.type === "window");
  }

  /**
   * The press list a flawless player would submit for the pending window:
   * the announced buttons at the announced beat times.  Used by the demo
   * autopilot and the scripted end-to-end test.
   */
  perfectInputs(): InputEventWire[] {
    const window = this.view?.window;
    if (!window) return [];
    return window.beat_times_us.map((atUs, slot) => ({
      at_us: atUs,
      button: window.expected[slot] ?? "L",
    }));
  }
}
