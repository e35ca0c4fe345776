// Keyboard capture for one judgement window.
//
// Arrow keys map to the four drum buttons (remappable in settings).  Key
// events are timestamped locally, re-based to server time through the
// negotiated clock offset, and submitted when the window closes.  Late
// keys are kept: the server is the judge, not us.

import type { InputEventWire } from "./types.js";

export const DEFAULT_KEYMAP: Record<string, string> = {
  ArrowLeft: "L",
  ArrowDown: "D",
  ArrowUp: "U",
  ArrowRight: "R",
};

export class WindowCapture {
  private events: InputEventWire[] = [];

  constructor(
    private toServerUs: (localUs: number) => number,
    public keymap: Record<string, string> = { ...DEFAULT_KEYMAP },
  ) {}

  /** Feed one key press; returns the mapped button or null if unmapped. */
  feed(key: string, localUs: number): string | null {
    const button = this.keymap[key];
    if (button === undefined) return null;
    this.events.push({ at_us: this.toServerUs(localUs), button });
    return button;
  }

  /** Events collected so far, time-sorted, without clearing. */
  peek(): InputEventWire[] {
    return [...this.events].sort((a, b) => a.at_us - b.at_us);
  }

  /** Sorted events for submission; clears the buffer for the next window. */
  drain(): InputEventWire[] {
    const out = this.peek();
    this.events = [];
    return out;
  }

  get count(): number {
    return this.events.length;
  }
}
