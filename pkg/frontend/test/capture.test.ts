import { describe, expect, it } from "vitest";

import { DEFAULT_KEYMAP, WindowCapture } from "../src/capture.js";

describe("window capture", () => {
  it("maps arrow keys to the four drum buttons", () => {
    expect(DEFAULT_KEYMAP).toEqual({
      ArrowLeft: "L",
      ArrowDown: "D",
      ArrowUp: "U",
      ArrowRight: "R",
    });
  });

  it("rebases timestamps by the negotiated offset", () => {
    const capture = new WindowCapture((localUs) => localUs + 1_000_000);
    capture.feed("ArrowLeft", 500);
    expect(capture.peek()).toEqual([{ at_us: 1_000_500, button: "L" }]);
  });

  it("ignores unmapped keys", () => {
    const capture = new WindowCapture((t) => t);
    expect(capture.feed("x", 10)).toBeNull();
    expect(capture.count).toBe(0);
  });

  it("drains sorted events and clears the buffer", () => {
    const capture = new WindowCapture((t) => t);
    capture.feed("ArrowRight", 900);
    capture.feed("ArrowLeft", 100);
    capture.feed("ArrowDown", 500);
    expect(capture.drain().map((e) => e.button)).toEqual(["L", "D", "R"]);
    expect(capture.count).toBe(0);
    expect(capture.drain()).toEqual([]);
  });

  it("supports remapping keys", () => {
    const capture = new WindowCapture((t) => t, { a: "L", s: "D" });
    expect(capture.feed("a", 1)).toBe("L");
    expect(capture.feed("ArrowLeft", 2)).toBeNull();
  });
});
