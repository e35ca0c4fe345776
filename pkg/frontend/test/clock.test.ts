import { describe, expect, it } from "vitest";

import { ServerClock, median, offsetFromPings } from "../src/clock.js";

describe("clock offset handshake", () => {
  it("computes medians", () => {
    expect(median([3])).toBe(3);
    expect(median([5, 1, 3])).toBe(3);
    expect(median([4, 1, 3, 2])).toBe(2);
  });

  it("estimates the offset per ping from the round-trip midpoint", () => {
    const offset = offsetFromPings([
      { sentUs: 0, receivedUs: 100, serverUs: 1_000_050 },
      { sentUs: 200, receivedUs: 300, serverUs: 1_000_250 },
      { sentUs: 400, receivedUs: 520, serverUs: 1_000_460 },
    ]);
    expect(offset).toBe(1_000_000);
  });

  it("a single slow ping cannot skew the median", () => {
    const offset = offsetFromPings([
      { sentUs: 0, receivedUs: 100, serverUs: 1_000_050 },
      { sentUs: 200, receivedUs: 9_000_000, serverUs: 1_000_250 }, // stalled
      { sentUs: 400, receivedUs: 520, serverUs: 1_000_460 },
      { sentUs: 600, receivedUs: 700, serverUs: 1_000_650 },
      { sentUs: 800, receivedUs: 900, serverUs: 1_000_850 },
    ]);
    expect(offset).toBe(1_000_000);
  });

  it("performs a five-round handshake and rebases local time", async () => {
    let localUs = 0;
    const clock = new ServerClock(0, () => (localUs += 50));
    const serverStart = 7_000_000;
    let calls = 0;
    await clock.handshake(async () => serverStart + ++calls * 100);
    expect(calls).toBe(5);
    expect(clock.toServerUs(1000)).toBe(1000 + clock.offsetUs);
    expect(clock.offsetUs).toBeGreaterThan(serverStart - 1000);
  });
});
