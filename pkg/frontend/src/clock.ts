// Client/server clock alignment.
//
// One handshake at startup: five round-trips, offset estimated per ping as
// server_time - client_midpoint, and the median taken so one slow ping
// cannot skew the session.  After that every local timestamp converts to
// server microseconds with a pure addition.

export function median(values: number[]): number {
  if (values.length === 0) throw new Error("median of empty list");
  const sorted = [...values].sort((a, b) => a - b);
  const mid = Math.floor(sorted.length / 2);
  if (sorted.length % 2 === 1) return sorted[mid]!;
  return Math.floor((sorted[mid - 1]! + sorted[mid]!) / 2);
}

export function offsetFromPings(
  pings: { sentUs: number; receivedUs: number; serverUs: number }[],
): number {
  const estimates = pings.map((p) => p.serverUs - Math.floor((p.sentUs + p.receivedUs) / 2));
  return median(estimates);
}

export class ServerClock {
  constructor(
    public offsetUs = 0,
    private localNowUs: () => number = () => Math.round(performance.now() * 1000),
  ) {}

  async handshake(fetchServerUs: () => Promise<number>, rounds = 5): Promise<number> {
    const pings = [];
    for (let i = 0; i < rounds; i++) {
      const sentUs = this.localNowUs();
      const serverUs = await fetchServerUs();
      const receivedUs = this.localNowUs();
      pings.push({ sentUs, receivedUs, serverUs });
    }
    this.offsetUs = offsetFromPings(pings);
    return this.offsetUs;
  }

  nowServerUs(): number {
    return this.localNowUs() + this.offsetUs;
  }

  toServerUs(localUs: number): number {
    return localUs + this.offsetUs;
  }
}
