// Synthesized metronome clicks scheduled at the announced beat times.
// No audio assets: a short decaying oscillator blip per beat, with cue-bar
// beats pitched lower than echo-bar beats.  A user-adjustable latency
// offset compensates for output delay.

import { metronomeTimesUs } from "./schedule.js";
import type { WindowView } from "./types.js";

export class Metronome {
  latencyOffsetUs = 0;
  enabled = true;
  private scheduled = new Set<number>();

  constructor(
    private context: AudioContext,
    private serverNowUs: () => number,
  ) {}

  private click(whenSeconds: number, frequency: number): void {
    const oscillator = this.context.createOscillator();
    const gain = this.context.createGain();
    oscillator.type = "square";
    oscillator.frequency.value = frequency;
    gain.gain.setValueAtTime(0.25, whenSeconds);
    gain.gain.exponentialRampToValueAtTime(0.001, whenSeconds + 0.05);
    oscillator.connect(gain).connect(this.context.destination);
    oscillator.start(whenSeconds);
    oscillator.stop(whenSeconds + 0.06);
  }

  /** Schedule every not-yet-scheduled beat of the window. */
  scheduleWindow(view: WindowView): void {
    if (!this.enabled) return;
    const nowUs = this.serverNowUs();
    const nowSeconds = this.context.currentTime;
    const times = metronomeTimesUs(view, this.latencyOffsetUs);
    times.forEach((atUs, index) => {
      if (this.scheduled.has(atUs) || atUs < nowUs) return;
      this.scheduled.add(atUs);
      const inSeconds = nowSeconds + (atUs - nowUs) / 1_000_000;
      this.click(inSeconds, index < 4 ? 440 : 880);
    });
    if (this.scheduled.size > 256) {
      for (const t of [...this.scheduled].slice(0, 128)) this.scheduled.delete(t);
    }
  }
}
