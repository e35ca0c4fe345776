// Pure timeline math for rendering and scheduling against a window view.
// All inputs are server-time microseconds from the announced schedule.

import type { WindowView } from "./types.js";

export interface BeatMarker {
  beatIndex: number;
  atUs: number;
  button: string;
  /** 0..1 position across the full window span (cue bar + echo bar). */
  position: number;
}

export function windowSpanUs(view: WindowView): { startUs: number; endUs: number } {
  return { startUs: view.start_us, endUs: view.deadline_us };
}

export function beatMarkers(view: WindowView): BeatMarker[] {
  const { startUs, endUs } = windowSpanUs(view);
  const span = endUs - startUs;
  const markers: BeatMarker[] = [];
  view.cue_times_us.forEach((atUs, i) => {
    markers.push({
      beatIndex: i,
      atUs,
      button: view.expected[i] ?? "?",
      position: (atUs - startUs) / span,
    });
  });
  view.beat_times_us.forEach((atUs, i) => {
    markers.push({
      beatIndex: 4 + i,
      atUs,
      button: view.expected[i] ?? "?",
      position: (atUs - startUs) / span,
    });
  });
  return markers;
}

/** 0..1 playhead position for an animation frame at server time nowUs. */
export function playheadPosition(view: WindowView, nowUs: number): number {
  const { startUs, endUs } = windowSpanUs(view);
  if (nowUs <= startUs) return 0;
  if (nowUs >= endUs) return 1;
  return (nowUs - startUs) / (endUs - startUs);
}

export function windowClosed(view: WindowView, nowUs: number): boolean {
  return nowUs > view.deadline_us;
}

/** Microseconds until the submission deadline (never negative). */
export function timeToDeadlineUs(view: WindowView, nowUs: number): number {
  return Math.max(0, view.deadline_us - nowUs);
}

/** Beat period implied by the announced schedule (exact integer). */
export function beatPeriodUs(view: WindowView): number {
  return Math.floor(60_000_000 / view.bpm);
}

/** Click times for the metronome across the whole window, cue bar included. */
export function metronomeTimesUs(view: WindowView, latencyOffsetUs = 0): number[] {
  return [...view.cue_times_us, ...view.beat_times_us].map((t) => t + latencyOffsetUs);
}
