// Browser entry point: wires clock handshake, key capture, rendering,
// the metronome and the ledger browser together.  All game outcomes come
// from the server; this file only displays them and forwards inputs.

import { ApiClient, ApiError } from "./api.js";
import { WindowCapture } from "./capture.js";
import { ServerClock } from "./clock.js";
import { clear, h } from "./dom.js";
import { LedgerBrowser } from "./ledgerBrowser.js";
import { Metronome } from "./metronome.js";
import { beatMarkers, playheadPosition, timeToDeadlineUs } from "./schedule.js";
import { SessionController } from "./session.js";
import type { JudgementWire, ServerEvent, SessionView, StreamAnnouncement } from "./types.js";

const api = new ApiClient(window.location.origin);
const clock = new ServerClock();
const controller = new SessionController(api);
const capture = new WindowCapture((localUs) => clock.toServerUs(localUs));

let metronome: Metronome | null = null;
let submitTimer: number | null = null;
let stream: WebSocket | null = null;

const el = (id: string) => document.getElementById(id) as HTMLElement;

function healthBar(current: number, max: number, cssClass: string): HTMLElement {
  const percent = max > 0 ? Math.round((100 * current) / max) : 0;
  return h("div", { class: "health-outer" }, [
    h("div", {
      class: `health-inner ${cssClass}`,
      style: `width:${percent}%`,
    }),
    h("span", { class: "health-label" }, [`${current}/${max}`]),
  ]);
}

function characterPanel(view: SessionView): HTMLElement {
  const c = view.character;
  const rows: [string, string][] = [
    ["career", c.career],
    ["level", `${c.level} (xp ${c.xp})`],
    ["strength", String(c.strength)],
    ["armor", String(c.armor)],
    ["luck", String(c.luck)],
    ["vitality", String(c.vitality)],
    ["weakness", c.weakness],
  ];
  const panel = h("div", {}, [
    h("h3", {}, [`${c.name}`]),
    healthBar(view.battle?.player_health ?? c.max_health, c.max_health, "player"),
    h("table", {}, rows.map(([k, v]) => h("tr", {}, [h("td", {}, [k]), h("td", {}, [v])]))),
  ]);
  if (c.unspent_skill_points > 0 && (view.phase === "InBattle" || view.phase === "Exploring")) {
    const buttons = ["strength", "armor", "luck", "vitality"].map((attr) =>
      h("button", { class: "allocate", "data-attr": attr }, [`+1 ${attr}`]),
    );
    panel.append(
      h("p", {}, [`${c.unspent_skill_points} skill points to spend:`]),
      h("div", {}, buttons),
    );
    buttons.forEach((button) =>
      button.addEventListener("click", () =>
        controller.allocate(button.getAttribute("data-attr")!).catch(showError),
      ),
    );
  }
  return panel;
}

function enemyPanel(view: SessionView): HTMLElement {
  if (!view.battle) return h("div", {}, [h("p", {}, ["No enemy - exploring."])]);
  const enemy = view.battle.enemy;
  return h("div", {}, [
    h("h3", {}, [`${enemy.name} (level ${enemy.level})`]),
    healthBar(view.battle.enemy_health, enemy.max_health, "enemy"),
    h("p", {}, [`career ${enemy.career}, weakness ${enemy.weakness}`]),
  ]);
}

function judgementMarks(events: ServerEvent[]): HTMLElement {
  const windowEvent = events.find((e) => e.type === "window");
  if (!windowEvent) return h("div", {});
  const judgements = windowEvent.judgements as JudgementWire[];
  const action = windowEvent.action as string;
  return h("div", { class: "judgements" }, [
    ...judgements.map((j) =>
      h("span", { class: `mark mark-${j.outcome.toLowerCase()}` }, [j.outcome]),
    ),
    h("span", { class: `action action-${action.toLowerCase()}` }, [action]),
  ]);
}

function tallyPanel(view: SessionView): HTMLElement {
  const t = view.tally;
  return h("p", { class: "tally" }, [
    `mistakes - early ${t.early}, late ${t.late}, wrong ${t.wrong_button}, miss ${t.miss}`,
  ]);
}

function renderTimeline(view: SessionView): void {
  const lane = clear(el("timeline"));
  if (!view.window) return;
  for (const marker of beatMarkers(view.window)) {
    const cue = marker.beatIndex < 4;
    lane.append(
      h(
        "div",
        {
          class: `beat ${cue ? "cue" : "echo"}`,
          style: `left:${(marker.position * 100).toFixed(2)}%`,
        },
        [cue ? marker.button.toLowerCase() : marker.button],
      ),
    );
  }
  lane.append(h("div", { id: "playhead" }));
}

function animatePlayhead(): void {
  const view = controller.view;
  const playhead = document.getElementById("playhead");
  if (view?.window && playhead) {
    const position = playheadPosition(view.window, clock.nowServerUs());
    playhead.style.left = `${(position * 100).toFixed(2)}%`;
  }
  requestAnimationFrame(animatePlayhead);
}

function showError(error: unknown): void {
  el("status").textContent = String(error);
}

function scheduleSubmission(view: SessionView): void {
  if (submitTimer !== null) window.clearTimeout(submitTimer);
  if (view.phase !== "InBattle" || !view.window) return;
  const deadlineUs = view.window.deadline_us;
  const waitMs = timeToDeadlineUs(view.window, clock.nowServerUs()) / 1000 + 10;
  submitTimer = window.setTimeout(async () => {
    // Late keys are submitted as-is; if the server declares the window
    // closed, surface it as a missed window and resubmit the in-time part.
    const events = capture.drain();
    try {
      await controller.submitWindow(events);
    } catch (error) {
      if (error instanceof ApiError && error.tag === "WindowClosed") {
        el("status").textContent = "window closed - late keys dropped";
        await controller.submitWindow(events.filter((e) => e.at_us <= deadlineUs)).catch(showError);
      } else {
        showError(error);
      }
    }
  }, waitMs);
}

function render(view: SessionView): void {
  el("phase").textContent = `${view.phase} - room ${view.room_index}`;
  clear(el("player-panel")).append(characterPanel(view));
  clear(el("enemy-panel")).append(enemyPanel(view));
  clear(el("feedback")).append(judgementMarks(view.last_events), tallyPanel(view));
  renderTimeline(view);
  if (view.window && metronome) metronome.scheduleWindow(view.window);
  scheduleSubmission(view);
  const finished = view.phase === "Dead" || view.phase === "Retired";
  (el("dialog-finish") as HTMLDialogElement).open = finished && !uploadDone;
  el("finish-title").textContent =
    view.phase === "Dead" ? `${view.character.name} fell in room ${view.room_index}.` : "Retired.";
}

let uploadDone = false;

async function startPlay(): Promise<void> {
  uploadDone = false;
  const name = (el("player-name") as HTMLInputElement).value || "player";
  await clock.handshake(() => api.serverTimeUs());
  el("offset").textContent = `clock offset ${clock.offsetUs} us`;
  if (!metronome) {
    metronome = new Metronome(new AudioContext(), () => clock.nowServerUs());
  }
  const view = await controller.start(name, { offsetUs: clock.offsetUs });
  openStream(view.session_id);
}

function openStream(sessionId: string): void {
  stream?.close();
  try {
    stream = new WebSocket(api.streamUrl(sessionId));
    stream.onmessage = (message) => {
      const announcement = JSON.parse(message.data) as StreamAnnouncement;
      if (announcement.bpm) el("bpm").textContent = `${announcement.bpm} bpm`;
    };
  } catch {
    stream = null; // the view already carries the schedule; the stream is advisory
  }
}

function wireControls(): void {
  el("start").addEventListener("click", () => startPlay().catch(showError));
  el("retire").addEventListener("click", () => controller.retire().catch(showError));
  el("upload").addEventListener("click", async () => {
    try {
      const receipt = await controller.upload();
      uploadDone = true;
      (el("dialog-finish") as HTMLDialogElement).open = false;
      el("status").textContent = `uploaded as character #${receipt.character_id}`;
      await ledgerBrowser.render();
    } catch (error) {
      showError(error);
    }
  });
  el("discard").addEventListener("click", () => {
    uploadDone = true;
    (el("dialog-finish") as HTMLDialogElement).open = false;
  });
  (el("stance") as HTMLSelectElement).addEventListener("change", (event) => {
    controller.stance = (event.target as HTMLSelectElement).value;
  });
  (el("latency") as HTMLInputElement).addEventListener("input", (event) => {
    const ms = Number((event.target as HTMLInputElement).value);
    if (metronome) metronome.latencyOffsetUs = ms * 1000;
    el("latency-label").textContent = `${ms} ms`;
  });
  el("refresh-ledger").addEventListener("click", () => ledgerBrowser.render().catch(showError));
  window.addEventListener("keydown", (event) => {
    if (controller.view?.phase !== "InBattle") return;
    if (event.key in capture.keymap) {
      event.preventDefault();
      const button = capture.feed(event.key, Math.round(performance.now() * 1000));
      if (button) el("last-key").textContent = button;
    }
  });
  // Settings pane: remap a drum button by focusing its box and pressing a key.
  document.querySelectorAll<HTMLInputElement>(".keymap-box").forEach((box) => {
    box.addEventListener("keydown", (event) => {
      event.preventDefault();
      const button = box.getAttribute("data-button")!;
      for (const [key, mapped] of Object.entries(capture.keymap)) {
        if (mapped === button) delete capture.keymap[key];
      }
      capture.keymap[event.key] = button;
      box.value = event.key;
    });
  });
}

const ledgerBrowser = new LedgerBrowser(api, el("ledger"));

wireControls();
ledgerBrowser.render().catch(showError);
controller.onView(render);
requestAnimationFrame(animatePlayhead);
export { controller, capture, clock };
