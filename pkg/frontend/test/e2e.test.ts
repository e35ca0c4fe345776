// @vitest-environment jsdom
//
// Scripted browser session against a real server process:
// perfect play (synthetic key events at the announced beat times) clears
// three rooms, dies to the boosted room-3 enemy, uploads, and the upload
// shows up in the ledger browser.  Finally the submitted inputs are
// replayed offline through the engine CLI and must reproduce the server's
// event log exactly.

import { spawn, spawnSync, type ChildProcess } from "node:child_process";
import { mkdtempSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join, resolve } from "node:path";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { LedgerBrowser } from "../src/ledgerBrowser.js";
import { SessionController } from "../src/session.js";
import type { InputEventWire } from "../src/types.js";

const PYTHON = process.env.RD_PYTHON ?? "python3";
const REPO_ROOT = resolve(__dirname, "../..");
const PORT = 18_000 + (process.pid % 2000);
const BASE_URL = `http://127.0.0.1:${PORT}`;
const SEED = 424_242;
const BOOST = { room: 3, level: 30 };

let server: ChildProcess;
let workDir: string;

async function waitForServer(api: ApiClient, timeoutMs = 30_000): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  for (;;) {
    try {
      await api.serverTimeUs();
      return;
    } catch {
      if (Date.now() > deadline) throw new Error("server did not come up");
      await new Promise((r) => setTimeout(r, 200));
    }
  }
}

beforeAll(async () => {
  workDir = mkdtempSync(join(tmpdir(), "rd-e2e-"));
  server = spawn(
    PYTHON,
    ["-m", "rhythm_dungeon.cli", "serve", "--port", String(PORT), "--chain",
     join(workDir, "chain_0.ndjson")],
    { cwd: REPO_ROOT, stdio: ["ignore", "pipe", "pipe"] },
  );
  await waitForServer(new ApiClient(BASE_URL));
});

afterAll(() => {
  server?.kill("SIGTERM");
});

describe("scripted end-to-end play", () => {
  it("clears 3 rooms, dies to the boosted enemy, uploads, and replays offline", async () => {
    const api = new ApiClient(BASE_URL);
    const controller = new SessionController(api);

    let view = await controller.start("scripted", { seed: SEED, enemyBoost: BOOST });
    expect(view.phase).toBe("InBattle");
    const originMs = view.origin_ms;

    const submitted: InputEventWire[] = [];
    let windows = 0;
    while (view.phase === "InBattle") {
      const inputs = controller.perfectInputs();
      submitted.push(...inputs);
      view = await controller.submitWindow(inputs);
      windows += 1;
      expect(windows).toBeLessThan(200);
    }

    // Three rooms cleared, then the boosted enemy ends the run.
    expect(view.phase).toBe("Dead");
    expect(view.room_index).toBe(3);
    expect(view.tally).toEqual({ early: 0, late: 0, wrong_button: 0, miss: 0 });

    const receipt = await controller.upload();
    expect(receipt.rejected).toBeNull();
    expect(receipt.character_id).toBe(0);

    // The upload is visible through the credential-free browse endpoints...
    const characters = await api.characters();
    expect(characters.characters).toHaveLength(1);
    const record = characters.characters[0]!;
    expect(record.character.name).toBe("scripted");
    expect(record.character.weakness).toBe("None");
    expect(record.origin_game).toBe("RhythmDungeon");

    // ...and in the rendered ledger browser pane.
    const pane = document.createElement("div");
    await new LedgerBrowser(api, pane).render();
    expect(pane.textContent).toContain("scripted");
    expect(pane.textContent).toContain("UploadCharacter");
    expect(pane.textContent).toContain(receipt.block_digest.slice(0, 16));

    // Offline replay: the submitted inputs driven through the engine CLI
    // reproduce the server's event log byte for byte.
    const log = await api.sessionLog(controller.sessionId);
    const tracePath = join(workDir, "trace.json");
    writeFileSync(tracePath, JSON.stringify(submitted));
    const replay = spawnSync(
      PYTHON,
      [
        "-m", "rhythm_dungeon.cli", "play",
        "--trace", tracePath,
        "--seed", String(SEED),
        "--name", "scripted",
        "--origin-ms", String(originMs),
        "--boost-room", String(BOOST.room),
        "--boost-level", String(BOOST.level),
      ],
      { cwd: REPO_ROOT, encoding: "utf-8" },
    );
    expect(replay.status).toBe(0);
    const offlineEvents = replay.stdout
      .split("\n")
      .filter((line) => line.length > 0)
      .map((line) => JSON.parse(line));
    expect(offlineEvents).toEqual(log.events);
  });
});
