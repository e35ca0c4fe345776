// Thin fetch wrappers over the service API.  Every mutation returns the
// server's authoritative view; errors carry the server's error tag.

import type {
  BlockWire,
  CharacterRecordWire,
  InputEventWire,
  SessionView,
  UploadReceipt,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    public status: number,
    public tag: string,
    detail: string,
  ) {
    super(`${tag}: ${detail}`);
  }
}

async function parse<T>(response: Response): Promise<T> {
  const body = await response.json();
  if (!response.ok) {
    throw new ApiError(response.status, body.error ?? "HttpError", body.detail ?? "");
  }
  return body as T;
}

export interface StartOptions {
  seed?: number;
  enemyBoost?: { room: number; level: number };
  pFetchPercent?: number;
  offsetUs?: number;
}

export class ApiClient {
  constructor(public baseUrl: string) {}

  private url(path: string): string {
    return `${this.baseUrl}${path}`;
  }

  async serverTimeUs(): Promise<number> {
    const body = await parse<{ server_us: number }>(await fetch(this.url("/time")));
    return body.server_us;
  }

  async startSession(playerName: string, options: StartOptions = {}): Promise<SessionView> {
    const payload: Record<string, unknown> = { player_name: playerName };
    if (options.seed !== undefined) payload.seed = options.seed;
    if (options.enemyBoost) payload.enemy_boost = options.enemyBoost;
    if (options.pFetchPercent !== undefined) payload.p_fetch_percent = options.pFetchPercent;
    if (options.offsetUs !== undefined) payload.offset_us = options.offsetUs;
    return parse<SessionView>(
      await fetch(this.url("/sessions"), {
        method: "POST",
        headers: { "content-type": "application/json" },
        body: JSON.stringify(payload),
      }),
    );
  }

  async getSession(sessionId: string): Promise<SessionView> {
    return parse<SessionView>(await fetch(this.url(`/sessions/${sessionId}`)));
  }

  async submitWindow(
    sessionId: string,
    inputs: InputEventWire[],
    stance = "None",
  ): Promise<SessionView> {
    return parse<SessionView>(
      await fetch(this.url(`/sessions/${sessionId}/window`), {
        method: "POST",
        headers: { "content-type": "application/json" },
        body: JSON.stringify({ inputs, stance }),
      }),
    );
  }

  async allocate(sessionId: string, attribute: string): Promise<SessionView> {
    return parse<SessionView>(
      await fetch(this.url(`/sessions/${sessionId}/allocate`), {
        method: "POST",
        headers: { "content-type": "application/json" },
        body: JSON.stringify({ attribute }),
      }),
    );
  }

  async retire(sessionId: string): Promise<SessionView> {
    return parse<SessionView>(
      await fetch(this.url(`/sessions/${sessionId}/retire`), { method: "POST" }),
    );
  }

  async upload(sessionId: string): Promise<UploadReceipt> {
    return parse<UploadReceipt>(
      await fetch(this.url(`/sessions/${sessionId}/upload`), { method: "POST" }),
    );
  }

  async sessionLog(sessionId: string): Promise<{
    session_id: string;
    player: string;
    seed: number;
    origin_ms: number;
    steps: unknown[];
    events: unknown[];
  }> {
    return parse(await fetch(this.url(`/sessions/${sessionId}/log`)));
  }

  async blocks(from = 0): Promise<{ chain_id: number; blocks: BlockWire[] }> {
    return parse(await fetch(this.url(`/chain/blocks?from=${from}`)));
  }

  async characters(): Promise<{ characters: CharacterRecordWire[] }> {
    return parse(await fetch(this.url("/chain/characters")));
  }

  async character(characterId: number): Promise<CharacterRecordWire> {
    return parse(await fetch(this.url(`/chain/characters/${characterId}`)));
  }

  async stateDigest(): Promise<string> {
    const body = await parse<{ digest: string }>(
      await fetch(this.url("/chain/state-digest")),
    );
    return body.digest;
  }

  streamUrl(sessionId: string): string {
    const ws = this.baseUrl.replace(/^http/, "ws");
    return `${ws}/sessions/${sessionId}/stream`;
  }
}
