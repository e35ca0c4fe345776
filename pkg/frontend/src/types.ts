// Wire types mirroring the server's canonical JSON views.  The client
// renders these verbatim and never computes outcomes locally.

export type Button = "L" | "D" | "U" | "R";

export interface InputEventWire {
  at_us: number;
  button: string;
}

export interface CharacterView {
  name: string;
  level: number;
  xp: number;
  strength: number;
  armor: number;
  luck: number;
  vitality: number;
  weakness: string;
  unspent_skill_points: number;
  career: string;
  max_health: number;
}

export interface JudgementWire {
  outcome: "Hit" | "Early" | "Late" | "WrongButton" | "Miss";
  button: string | null;
  at_us: number | null;
}

export interface TallyWire {
  early: number;
  late: number;
  wrong_button: number;
  miss: number;
}

export interface WindowView {
  window_index: number;
  bpm: number;
  start_us: number;
  deadline_us: number;
  expected: string[];
  beat_times_us: number[];
  cue_times_us: number[];
}

export interface BattleView {
  player_health: number;
  player_charged: boolean;
  player_dodging: boolean;
  enemy: CharacterView;
  enemy_health: number;
}

export interface SessionView {
  session_id: string;
  player: string;
  phase: "Exploring" | "InBattle" | "Dead" | "Retired";
  room_index: number;
  seed: number;
  origin_ms: number;
  character: CharacterView;
  tally: TallyWire;
  battle: BattleView | null;
  window: WindowView | null;
  last_events: ServerEvent[];
}

export interface ServerEvent {
  type: string;
  [key: string]: unknown;
}

export interface UploadReceipt {
  character_id: number | null;
  rejected: string | null;
  block_height: number;
  block_digest: string;
}

export interface CharacterRecordWire {
  character_id: number;
  character: Omit<CharacterView, "career" | "max_health">;
  origin_game: string;
  uploaded_at: number;
  alive_in_store: boolean;
}

export interface BlockWire {
  height: number;
  prev_digest: string;
  timestamp: number;
  digest: string;
  txs: { kind: string; payload: unknown; submitter: string; nonce: number }[];
}

export interface StreamAnnouncement {
  window_index?: number;
  bpm?: number;
  beat_times_us?: number[];
  phase?: string;
}
