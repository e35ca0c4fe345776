"""Beat-grid scheduling and press judgement.

Timing is integer microseconds throughout: the beat period of a grid is
60_000_000 // bpm, beat k lands at origin_ms*1000 + k*period, and every
window/judgement computation below is exact integer arithmetic so two
hosts always classify a trace identically.

A grid groups 4 beats per bar and 2 bars per action window.  The first
bar of a window is the cue bar (listen), the second carries the four
required presses (echo).
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

BUTTONS = ("L", "D", "U", "R")
BEATS_PER_BAR = 4
BARS_PER_ACTION = 2
BEATS_PER_WINDOW = BEATS_PER_BAR * BARS_PER_ACTION
JUDGED_BEATS = 4
HIT_WINDOW_CAP_US = 150_000

ACTION_ATTACK = "Attack"
ACTION_DODGE = "Dodge"
ACTION_CHARGE = "Charge"
ACTION_STUMBLE = "Stumble"

ACTION_PATTERNS = {
    ("L", "L", "R", "R"): ACTION_ATTACK,
    ("U", "D", "U", "D"): ACTION_DODGE,
    ("D", "D", "D", "D"): ACTION_CHARGE,
}
PATTERN_OF_ACTION = {action: pattern for pattern, action in ACTION_PATTERNS.items()}

OUTCOME_HIT = "Hit"
OUTCOME_EARLY = "Early"
OUTCOME_LATE = "Late"
OUTCOME_WRONG_BUTTON = "WrongButton"
OUTCOME_MISS = "Miss"


@dataclass(frozen=True)
class BeatGrid:
    bpm: int
    origin_ms: int = 0
    beats_per_bar: int = BEATS_PER_BAR
    bars_per_action: int = BARS_PER_ACTION

    def __post_init__(self) -> None:
        if self.bpm < 1:
            raise ValueError("bpm must be positive")
        if self.beats_per_bar != BEATS_PER_BAR or self.bars_per_action != BARS_PER_ACTION:
            raise ValueError("grid is fixed at 4 beats per bar, 2 bars per action")

    @property
    def beat_period_us(self) -> int:
        return 60_000_000 // self.bpm

    @property
    def hit_window_us(self) -> int:
        return min(HIT_WINDOW_CAP_US, self.beat_period_us // 4)

    def beat_time_us(self, beat_index: int) -> int:
        return self.origin_ms * 1000 + beat_index * self.beat_period_us

    def window_beats(self, window_index: int) -> range:
        first = BEATS_PER_WINDOW * window_index
        return range(first, first + BEATS_PER_WINDOW)

    def judged_beats(self, window_index: int) -> range:
        """The four beats of the window's second bar carry the presses."""
        first = BEATS_PER_WINDOW * window_index + BEATS_PER_BAR
        return range(first, first + JUDGED_BEATS)

    def window_start_us(self, window_index: int) -> int:
        return self.beat_time_us(BEATS_PER_WINDOW * window_index)

    def window_deadline_us(self, window_index: int) -> int:
        """Last judged beat plus a grace of half a beat period."""
        last = self.judged_beats(window_index)[-1]
        return self.beat_time_us(last) + self.beat_period_us // 2

    def window_end_us(self, window_index: int) -> int:
        return self.beat_time_us(BEATS_PER_WINDOW * (window_index + 1))


@dataclass(frozen=True)
class InputEvent:
    at_us: int
    button: str


@dataclass(frozen=True)
class BeatJudgement:
    """One outcome per expected beat.

    `button` and `at_us` describe the matched press (None for a Miss).
    """

    outcome: str
    button: Optional[str] = None
    at_us: Optional[int] = None

    def to_dict(self) -> dict:
        return {"outcome": self.outcome, "button": self.button, "at_us": self.at_us}


@dataclass(frozen=True)
class MistakeTally:
    early: int = 0
    late: int = 0
    wrong_button: int = 0
    miss: int = 0

    def merge(self, other: "MistakeTally") -> "MistakeTally":
        return MistakeTally(
            early=self.early + other.early,
            late=self.late + other.late,
            wrong_button=self.wrong_button + other.wrong_button,
            miss=self.miss + other.miss,
        )

    @property
    def total(self) -> int:
        return self.early + self.late + self.wrong_button + self.miss

    def to_dict(self) -> dict:
        return {
            "early": self.early,
            "late": self.late,
            "wrong_button": self.wrong_button,
            "miss": self.miss,
        }


def _tally_of(outcomes: Iterable[str]) -> MistakeTally:
    counts = {OUTCOME_EARLY: 0, OUTCOME_LATE: 0, OUTCOME_WRONG_BUTTON: 0, OUTCOME_MISS: 0}
    for outcome in outcomes:
        if outcome in counts:
            counts[outcome] += 1
    return MistakeTally(
        early=counts[OUTCOME_EARLY],
        late=counts[OUTCOME_LATE],
        wrong_button=counts[OUTCOME_WRONG_BUTTON],
        miss=counts[OUTCOME_MISS],
    )


def judge_window(
    grid: BeatGrid,
    window_index: int,
    expected: Sequence[str],
    trace: Sequence[InputEvent],
) -> tuple[tuple[BeatJudgement, ...], MistakeTally]:
    """Classify the window's four judged beats against a time-sorted trace.

    Each beat, in order, claims its nearest unconsumed press within half a
    beat period (smaller |dt| wins, earlier press on an exact tie).  A claimed
    press inside the hit window is a Hit or WrongButton depending on the
    button; outside it, Early or Late by sign; an unclaimed beat is a Miss.
    """
    if len(expected) != JUDGED_BEATS:
        raise ValueError(f"expected exactly {JUDGED_BEATS} buttons")
    period = grid.beat_period_us
    half = period // 2
    w_hit = grid.hit_window_us
    consumed: set[int] = set()
    judgements: list[BeatJudgement] = []
    for slot, beat in enumerate(grid.judged_beats(window_index)):
        target = grid.beat_time_us(beat)
        best: Optional[tuple[int, int, int]] = None
        for idx, event in enumerate(trace):
            if idx in consumed:
                continue
            dt = event.at_us - target
            if dt < -half:
                continue
            if dt > half:
                break  # trace is time-sorted; nothing further can match
            key = (abs(dt), event.at_us, idx)
            if best is None or key < best:
                best = key
        if best is None:
            judgements.append(BeatJudgement(OUTCOME_MISS))
            continue
        idx = best[2]
        consumed.add(idx)
        event = trace[idx]
        dt = event.at_us - target
        if abs(dt) <= w_hit:
            outcome = OUTCOME_HIT if event.button == expected[slot] else OUTCOME_WRONG_BUTTON
        elif dt < 0:
            outcome = OUTCOME_EARLY
        else:
            outcome = OUTCOME_LATE
        judgements.append(BeatJudgement(outcome, event.button, event.at_us))
    tally = _tally_of(j.outcome for j in judgements)
    return tuple(judgements), tally


def decode_action(judged: Sequence[BeatJudgement], pressed: Sequence[str]) -> str:
    """Four Hits on a known pattern deploy its action; anything else stumbles."""
    if any(j.outcome != OUTCOME_HIT for j in judged):
        return ACTION_STUMBLE
    return ACTION_PATTERNS.get(tuple(pressed), ACTION_STUMBLE)


# Tie-break priority for the most-frequent-mistake weakness.
_WEAKNESS_PRIORITY = (
    ("Miss", "miss"),
    ("Late", "late"),
    ("Early", "early"),
    ("WrongButton", "wrong_button"),
)


def weakness_from_tally(tally: MistakeTally) -> str:
    """Most frequent mistake; ties break Miss > Late > Early > WrongButton."""
    if tally.total == 0:
        return "None"
    best_tag, best_count = "None", -1
    for tag, field in _WEAKNESS_PRIORITY:
        count = getattr(tally, field)
        if count > best_count:
            best_tag, best_count = tag, count
    return best_tag


def tempo_for_tier(enemy_level: int) -> int:
    """Stronger enemies play faster: 80 bpm at tier 1 up to 160 at tier 5."""
    if enemy_level < 1:
        raise ValueError("enemy level must be positive")
    tier = min(5, 1 + (enemy_level - 1) // 4)
    return 60 + 20 * tier


def trace_to_jsonable(trace: Sequence[InputEvent]) -> list[dict]:
    return [{"at_us": e.at_us, "button": e.button} for e in trace]


def trace_from_jsonable(records: Sequence[dict]) -> tuple[InputEvent, ...]:
    events = []
    last = None
    for record in records:
        event = InputEvent(at_us=int(record["at_us"]), button=str(record["button"]))
        if last is not None and event.at_us < last:
            raise ValueError("trace timestamps must be non-decreasing")
        last = event.at_us
        events.append(event)
    return tuple(events)


def save_trace(trace: Sequence[InputEvent], path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(trace_to_jsonable(trace), fh)


def load_trace(path: str) -> tuple[InputEvent, ...]:
    with open(path, "r", encoding="utf-8") as fh:
        return trace_from_jsonable(json.load(fh))
