#!/usr/bin/env python3
"""Sweep bot accuracy and report how far sessions get and what weaknesses
their uploads carry.  Confirms the difficulty knob behaves monotonically.

Usage: python scripts/sweep_accuracy.py [--seeds N] [--jitter-us N]
"""
import argparse
import sys
from collections import Counter

from rhythm_dungeon.games import finish_and_upload, retire
from rhythm_dungeon.genesis import GenesisState, register_chain
from rhythm_dungeon.harness import run_bot_dungeon


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seeds", type=int, default=20)
    parser.add_argument("--jitter-us", type=int, default=20_000)
    args = parser.parse_args()

    state = register_chain(GenesisState.empty(), 0)
    print(f"{'accuracy':>8} | {'mean rooms':>10} | {'deaths':>6} | weakness profile")
    print("-" * 72)
    for accuracy in (0, 25, 50, 75, 90, 100):
        rooms = 0
        deaths = 0
        weaknesses: Counter = Counter()
        for seed in range(args.seeds):
            bot = run_bot_dungeon(state, "bot", seed, accuracy, args.jitter_us, 0)
            rooms += bot.session.room_index
            session = bot.session
            if session.phase == "Dead":
                deaths += 1
            else:
                session = session if session.phase == "Retired" else retire(session)
            weaknesses[finish_and_upload(session).payload["character"]["weakness"]] += 1
        profile = ", ".join(f"{k}:{v}" for k, v in weaknesses.most_common())
        print(f"{accuracy:>7}% | {rooms / args.seeds:>10.2f} | {deaths:>6} | {profile}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
