"""Turn-based battle resolution.

Damage is integer arithmetic with a floor of 1 so every battle terminates.
Critical hits draw from a splitmix64 stream carried in the battle state;
one draw per damage call keeps replays aligned even when luck is zero.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

from .characters import Character
from .rng import splitmix64
from .rhythm import ACTION_ATTACK, ACTION_CHARGE, ACTION_DODGE, ACTION_STUMBLE

CRIT_LUCK_CAP = 50
CHARGE_MULTIPLIER = 2
CRIT_MULTIPLIER = 2
# Attacks aimed at a matching weakness deal 3/2 damage, truncated.
EXPLOIT_NUM, EXPLOIT_DEN = 3, 2
AUTO_BATTLE_TURN_CAP = 1000


class BattleOver(Exception):
    pass


@dataclass(frozen=True)
class Combatant:
    character: Character
    current_health: int
    charged: bool = False
    dodging: bool = False
    stance: str = "None"

    @classmethod
    def fresh(cls, character: Character, stance: str = "None") -> "Combatant":
        return cls(character=character, current_health=character.max_health, stance=stance)

    @property
    def alive(self) -> bool:
        return self.current_health > 0


@dataclass(frozen=True)
class BattleState:
    player: Combatant
    enemy: Combatant
    turn: int = 0
    rng_state: int = 0


@dataclass(frozen=True)
class DamageRoll:
    points: int
    crit: bool
    exploit: bool
    rng_state: int


def damage(attacker: Combatant, defender: Combatant, rng_state: int) -> DamageRoll:
    """One attack: charge doubles strength, armor subtracts (floor 1),
    a crit doubles the result, a matching stance multiplies by 3/2 last."""
    if not attacker.alive:
        raise BattleOver("attacker is dead")
    eff_strength = attacker.character.strength * (CHARGE_MULTIPLIER if attacker.charged else 1)
    points = max(1, eff_strength - defender.character.armor)
    draw, rng_state = splitmix64(rng_state)
    crit_percent = min(attacker.character.luck, CRIT_LUCK_CAP)
    crit = draw % 100 < crit_percent
    if crit:
        points *= CRIT_MULTIPLIER
    exploit = (
        defender.character.weakness != "None"
        and attacker.stance == defender.character.weakness
    )
    if exploit:
        points = points * EXPLOIT_NUM // EXPLOIT_DEN
    return DamageRoll(points=points, crit=crit, exploit=exploit, rng_state=rng_state)


def _hit(defender: Combatant, points: int) -> Combatant:
    # Direct construction: this runs once per attack in long simulations.
    return Combatant(
        character=defender.character,
        current_health=max(0, defender.current_health - points),
        charged=defender.charged,
        dodging=defender.dodging,
        stance=defender.stance,
    )


def resolve_round(state: BattleState, action: str) -> tuple[BattleState, tuple[dict, ...]]:
    """Apply the player's action, then the enemy's counter-attack.

    Returns the new state plus JSON-able effect records for event logs.
    Dodging negates the counter-attack entirely and then clears; a charge
    is spent by the attack that uses it.
    """
    player, enemy = state.player, state.enemy
    if not (player.alive and enemy.alive):
        raise BattleOver("battle already decided")
    rng_state = state.rng_state
    events: list[dict] = []

    if action == ACTION_ATTACK:
        roll = damage(player, enemy, rng_state)
        rng_state = roll.rng_state
        enemy = _hit(enemy, roll.points)
        if player.charged:
            player = replace(player, charged=False)
        events.append(
            {
                "actor": "player",
                "effect": "damage",
                "points": roll.points,
                "crit": roll.crit,
                "exploit": roll.exploit,
            }
        )
    elif action == ACTION_DODGE:
        player = replace(player, dodging=True)
        events.append({"actor": "player", "effect": "dodge"})
    elif action == ACTION_CHARGE:
        player = replace(player, charged=True)
        events.append({"actor": "player", "effect": "charge"})
    elif action == ACTION_STUMBLE:
        events.append({"actor": "player", "effect": "stumble"})
    else:
        raise ValueError(f"unknown action {action!r}")

    if enemy.alive:
        if player.dodging:
            player = replace(player, dodging=False)
            events.append({"actor": "enemy", "effect": "negated"})
        else:
            roll = damage(enemy, player, rng_state)
            rng_state = roll.rng_state
            player = _hit(player, roll.points)
            if enemy.charged:
                enemy = replace(enemy, charged=False)
            events.append(
                {
                    "actor": "enemy",
                    "effect": "damage",
                    "points": roll.points,
                    "crit": roll.crit,
                    "exploit": roll.exploit,
                }
            )

    next_state = BattleState(player=player, enemy=enemy, turn=state.turn + 1, rng_state=rng_state)
    return next_state, tuple(events)


def resolve_player_action(state: BattleState, action: str) -> BattleState:
    return resolve_round(state, action)[0]


@dataclass(frozen=True)
class AutoBattleResult:
    winner: str  # "a" or "b"
    turns: int
    a: Combatant
    b: Combatant


def auto_battle_full(a: Combatant, b: Combatant, seed: int) -> AutoBattleResult:
    """Alternate plain attacks starting with a; crits active, no dodge/charge.

    First side at 0 health loses.  After 1000 turn pairs the higher health
    fraction wins, with b (the defender) taking an exact tie.
    """
    if not (a.alive and b.alive):
        raise BattleOver("both combatants must start alive")
    a = replace(a, charged=False, dodging=False)
    b = replace(b, charged=False, dodging=False)
    rng_state = seed
    for turn in range(1, AUTO_BATTLE_TURN_CAP + 1):
        roll = damage(a, b, rng_state)
        rng_state = roll.rng_state
        b = _hit(b, roll.points)
        if not b.alive:
            return AutoBattleResult(winner="a", turns=turn, a=a, b=b)
        roll = damage(b, a, rng_state)
        rng_state = roll.rng_state
        a = _hit(a, roll.points)
        if not a.alive:
            return AutoBattleResult(winner="b", turns=turn, a=a, b=b)
    # Health fractions compared exactly via cross-multiplication.
    a_frac = a.current_health * b.character.max_health
    b_frac = b.current_health * a.character.max_health
    winner = "a" if a_frac > b_frac else "b"
    return AutoBattleResult(winner=winner, turns=AUTO_BATTLE_TURN_CAP, a=a, b=b)


def auto_battle(a: Combatant, b: Combatant, seed: int) -> tuple[str, int]:
    result = auto_battle_full(a, b, seed)
    return result.winner, result.turns
