"""The interoperable character model.

A character is a plain value: attributes, level/xp bookkeeping, a career
implied by the dominant attribute, and the weakness tag stamped on upload.
All operations are functional (they return a new Character) and the whole
model is integer-only so canonical encodings are bit-stable.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Any, Optional

ATTRIBUTES = ("strength", "armor", "luck", "vitality")
CAREERS = ("Warrior", "Guardian", "Gambler", "Survivor")
CAREER_OF_ATTRIBUTE = dict(zip(ATTRIBUTES, CAREERS))
ATTRIBUTE_OF_CAREER = dict(zip(CAREERS, ATTRIBUTES))
WEAKNESSES = ("Early", "Late", "WrongButton", "Miss", "None")
GAMES = ("RhythmDungeon", "LastTrip", "AdamsAdventure")

BASE_ATTRIBUTES = {"strength": 3, "armor": 2, "luck": 2, "vitality": 2}
BASE_ATTRIBUTE_SUM = 9
POINTS_PER_LEVEL = 3
XP_PER_LEVEL = 50
LEVEL_CAP = 20
ATTRIBUTE_CAP = 50
NAME_MAX_LEN = 24

# First-violation order of the contract's validation rules.
RULE_LEVEL_RANGE = "LevelRange"
RULE_ATTRIBUTE_RANGE = "AttributeRange"
RULE_ATTRIBUTE_BUDGET = "AttributeBudget"
RULE_WEAKNESS_TAG = "WeaknessTag"
RULE_NAME_FORMAT = "NameFormat"


class CharacterError(Exception):
    pass


class BadName(CharacterError):
    pass


class NoPoints(CharacterError):
    pass


class AttributeCap(CharacterError):
    pass


def _name_ok(name: Any) -> bool:
    return (
        isinstance(name, str)
        and 1 <= len(name) <= NAME_MAX_LEN
        and name.isprintable()
    )


@dataclass(frozen=True)
class Character:
    name: str
    level: int = 1
    xp: int = 0
    strength: int = 3
    armor: int = 2
    luck: int = 2
    vitality: int = 2
    weakness: str = "None"
    unspent_skill_points: int = 0

    @property
    def max_health(self) -> int:
        return 20 + 5 * self.vitality

    @property
    def attribute_sum(self) -> int:
        return self.strength + self.armor + self.luck + self.vitality

    @property
    def career(self) -> str:
        return determine_career(self)

    def attribute(self, name: str) -> int:
        if name not in ATTRIBUTES:
            raise ValueError(f"unknown attribute {name!r}")
        return getattr(self, name)


def create_base(name: str) -> Character:
    """A fresh level-1 character: 3/2/2/2 attributes, 30 max health."""
    if not _name_ok(name):
        raise BadName(f"name must be 1..{NAME_MAX_LEN} printable characters")
    return Character(name=name)


def earned_points(level: int) -> int:
    """Total attribute points granted by reaching `level`."""
    return BASE_ATTRIBUTE_SUM + POINTS_PER_LEVEL * (level - 1)


def grant_xp(c: Character, amount: int) -> Character:
    """Add xp, levelling up while the 50*level threshold is crossed.

    Each level-up grants 3 unallocated skill points.  At the level cap the
    xp counter saturates just under the next threshold instead of erroring.
    """
    if amount < 0:
        raise ValueError("xp amount must be non-negative")
    level, xp, unspent = c.level, c.xp + amount, c.unspent_skill_points
    while level < LEVEL_CAP and xp >= XP_PER_LEVEL * level:
        xp -= XP_PER_LEVEL * level
        level += 1
        unspent += POINTS_PER_LEVEL
    if level >= LEVEL_CAP:
        xp = min(xp, XP_PER_LEVEL * LEVEL_CAP - 1)
    return replace(c, level=level, xp=xp, unspent_skill_points=unspent)


def allocate_point(c: Character, attribute: str) -> Character:
    """Spend one skill point on an attribute (vitality adds 5 max health)."""
    if attribute not in ATTRIBUTES:
        raise ValueError(f"unknown attribute {attribute!r}")
    if c.unspent_skill_points < 1:
        raise NoPoints("no unspent skill points")
    if c.attribute(attribute) >= ATTRIBUTE_CAP:
        raise AttributeCap(f"{attribute} is at the cap of {ATTRIBUTE_CAP}")
    return replace(
        c,
        unspent_skill_points=c.unspent_skill_points - 1,
        **{attribute: c.attribute(attribute) + 1},
    )


def determine_career(c: Character) -> str:
    """Career of the dominant attribute; ties break in listed order."""
    values = [c.strength, c.armor, c.luck, c.vitality]
    best = max(values)
    return CAREERS[values.index(best)]


def validate_character(c: Character) -> tuple[bool, Optional[str]]:
    """Check the contract's rules; returns (valid, first violated rule name).

    Rules, in order: level in 1..20; each attribute in 1..50; the budget
    identity sum + unspent == 9 + 3*(level-1); a known weakness tag; a
    1..24 printable-character name.
    """
    ints = (c.level, c.strength, c.armor, c.luck, c.vitality, c.unspent_skill_points)
    if not all(isinstance(v, int) and not isinstance(v, bool) for v in ints):
        return False, RULE_ATTRIBUTE_RANGE
    if not 1 <= c.level <= LEVEL_CAP:
        return False, RULE_LEVEL_RANGE
    for attr in ATTRIBUTES:
        if not 1 <= c.attribute(attr) <= ATTRIBUTE_CAP:
            return False, RULE_ATTRIBUTE_RANGE
    if c.unspent_skill_points < 0:
        return False, RULE_ATTRIBUTE_BUDGET
    if c.attribute_sum + c.unspent_skill_points != earned_points(c.level):
        return False, RULE_ATTRIBUTE_BUDGET
    if c.weakness not in WEAKNESSES:
        return False, RULE_WEAKNESS_TAG
    if not _name_ok(c.name):
        return False, RULE_NAME_FORMAT
    return True, None


def to_canonical_dict(c: Character) -> dict:
    """Integer/string fields only; derived fields (career, max health) are
    recomputed on load and never stored."""
    return {
        "name": c.name,
        "level": c.level,
        "xp": c.xp,
        "strength": c.strength,
        "armor": c.armor,
        "luck": c.luck,
        "vitality": c.vitality,
        "weakness": c.weakness,
        "unspent_skill_points": c.unspent_skill_points,
    }


_CANONICAL_KEYS = frozenset(
    (
        "name",
        "level",
        "xp",
        "strength",
        "armor",
        "luck",
        "vitality",
        "weakness",
        "unspent_skill_points",
    )
)


def from_canonical_dict(d: dict) -> Character:
    """Strict inverse of to_canonical_dict; raises ValueError on bad shape."""
    if not isinstance(d, dict) or set(d) != _CANONICAL_KEYS:
        raise ValueError("character record has wrong field set")
    if not isinstance(d["name"], str) or not isinstance(d["weakness"], str):
        raise ValueError("character name/weakness must be strings")
    for key in _CANONICAL_KEYS - {"name", "weakness"}:
        if not isinstance(d[key], int) or isinstance(d[key], bool):
            raise ValueError(f"character field {key} must be an integer")
    return Character(
        name=d["name"],
        level=d["level"],
        xp=d["xp"],
        strength=d["strength"],
        armor=d["armor"],
        luck=d["luck"],
        vitality=d["vitality"],
        weakness=d["weakness"],
        unspent_skill_points=d["unspent_skill_points"],
    )
