import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from rhythm_dungeon import characters as chars
from rhythm_dungeon.characters import (
    AttributeCap,
    BadName,
    Character,
    NoPoints,
    allocate_point,
    create_base,
    determine_career,
    grant_xp,
    validate_character,
)

from oracles import random_character, random_valid_character, validate_character_oracle


def test_create_base_values():
    c = create_base("hero")
    assert (c.level, c.xp) == (1, 0)
    assert (c.strength, c.armor, c.luck, c.vitality) == (3, 2, 2, 2)
    assert c.attribute_sum == 9
    assert c.max_health == 30
    assert c.career == "Warrior"
    assert c.weakness == "None"
    assert validate_character(c) == (True, None)


@pytest.mark.parametrize("name", ["", "x" * 25, "bad\x01name"])
def test_create_base_rejects_bad_names(name):
    with pytest.raises(BadName):
        create_base(name)


def test_grant_xp_threshold_cases():
    c = create_base("hero")
    up = grant_xp(c, 50)
    assert (up.level, up.xp, up.unspent_skill_points) == (2, 0, 3)
    below = grant_xp(c, 49)
    assert (below.level, below.xp) == (1, 49)
    # 150 xp: 150-50 -> level 2 with 100, 100-100 -> level 3 with 0.
    multi = grant_xp(c, 150)
    assert (multi.level, multi.xp, multi.unspent_skill_points) == (3, 0, 6)


def test_grant_xp_saturates_at_level_cap():
    c = create_base("hero")
    maxed = grant_xp(c, 10_000_000)
    assert maxed.level == chars.LEVEL_CAP
    assert maxed.xp == chars.XP_PER_LEVEL * chars.LEVEL_CAP - 1
    again = grant_xp(maxed, 500)
    assert again.level == chars.LEVEL_CAP
    assert again.xp == maxed.xp


@given(st.integers(0, 3000), st.integers(0, 3000))
def test_grant_xp_associative(a, b):
    c = create_base("hero")
    assert grant_xp(c, a + b) == grant_xp(grant_xp(c, a), b)


def test_allocate_point_basics():
    c = grant_xp(create_base("hero"), 50)
    assert c.unspent_skill_points == 3
    c2 = allocate_point(c, "strength")
    assert (c2.strength, c2.unspent_skill_points) == (4, 2)
    assert c2.career == "Warrior"
    c3 = allocate_point(c, "vitality")
    assert c3.max_health == 35
    with pytest.raises(NoPoints):
        allocate_point(create_base("hero"), "luck")


def test_allocate_point_attribute_cap():
    c = Character(name="capped", level=20, strength=50, armor=2, luck=2, vitality=2,
                  unspent_skill_points=10)
    with pytest.raises(AttributeCap):
        allocate_point(c, "strength")


@pytest.mark.parametrize(
    "attrs,career",
    [
        ((3, 2, 2, 2), "Warrior"),
        ((5, 5, 3, 3), "Warrior"),  # tie broken by listed order
        ((3, 4, 9, 5), "Gambler"),
        ((1, 1, 1, 1), "Warrior"),
        ((2, 2, 3, 3), "Gambler"),
        ((1, 2, 2, 9), "Survivor"),
    ],
)
def test_determine_career(attrs, career):
    c = Character(name="x", strength=attrs[0], armor=attrs[1], luck=attrs[2], vitality=attrs[3])
    assert determine_career(c) == career


@given(st.tuples(*([st.integers(1, 50)] * 4)), st.integers(1, 20))
def test_career_invariant_under_constant_shift(attrs, shift):
    base = Character(name="x", strength=attrs[0], armor=attrs[1], luck=attrs[2], vitality=attrs[3])
    shifted = Character(
        name="x",
        strength=attrs[0] + shift,
        armor=attrs[1] + shift,
        luck=attrs[2] + shift,
        vitality=attrs[3] + shift,
    )
    assert determine_career(base) == determine_career(shifted)


def test_validate_rule_order_and_names():
    assert validate_character(create_base("hero")) == (True, None)
    # level 2 with base attributes: needs sum + unspent == 12.
    c = Character(name="x", level=2)
    assert validate_character(c) == (False, "AttributeBudget")
    c = Character(name="x", level=3, strength=8, armor=2, luck=2, vitality=2)
    assert validate_character(c) == (False, "AttributeBudget")
    c = Character(name="x", level=15, strength=51, armor=1, luck=1, vitality=1,
                  unspent_skill_points=0)
    assert validate_character(c)[1] == "AttributeRange"
    c = Character(name="x", level=0)
    assert validate_character(c)[1] == "LevelRange"
    c = Character(name="x", weakness="Sloth")
    assert validate_character(c)[1] == "WeaknessTag"
    c = Character(name="", level=1)
    assert validate_character(c)[1] == "NameFormat"


def test_validate_agrees_with_oracle_on_random_characters():
    rng = random.Random(20260810)
    for _ in range(2000):
        c = random_character(rng)
        assert validate_character(c)[0] == validate_character_oracle(c)
    for _ in range(500):
        c = random_valid_character(rng)
        assert validate_character(c) == (True, None)
        assert validate_character_oracle(c)


@given(st.data())
def test_budget_identity_preserved_by_operation_sequences(data):
    c = create_base("hero")
    for _ in range(data.draw(st.integers(0, 12))):
        op = data.draw(st.sampled_from(["xp", "alloc"]))
        if op == "xp":
            c = grant_xp(c, data.draw(st.integers(0, 400)))
        elif c.unspent_skill_points > 0:
            attr = data.draw(st.sampled_from(chars.ATTRIBUTES))
            if c.attribute(attr) < chars.ATTRIBUTE_CAP:
                c = allocate_point(c, attr)
    assert c.attribute_sum + c.unspent_skill_points == chars.earned_points(c.level)
    assert validate_character(c) == (True, None)


def test_canonical_dict_round_trip():
    rng = random.Random(7)
    for _ in range(200):
        c = random_valid_character(rng)
        assert chars.from_canonical_dict(chars.to_canonical_dict(c)) == c


def test_canonical_dict_rejects_bad_shapes():
    good = chars.to_canonical_dict(create_base("hero"))
    for bad in (
        {**good, "extra": 1},
        {k: v for k, v in good.items() if k != "xp"},
        {**good, "level": "1"},
        {**good, "name": 3},
    ):
        with pytest.raises(ValueError):
            chars.from_canonical_dict(bad)
