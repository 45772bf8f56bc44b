import math
import random

import pytest

from goalarbiter.definitions import MAX_FLOAT, MIN_FLOAT, Combiner, Season
from goalarbiter.errors import (
    EmptyActuatorListError,
    EmptyGroupError,
    PolicyEvaluationError,
    UnknownPolicyCombinationError,
)
from goalarbiter.model import BinarySetting, load_model
from goalarbiter.rules import (
    SPLIT_EQUAL_MAX,
    SPLIT_EQUAL_MIN_UNBOUNDED,
    AcceptAllRule,
    Action,
    AverageRule,
    ConflictRule,
    ContextualRule,
    GroupedRequests,
    MediatedRequest,
    MediationContext,
    Request,
    active_bounds,
    builtin_rules,
    find_value,
    group_per_instance,
    mediate_average,
    resolve_conflicts,
    split_equal,
    threshold_binary,
)

CASES = 1000
SEASONS = [None, *Season]


def group(*values, zone="z", instance="i"):
    return GroupedRequests(zone, instance, tuple((float(v), f"u{n}") for n, v in enumerate(values)))


class TestGroupPerInstance:
    def test_groups_and_order(self):
        requests = [
            Request("livingroom", "roomTemp", 20, "alice"),
            Request("livingroom", "movieLight", 20, "alice"),
            Request("livingroom", "roomTemp", 26, "bob"),
            Request("attic", "roomTemp", 15, "bob"),
        ]

        groups = group_per_instance(requests)

        assert [(x.zone, x.instance) for x in groups] == [
            ("attic", "roomTemp"),
            ("livingroom", "movieLight"),
            ("livingroom", "roomTemp"),
        ]
        assert groups[2].entries == ((20, "alice"), (26, "bob"))

    def test_empty(self):
        assert group_per_instance([]) == []


class TestMediateAverage:
    @pytest.mark.parametrize(
        "values, expected",
        [
            ((20, 26), 23),
            ((23, 18), 20.5),
            ((80,), 80),
            ((255, 255), 255),
        ],
    )
    def test_average(self, values, expected):
        assert mediate_average(group(*values)) == MediatedRequest("z", "i", expected)

    def test_empty_group(self):
        with pytest.raises(EmptyGroupError) as e:
            mediate_average(group())
        assert e.value.code == "empty-group"

    def test_between_min_and_max(self):
        rng = random.Random(20231)
        for _ in range(CASES):
            values = [rng.uniform(-1e6, 1e6) for _ in range(rng.randint(1, 12))]
            result = mediate_average(group(*values)).value
            assert min(values) <= result <= max(values)

    def test_order_independent(self):
        rng = random.Random(8)
        for _ in range(CASES):
            values = [rng.uniform(-1000, 1000) for _ in range(rng.randint(1, 8))]
            shuffled = rng.sample(values, len(values))
            assert mediate_average(group(*values)).value == mediate_average(group(*shuffled)).value


class TestFindValue:
    @pytest.mark.parametrize(
        "policy, property_type, sensed, candidate, season, expected",
        [
            ("east", "temp", None, 28, Season.WINTER, 22),
            ("east", "temp", None, 18, Season.WINTER, 18),
            ("east", "temp", None, 10, Season.AUTUMN, 18),
            ("east", "temp", None, 20, Season.SUMMER, 24),
            ("west", "temp", None, 30, Season.SPRING, 28),
            ("west", "temp", None, 20.5, Season.WINTER, 20.5),
            ("east", "light", 20, 0, Season.WINTER, 100),
            ("east", "light", None, 300, Season.WINTER, 255),
            ("west", "light", 160, 255, Season.WINTER, 255),
            ("west", "light", 160, 50, Season.WINTER, 100),
            ("west", "light", 80, 120, Season.WINTER, 180),
            ("west", "light", 100, 120, Season.WINTER, 180),
        ],
    )
    def test_examples(self, policy, property_type, sensed, candidate, season, expected):
        assert find_value(policy, property_type, sensed, candidate, season) == expected

    def test_unknown_combination(self):
        with pytest.raises(UnknownPolicyCombinationError) as e:
            find_value("east", "humidity", None, 40, Season.WINTER)
        assert e.value.code == "unknown-policy-combination"

        with pytest.raises(UnknownPolicyCombinationError):
            find_value("north", "light", 50, 40, Season.WINTER)

    def test_temperature_needs_season(self):
        with pytest.raises(PolicyEvaluationError):
            find_value("east", "temp", None, 20, None)

    def test_west_light_needs_reading(self):
        with pytest.raises(PolicyEvaluationError):
            find_value("west", "light", None, 200, Season.WINTER)

    def test_within_bounds_and_idempotent(self):
        rng = random.Random(1729)
        for _ in range(CASES):
            policy = rng.choice(["east", "west"])
            property_type = rng.choice(["temp", "light"])
            sensed = rng.uniform(0, 255)
            season = rng.choice(list(Season))
            candidate = rng.uniform(-500, 500)

            low, high = active_bounds(policy, property_type, sensed, season)
            value = find_value(policy, property_type, sensed, candidate, season)

            assert low <= value <= high
            assert find_value(policy, property_type, sensed, value, season) == value
            if low <= candidate <= high:
                assert value == candidate


class TestContextualRule:
    def test_averages_then_bounds(self):
        rule = ContextualRule("west")
        ctx = MediationContext("west", "temp", 20, Season.WINTER)

        result = rule.mediate(group(23, 18, zone="commonRoom_W", instance="commonRoomTemp"), ctx)

        assert result == MediatedRequest("commonRoom_W", "commonRoomTemp", 20.5)

    def test_policy_id_selects_the_wing(self):
        # The rule's own name does not matter, the zone's policy id does
        ctx = MediationContext("west", "light", 50, Season.WINTER)
        assert ContextualRule("east").mediate(group(120), ctx).value == 180

    def test_average_rule_ignores_context(self):
        ctx = MediationContext(None, "temp", None, None)
        assert AverageRule().mediate(group(20, 26), ctx).value == 23


class TestThresholdBinary:
    @pytest.mark.parametrize(
        "target, expected",
        [(18, 100), (0.001, 100), (0, 0), (-3, 0)],
    )
    def test_default_setting(self, target, expected):
        assert threshold_binary(target, "heater") == Action("heater", expected)

    def test_declared_setting(self):
        assert threshold_binary(5, "fan", BinarySetting(on=1, off=-1)) == Action("fan", 1)
        assert threshold_binary(-5, "fan", BinarySetting(on=1, off=-1)) == Action("fan", -1)


class TestSplitEqual:
    def test_split(self):
        assert split_equal(80, ["cornerLight", "mainLight"]) == [Action("cornerLight", 40), Action("mainLight", 40)]

    def test_binary_keeps_its_share_slot(self):
        actions = split_equal(18, ["acOdd_E", "heater"], {"heater": BinarySetting()})
        assert actions == [Action("acOdd_E", 9), Action("heater", 100)]

    def test_no_actuators(self):
        with pytest.raises(EmptyActuatorListError):
            split_equal(10, [])

    def test_conserves_target(self):
        rng = random.Random(4242)
        for _ in range(CASES):
            target = rng.uniform(-1000, 1000)
            actuators = [f"a{n}" for n in range(rng.randint(1, 10))]

            actions = split_equal(target, actuators)

            assert [x.actuator for x in actions] == actuators
            assert abs(math.fsum(x.value for x in actions) - target) < 1e-9


class TestResolveConflicts:
    @pytest.mark.parametrize(
        "raw, rule, expected",
        [
            ([Action("cornerLight", 40), Action("cornerLight", 10)], SPLIT_EQUAL_MAX.conflict_rule, 40),
            ([Action("cornerLight", 150)], SPLIT_EQUAL_MAX.conflict_rule, 100),
            ([Action("cornerLight", -5)], SPLIT_EQUAL_MAX.conflict_rule, 0),
            ([Action("acOdd_E", 9), Action("acOdd_E", 22)], SPLIT_EQUAL_MIN_UNBOUNDED.conflict_rule, 22),
            ([Action("x", 9), Action("x", 22)], ConflictRule(Combiner.MIN, MIN_FLOAT, MAX_FLOAT), 9),
            ([Action("x", 1e9)], ConflictRule(Combiner.MAX, MIN_FLOAT, MAX_FLOAT), 1e9),
        ],
    )
    def test_examples(self, raw, rule, expected):
        assert resolve_conflicts(raw, rule) == [Action(raw[0].actuator, expected)]

    def test_ordered_by_actuator(self):
        raw = [Action("smallLight", 10), Action("ac", 23), Action("mainLight", 40)]
        assert [x.actuator for x in resolve_conflicts(raw, SPLIT_EQUAL_MAX.conflict_rule)] == [
            "ac",
            "mainLight",
            "smallLight",
        ]

    def test_empty_bounds(self):
        with pytest.raises(ValueError):
            ConflictRule(Combiner.MAX, 10, 0)

    def test_permutation_invariant_and_idempotent(self):
        rng = random.Random(99)
        for _ in range(CASES):
            low = rng.uniform(-100, 100)
            rule = ConflictRule(rng.choice(list(Combiner)), low, low + rng.uniform(0, 200))
            raw = [Action(f"a{rng.randint(0, 4)}", rng.uniform(-300, 300)) for _ in range(rng.randint(0, 15))]

            resolved = resolve_conflicts(raw, rule)

            assert resolve_conflicts(rng.sample(raw, len(raw)), rule) == resolved
            assert resolve_conflicts(resolved, rule) == resolved
            assert len({x.actuator for x in resolved}) == len(resolved)
            assert all(rule.lower_bound <= x.value <= rule.upper_bound for x in resolved)


class TestSplitEqualRule:
    def test_building_heater(self, building_document):
        model = load_model(building_document)
        instance = model.instance("room_E_1", "roomTemp")

        plan = SPLIT_EQUAL_MIN_UNBOUNDED.actuate(MediatedRequest("room_E_1", "roomTemp", 18), instance, model.actuators)

        assert plan.actions == (Action("acOdd_E", 9), Action("heater", 100))
        assert plan.conflict_rule.combiner is Combiner.MAX
        assert plan.conflict_rule.lower_bound == MIN_FLOAT


def test_builtin_rules():
    names = {(rule.kind.value, rule.name) for rule in builtin_rules()}
    assert names == {
        ("mediation", "average"),
        ("mediation", "east"),
        ("mediation", "west"),
        ("actuation", "split_equal_max"),
        ("actuation", "split_equal_min_unbounded"),
        ("validation", "accept_all"),
    }
    assert AcceptAllRule().describe() == {"kind": "validation", "name": "accept_all", "source": None}
