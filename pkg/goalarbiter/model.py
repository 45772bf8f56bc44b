"""
Declarative description of a smart environment: property types, sensors, actuators,
zones, property instances, users, context facts and the goals users have set.

The types here are immutable. Operations that change the environment, e.g.
`update_sensor()` or `set_goal()`, return updated copies so that a reaction can
work on a consistent snapshot while the knowledge base moves on.
"""

from __future__ import annotations

import dataclasses
import logging
import math
from collections.abc import Container, Iterator, Mapping
from dataclasses import dataclass, field
from typing import Any
from typing import SupportsFloat as Numeric

from goalarbiter.definitions import BINARY_OFF, BINARY_ON, MAX_FLOAT, MIN_FLOAT, Season
from goalarbiter.errors import (
    DanglingReferenceError,
    DuplicateIdError,
    ModelFormatError,
    PropertyTypeMismatchError,
    UnknownSensorError,
)
from goalarbiter.utils import json_number, numbers_close

logger = logging.getLogger(__name__)

Scalar = str | int | float | bool

DOCUMENT_SECTIONS = (
    "propertyTypes",
    "sensors",
    "sensorValues",
    "actuators",
    "zones",
    "propertyInstances",
    "users",
    "goals",
    "context",
)


@dataclass(frozen=True)
class PropertyType:
    """A category of environmental parameter, e.g. light or temp"""

    id: str


@dataclass(frozen=True)
class Sensor:
    id: str
    property_type: str
    last_value: float | None = None


@dataclass(frozen=True)
class ValidRange:
    """
    Values an actuator accepts. Either a closed interval [low, high] or, when
    `values` is set, a discrete set of settings.
    """

    low: float = MIN_FLOAT
    high: float = MAX_FLOAT
    values: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.values is not None:
            if not self.values:
                raise ValueError("a discrete valid range needs at least one value")
        elif self.low > self.high:
            raise ValueError(f"empty valid range [{self.low}, {self.high}]")

    @property
    def bounded(self) -> bool:
        return self.values is not None or self.low != MIN_FLOAT or self.high != MAX_FLOAT

    def accepts(self, value: Numeric) -> bool:
        """validValue for a single setting"""
        if self.values is not None:
            return any(numbers_close(value, allowed) for allowed in self.values)
        return self.low <= float(value) <= self.high

    def to_dict(self) -> dict[str, Any]:
        if self.values is not None:
            return {"values": [json_number(x) for x in self.values]}
        as_dict: dict[str, Any] = {}
        if self.low != MIN_FLOAT:
            as_dict["min"] = json_number(self.low)
        if self.high != MAX_FLOAT:
            as_dict["max"] = json_number(self.high)
        return as_dict


UNBOUNDED = ValidRange()


@dataclass(frozen=True)
class BinarySetting:
    """An actuator that only accepts an on and an off setting, e.g. a heater"""

    on: float = BINARY_ON
    off: float = BINARY_OFF


@dataclass(frozen=True)
class Actuator:
    id: str
    property_type: str
    valid_range: ValidRange = UNBOUNDED
    binary: BinarySetting | None = None

    @property
    def is_binary(self) -> bool:
        return self.binary is not None


@dataclass(frozen=True)
class Zone:
    """A region of the environment. An unset mediation policy means the registry default applies."""

    id: str
    mediation_policy: str | None = None


@dataclass(frozen=True)
class PropertyInstance:
    zone: str
    id: str
    property_type: str
    actuators: tuple[str, ...] = ()
    sensors: tuple[str, ...] = ()

    @property
    def key(self) -> tuple[str, str]:
        return (self.zone, self.id)


@dataclass(frozen=True)
class User:
    id: str
    allowed_zones: frozenset[str] = frozenset()

    def may_set(self, zone: str) -> bool:
        return zone in self.allowed_zones


@dataclass(frozen=True)
class Goal:
    """A value a user wants for a property instance"""

    user: str
    zone: str
    instance: str
    value: float

    @property
    def key(self) -> tuple[str, str, str]:
        return (self.user, self.zone, self.instance)


@dataclass(frozen=True)
class Context:
    """Context facts. The season is held separately as policies rely on it."""

    season: Season | None = None
    facts: Mapping[str, Scalar] = field(default_factory=dict)

    def get(self, name: str, default: Scalar | None = None) -> Scalar | None:
        if name == "season":
            return self.season.value if self.season else default
        return self.facts.get(name, default)


@dataclass(frozen=True)
class EnvironmentModel:
    """The fact base describing the environment"""

    property_types: Mapping[str, PropertyType] = field(default_factory=dict)
    sensors: Mapping[str, Sensor] = field(default_factory=dict)
    actuators: Mapping[str, Actuator] = field(default_factory=dict)
    zones: Mapping[str, Zone] = field(default_factory=dict)
    instances: Mapping[tuple[str, str], PropertyInstance] = field(default_factory=dict)
    users: Mapping[str, User] = field(default_factory=dict)
    context: Context = field(default_factory=Context)

    def instance(self, zone: str, instance: str) -> PropertyInstance | None:
        """Look up a property instance by (zone, instance)"""
        return self.instances.get((zone, instance))

    def sensed_value(self, instance: PropertyInstance) -> float | None:
        """The reading of the first sensor listed by the instance, if any"""
        if not instance.sensors:
            return None
        sensor = self.sensors.get(instance.sensors[0])
        return sensor.last_value if sensor is not None else None


@dataclass(frozen=True)
class GoalStore:
    """The set of currently submitted goals, at most one per (user, zone, instance)"""

    entries: Mapping[tuple[str, str, str], Goal] = field(default_factory=dict)

    def __iter__(self) -> Iterator[Goal]:
        return iter(self.entries.values())

    def __len__(self) -> int:
        return len(self.entries)

    def get(self, user: str, zone: str, instance: str) -> Goal | None:
        return self.entries.get((user, zone, instance))


def set_goal(store: GoalStore, goal: Goal) -> GoalStore:
    """Record a goal, replacing any previous goal by the same user on the same property instance"""
    entries = dict(store.entries)
    if goal.key in entries:
        logger.debug("Replacing goal %r with value %s", goal.key, goal.value)
    entries[goal.key] = goal
    return GoalStore(entries)


def remove_goal(store: GoalStore, user: str, zone: str, instance: str) -> GoalStore:
    """Retract a goal. Removing a goal that is not set leaves the store unchanged"""
    if (user, zone, instance) not in store.entries:
        return store
    entries = dict(store.entries)
    del entries[(user, zone, instance)]
    return GoalStore(entries)


def update_sensor(model: EnvironmentModel, sensor_id: str, value: Numeric) -> EnvironmentModel:
    """Replace the last reading of a sensor"""
    sensor = model.sensors.get(sensor_id)
    if sensor is None:
        raise UnknownSensorError(f"unknown sensor '{sensor_id}'", [{"sensor": sensor_id}])
    if not math.isfinite(float(value)):
        raise ModelFormatError(f"reading {value} of sensor '{sensor_id}' is not finite", [{"sensor": sensor_id}])

    sensors = dict(model.sensors)
    sensors[sensor_id] = dataclasses.replace(sensor, last_value=float(value))
    logger.debug("Sensor %s reading %s -> %s", sensor_id, sensor.last_value, value)
    return dataclasses.replace(model, sensors=sensors)


def set_context(model: EnvironmentModel, season: str | Season | None = None, **facts: Scalar) -> EnvironmentModel:
    """Change the season and/or named context facts"""
    context = model.context
    if season is not None:
        context = dataclasses.replace(context, season=_parse_season(season))
    if facts:
        context = dataclasses.replace(context, facts={**context.facts, **facts})
    return dataclasses.replace(model, context=context)


def _parse_season(season: str | Season) -> Season:
    if isinstance(season, Season):
        return season
    try:
        return Season(str(season).lower())
    except ValueError as exc:
        choices = ", ".join(x.value for x in Season)
        raise ModelFormatError(f"unknown season '{season}', expected one of {choices}") from exc


# Loading


def _section(document: Mapping[str, Any], name: str) -> list[Mapping[str, Any]]:
    entries = document.get(name, [])
    if entries is None:
        return []
    if not isinstance(entries, list):
        raise ModelFormatError(f"'{name}' must be an array")
    for entry in entries:
        if not isinstance(entry, Mapping):
            raise ModelFormatError(f"entries of '{name}' must be objects, found {entry!r}")
    return entries


def _require(entry: Mapping[str, Any], key: str, section: str) -> Any:
    if key not in entry:
        raise ModelFormatError(f"'{key}' not specified in {section} entry {dict(entry)!r}")
    return entry[key]


def _require_str(entry: Mapping[str, Any], key: str, section: str) -> str:
    value = _require(entry, key, section)
    if not isinstance(value, str) or not value:
        raise ModelFormatError(f"'{key}' in {section} entry {dict(entry)!r} must be a non-empty string")
    return value


def _require_number(entry: Mapping[str, Any], key: str, section: str) -> float:
    value = _require(entry, key, section)
    if isinstance(value, bool) or not isinstance(value, int | float):
        raise ModelFormatError(f"'{key}' in {section} entry {dict(entry)!r} must be a number")
    if not math.isfinite(value):
        raise ModelFormatError(f"'{key}' in {section} entry {dict(entry)!r} must be finite")
    return float(value)


def _str_list(entry: Mapping[str, Any], key: str, section: str) -> tuple[str, ...]:
    value = entry.get(key, [])
    if not isinstance(value, list) or not all(isinstance(x, str) for x in value):
        raise ModelFormatError(f"'{key}' in {section} entry {dict(entry)!r} must be an array of strings")
    return tuple(value)


def _check_unique(new_id, existing: Container, fact: str) -> None:
    if new_id in existing:
        raise DuplicateIdError(f"duplicate {fact} '{new_id}'", [{"fact": fact, "id": new_id}])


def _parse_valid_range(entry: Mapping[str, Any]) -> ValidRange:
    config = entry.get("validRange")
    if config is None:
        return UNBOUNDED
    if not isinstance(config, Mapping):
        raise ModelFormatError(f"'validRange' of actuator {entry.get('actuatorId')!r} must be an object")
    try:
        if "values" in config:
            values = config["values"]
            if not isinstance(values, list):
                raise ModelFormatError("'validRange.values' must be an array")
            return ValidRange(values=tuple(float(x) for x in values))
        low = config.get("min")
        high = config.get("max")
        return ValidRange(
            low=MIN_FLOAT if low is None else float(low),
            high=MAX_FLOAT if high is None else float(high),
        )
    except (TypeError, ValueError) as exc:
        raise ModelFormatError(f"invalid 'validRange' for actuator {entry.get('actuatorId')!r}: {exc}") from exc


def _parse_binary(entry: Mapping[str, Any]) -> BinarySetting | None:
    config = entry.get("binary")
    if config is None or config is False:
        return None
    if config is True:
        return BinarySetting()
    if not isinstance(config, Mapping):
        raise ModelFormatError(f"'binary' of actuator {entry.get('actuatorId')!r} must be true or an object")
    section = f"actuator {entry.get('actuatorId')!r} binary"
    return BinarySetting(
        on=_require_number(config, "on", section) if "on" in config else BINARY_ON,
        off=_require_number(config, "off", section) if "off" in config else BINARY_OFF,
    )


def _load_context(document: Mapping[str, Any]) -> Context:
    season: Season | None = None
    facts: dict[str, Scalar] = {}
    for entry in _section(document, "context"):
        name = _require_str(entry, "name", "context")
        value = _require(entry, "value", "context")
        if name == "season":
            if season is not None:
                raise DuplicateIdError("season declared more than once", [{"fact": "season"}])
            season = _parse_season(value)
            continue
        if not isinstance(value, str | int | float | bool):
            raise ModelFormatError(f"context fact '{name}' must be a scalar")
        _check_unique(name, facts, "context fact")
        facts[name] = value
    return Context(season=season, facts=facts)


def load_model(document: Mapping[str, Any], policy_names: set[str] | None = None) -> EnvironmentModel:
    """
    Build an EnvironmentModel from an environment description document.

    The document layout follows the facts of the model, e.g.

        {
            "propertyTypes": [{"typeId": "light"}],
            "sensors": [{"sensorId": "brightness", "typeId": "light"}],
            "sensorValues": [{"sensorId": "brightness", "value": 20}],
            "actuators": [{"actuatorId": "mainLight", "typeId": "light"}],
            "zones": [{"zoneId": "livingroom", "mediationPolicy": null}],
            ...
        }

    If `policy_names` is supplied then zones bound to a policy must name one of them.
    Goals are not part of the model, see `load_goals()`.
    """
    if not isinstance(document, Mapping):
        raise ModelFormatError("environment document must be a JSON object")

    unknown = set(document) - set(DOCUMENT_SECTIONS) - {"policies", "expected", "name", "description"}
    if unknown:
        logger.debug("Ignoring unknown document sections %s", sorted(unknown))

    property_types: dict[str, PropertyType] = {}
    for entry in _section(document, "propertyTypes"):
        type_id = _require_str(entry, "typeId", "propertyTypes")
        _check_unique(type_id, property_types, "propertyType")
        property_types[type_id] = PropertyType(type_id)

    def check_type(type_id: str, owner: str) -> None:
        if type_id not in property_types:
            raise DanglingReferenceError(
                f"{owner} refers to undeclared property type '{type_id}'", [{"fact": owner, "typeId": type_id}]
            )

    sensors: dict[str, Sensor] = {}
    for entry in _section(document, "sensors"):
        sensor_id = _require_str(entry, "sensorId", "sensors")
        _check_unique(sensor_id, sensors, "sensor")
        type_id = _require_str(entry, "typeId", "sensors")
        check_type(type_id, f"sensor '{sensor_id}'")
        sensors[sensor_id] = Sensor(sensor_id, type_id)

    seen_readings: set[str] = set()
    for entry in _section(document, "sensorValues"):
        sensor_id = _require_str(entry, "sensorId", "sensorValues")
        if sensor_id not in sensors:
            raise DanglingReferenceError(
                f"sensorValue refers to undeclared sensor '{sensor_id}'", [{"fact": "sensorValue", "id": sensor_id}]
            )
        _check_unique(sensor_id, seen_readings, "sensorValue")
        seen_readings.add(sensor_id)
        value = _require_number(entry, "value", "sensorValues")
        sensors[sensor_id] = dataclasses.replace(sensors[sensor_id], last_value=value)

    actuators: dict[str, Actuator] = {}
    for entry in _section(document, "actuators"):
        actuator_id = _require_str(entry, "actuatorId", "actuators")
        _check_unique(actuator_id, actuators, "actuator")
        type_id = _require_str(entry, "typeId", "actuators")
        check_type(type_id, f"actuator '{actuator_id}'")
        actuators[actuator_id] = Actuator(actuator_id, type_id, _parse_valid_range(entry), _parse_binary(entry))

    zones: dict[str, Zone] = {}
    for entry in _section(document, "zones"):
        zone_id = _require_str(entry, "zoneId", "zones")
        _check_unique(zone_id, zones, "zone")
        policy = entry.get("mediationPolicy")
        if policy is not None and not isinstance(policy, str):
            raise ModelFormatError(f"'mediationPolicy' of zone '{zone_id}' must be a string or null")
        if policy and policy_names is not None and policy not in policy_names:
            raise DanglingReferenceError(
                f"zone '{zone_id}' is bound to unregistered mediation policy '{policy}'",
                [{"fact": "zone", "id": zone_id, "mediationPolicy": policy}],
            )
        zones[zone_id] = Zone(zone_id, policy or None)

    instances: dict[tuple[str, str], PropertyInstance] = {}
    for entry in _section(document, "propertyInstances"):
        zone_id = _require_str(entry, "zoneId", "propertyInstances")
        instance_id = _require_str(entry, "instanceId", "propertyInstances")
        fact = f"propertyInstance({zone_id}, {instance_id})"
        if zone_id not in zones:
            raise DanglingReferenceError(f"{fact} refers to undeclared zone", [{"fact": fact, "zoneId": zone_id}])
        _check_unique((zone_id, instance_id), instances, "propertyInstance")
        type_id = _require_str(entry, "typeId", "propertyInstances")
        check_type(type_id, fact)

        instance = PropertyInstance(
            zone=zone_id,
            id=instance_id,
            property_type=type_id,
            actuators=_str_list(entry, "actuators", "propertyInstances"),
            sensors=_str_list(entry, "sensors", "propertyInstances"),
        )
        _check_instance_members(instance, actuators, sensors)
        instances[instance.key] = instance

    users: dict[str, User] = {}
    for entry in _section(document, "users"):
        user_id = _require_str(entry, "userId", "users")
        _check_unique(user_id, users, "user")
        allowed = _str_list(entry, "allowedZones", "users")
        for zone_id in allowed:
            if zone_id not in zones:
                raise DanglingReferenceError(
                    f"user '{user_id}' is allowed undeclared zone '{zone_id}'", [{"fact": "user", "id": user_id}]
                )
        users[user_id] = User(user_id, frozenset(allowed))

    model = EnvironmentModel(
        property_types=property_types,
        sensors=sensors,
        actuators=actuators,
        zones=zones,
        instances=instances,
        users=users,
        context=_load_context(document),
    )
    logger.debug(
        "Loaded model with %i zones, %i property instances, %i users", len(zones), len(instances), len(users)
    )
    return model


def _check_instance_members(
    instance: PropertyInstance, actuators: Mapping[str, Actuator], sensors: Mapping[str, Sensor]
) -> None:
    """All actuators and sensors of a property instance must exist and share its property type"""
    fact = f"propertyInstance({instance.zone}, {instance.id})"
    for kind, ids, known in (("actuator", instance.actuators, actuators), ("sensor", instance.sensors, sensors)):
        for member_id in ids:
            member = known.get(member_id)
            if member is None:
                raise DanglingReferenceError(
                    f"{fact} lists undeclared {kind} '{member_id}'", [{"fact": fact, kind: member_id}]
                )
            if member.property_type != instance.property_type:
                raise PropertyTypeMismatchError(
                    f"{fact} has type '{instance.property_type}' but {kind} '{member_id}' "
                    f"has type '{member.property_type}'",
                    [{"fact": fact, kind: member_id, "expected": instance.property_type}],
                )


def load_goals(document: Mapping[str, Any], store: GoalStore | None = None) -> GoalStore:
    """Read the goals of a document into a GoalStore. Goals are not checked against the model."""
    store = store if store is not None else GoalStore()
    for entry in _section(document, "goals"):
        goal = parse_goal(entry)
        store = set_goal(store, goal)
    return store


def parse_goal(entry: Mapping[str, Any]) -> Goal:
    return Goal(
        user=_require_str(entry, "userId", "goals"),
        zone=_require_str(entry, "zoneId", "goals"),
        instance=_require_str(entry, "instanceId", "goals"),
        value=_require_number(entry, "value", "goals"),
    )


def dump_model(model: EnvironmentModel, goals: GoalStore | None = None) -> dict[str, Any]:
    """Inverse of `load_model()` and `load_goals()`"""
    actuators = []
    for actuator in model.actuators.values():
        as_dict: dict[str, Any] = {"actuatorId": actuator.id, "typeId": actuator.property_type}
        if actuator.valid_range.bounded:
            as_dict["validRange"] = actuator.valid_range.to_dict()
        if actuator.binary is not None:
            as_dict["binary"] = {"on": json_number(actuator.binary.on), "off": json_number(actuator.binary.off)}
        actuators.append(as_dict)

    context: list[dict[str, Any]] = []
    if model.context.season is not None:
        context.append({"name": "season", "value": model.context.season.value})
    context.extend({"name": name, "value": value} for name, value in model.context.facts.items())

    return {
        "propertyTypes": [{"typeId": x.id} for x in model.property_types.values()],
        "sensors": [{"sensorId": x.id, "typeId": x.property_type} for x in model.sensors.values()],
        "sensorValues": [
            {"sensorId": x.id, "value": json_number(x.last_value)}
            for x in model.sensors.values()
            if x.last_value is not None
        ],
        "actuators": actuators,
        "zones": [{"zoneId": x.id, "mediationPolicy": x.mediation_policy} for x in model.zones.values()],
        "propertyInstances": [
            {
                "zoneId": x.zone,
                "instanceId": x.id,
                "typeId": x.property_type,
                "actuators": list(x.actuators),
                "sensors": list(x.sensors),
            }
            for x in model.instances.values()
        ],
        "users": [{"userId": x.id, "allowedZones": sorted(x.allowed_zones)} for x in model.users.values()],
        "goals": [
            {"userId": x.user, "zoneId": x.zone, "instanceId": x.instance, "value": json_number(x.value)}
            for x in (goals or GoalStore())
        ],
        "context": context,
    }
