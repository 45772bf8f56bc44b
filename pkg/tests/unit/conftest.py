import json
from pathlib import Path

import pytest

from goalarbiter.config_reader import load_scenario
from goalarbiter.knowledge_base import Snapshot
from goalarbiter.model import load_goals, load_model
from goalarbiter.registry import PolicyRegistry

root_dir = Path(__file__).parents[2]
scenario_dir = root_dir / "scenarios"
policy_dir = root_dir / "policies"


@pytest.fixture
def home_document():
    with open(scenario_dir / "smart_home.json", encoding="utf8") as f:
        return json.load(f)


@pytest.fixture
def building_document():
    with open(scenario_dir / "smart_building.json", encoding="utf8") as f:
        return json.load(f)


@pytest.fixture
def home_scenario():
    return load_scenario(scenario_dir / "smart_home.json")


@pytest.fixture
def building_scenario():
    return load_scenario(scenario_dir / "smart_building.json")


@pytest.fixture
def small_document():
    """One zone, two lamps shared by two property instances, a heater and an A/C unit"""
    return {
        "propertyTypes": [{"typeId": "light"}, {"typeId": "temp"}],
        "sensors": [{"sensorId": "lux", "typeId": "light"}, {"sensorId": "thermo", "typeId": "temp"}],
        "sensorValues": [{"sensorId": "lux", "value": 50}],
        "actuators": [
            {"actuatorId": "lamp1", "typeId": "light", "validRange": {"min": 0, "max": 100}},
            {"actuatorId": "lamp2", "typeId": "light", "validRange": {"min": 0, "max": 100}},
            {"actuatorId": "ac", "typeId": "temp"},
            {"actuatorId": "heater", "typeId": "temp", "validRange": {"values": [0, 100]}, "binary": True},
        ],
        "zones": [{"zoneId": "office", "mediationPolicy": None}],
        "propertyInstances": [
            {
                "zoneId": "office",
                "instanceId": "desk",
                "typeId": "light",
                "actuators": ["lamp1", "lamp2"],
                "sensors": ["lux"],
            },
            {"zoneId": "office", "instanceId": "ambient", "typeId": "light", "actuators": ["lamp2"], "sensors": []},
            {
                "zoneId": "office",
                "instanceId": "climate",
                "typeId": "temp",
                "actuators": ["ac", "heater"],
                "sensors": ["thermo"],
            },
        ],
        "users": [{"userId": "ann", "allowedZones": ["office"]}, {"userId": "guest", "allowedZones": []}],
        "goals": [],
        "context": [{"name": "season", "value": "summer"}],
    }


@pytest.fixture
def registry():
    return PolicyRegistry()


@pytest.fixture
def small_snapshot(small_document):
    return Snapshot(load_model(small_document), load_goals(small_document))
