import json
from pathlib import Path

import pytest
from fastapi.testclient import TestClient

from goalarbiter.config_reader import ServiceConfig
from goalarbiter.server import ApiSession, create_app

root_dir = Path(__file__).parents[2]
scenario_dir = root_dir / "scenarios"
policy_dir = root_dir / "policies"


def read_document(name: str) -> dict:
    with open(scenario_dir / f"{name}.json", encoding="utf8") as f:
        return json.load(f)


@pytest.fixture
def home_document():
    return read_document("smart_home")


@pytest.fixture
def building_document():
    return read_document("smart_building")


@pytest.fixture
def client():
    """A service with an empty knowledge base"""
    with TestClient(create_app()) as test_client:
        yield test_client


def preloaded_client(name: str):
    session = ApiSession.from_config(ServiceConfig(preload_scenario=scenario_dir / f"{name}.json"))
    return TestClient(create_app(session))


@pytest.fixture
def home_client():
    """A service preloaded with the smart home scenario and its policies"""
    with preloaded_client("smart_home") as test_client:
        yield test_client


@pytest.fixture
def building_client():
    with preloaded_client("smart_building") as test_client:
        yield test_client
