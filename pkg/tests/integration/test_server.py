import socket
from pathlib import Path

import pytest
import requests

from goalarbiter.config_reader import ServiceConfig
from goalarbiter.errors import BindError
from goalarbiter.server import ApiSession, Server

scenario_dir = Path(__file__).parents[2] / "scenarios"


@pytest.fixture
def server():
    session = ApiSession.from_config(ServiceConfig(preload_scenario=scenario_dir / "smart_home.json"))
    server = Server(session, port=0)
    server.start()
    yield server
    server.stop()


def test_health(server):
    assert server.running
    assert server.port != 0

    response = requests.get(f"{server.url}/health", timeout=2)

    assert response.status_code == 200
    assert response.json() == {"status": "ok", "revision": 1}


def test_react_over_http(server):
    response = requests.post(f"{server.url}/react", timeout=2)
    assert response.json()["actions"][0] == {"actuator": "ac", "value": 23}

    response = requests.post(f"{server.url}/sensors/ghost", json={"value": 1}, timeout=2)
    assert response.status_code == 404
    assert response.json()["code"] == "unknown-sensor"


def test_stop():
    server = Server(port=0)
    server.start()
    url = server.url
    server.stop()

    assert not server.running
    with pytest.raises(requests.ConnectionError):
        requests.get(f"{url}/health", timeout=1)


def test_port_in_use():
    with socket.create_server(("127.0.0.1", 0)) as taken:
        port = taken.getsockname()[1]

        with pytest.raises(BindError) as exc:
            Server(port=port).start()

    assert exc.value.code == "port-in-use"
    assert exc.value.details == [{"host": "127.0.0.1", "port": port}]
