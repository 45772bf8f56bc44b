"""
Integration tests of the REST interface, driven through the FastAPI test client
"""

from pathlib import Path
from unittest.mock import MagicMock

import pytest
import requests
from fastapi.testclient import TestClient

from goalarbiter.config_reader import ServiceConfig
from goalarbiter.server import ApiSession, WebhookDispatcher, create_app

scenario_dir = Path(__file__).parents[2] / "scenarios"

BRIGHTEST = "mediation brightest\nmax(requests)\n"


def put_policy(client, kind, name, source):
    return client.put(f"/policies/{kind}/{name}", content=source, headers={"content-type": "text/plain"})


def assert_error(response, status, code):
    assert response.status_code == status, response.text
    body = response.json()
    assert body["code"] == code
    assert set(body) == {"code", "message", "details"}
    return body


def test_health(client):
    response = client.get("/health")
    assert response.status_code == 200
    assert response.json() == {"status": "ok", "revision": 0}


@pytest.mark.parametrize(
    "method, path, body",
    [
        ("post", "/react", None),
        ("get", "/model", None),
        ("post", "/goals", {"user": "alice", "zone": "livingroom", "instance": "roomTemp", "value": 21}),
        ("post", "/sensors/brightness", {"value": 20}),
        ("put", "/context", {"season": "winter"}),
    ],
)
def test_no_model(client, method, path, body):
    response = client.request(method, path, json=body)
    assert_error(response, 409, "no-model")


@pytest.mark.parametrize(
    "method, path, status, code",
    [
        ("get", "/nope", 404, "not-found"),
        ("delete", "/model", 405, "method-not-allowed"),
        ("get", "/react", 405, "method-not-allowed"),
    ],
)
def test_routing_errors(client, method, path, status, code):
    assert_error(client.request(method, path), status, code)


def test_unexpected_error():
    session = MagicMock(spec=ApiSession)
    session.react.side_effect = RuntimeError("boom")
    with TestClient(create_app(session), raise_server_exceptions=False) as test_client:
        body = assert_error(test_client.post("/react"), 500, "internal-error")
    assert body["message"] == "internal error: RuntimeError"


class TestReact:
    def test_home_golden(self, home_client):
        body = home_client.post("/react").json()

        assert body["revision"] == 1
        assert body["mediated"] == [
            {"zone": "livingroom", "instance": "movieLight", "value": 20},
            {"zone": "livingroom", "instance": "roomTemp", "value": 23},
            {"zone": "livingroom", "instance": "studyingLight", "value": 80},
        ]
        assert body["actions"] == [
            {"actuator": "ac", "value": 23},
            {"actuator": "cornerLight", "value": 40},
            {"actuator": "mainLight", "value": 40},
            {"actuator": "smallLight", "value": 10},
        ]
        assert len(body["requests"]) == 4
        assert "dispatch" not in body

    def test_building_golden(self, building_client, building_document):
        body = building_client.post("/react").json()
        expected = building_document["expected"]

        assert [(x["zone"], x["instance"]) for x in body["mediated"]] == [
            (x["zone"], x["instance"]) for x in expected["mediated"]
        ]
        assert [x["value"] for x in body["mediated"]] == pytest.approx([x["value"] for x in expected["mediated"]])
        assert [x["actuator"] for x in body["actions"]] == [x["actuator"] for x in expected["actions"]]
        assert [x["value"] for x in body["actions"]] == pytest.approx([x["value"] for x in expected["actions"]])

    def test_uploaded_model(self, client, home_document):
        assert client.put("/model", json=home_document).json() == {"revision": 1}

        body = client.post("/react").json()

        # No validation binding, so the defaults of an empty registry apply
        assert [x["value"] for x in body["mediated"]] == [20, 23, 80]

    def test_react_is_read_only(self, home_client):
        first = home_client.post("/react")
        second = home_client.post("/react")

        assert first.content == second.content
        assert home_client.get("/health").json()["revision"] == 1

    def test_revisions_increase(self, client, home_document):
        goal = {"user": "alice", "zone": "livingroom", "instance": "readingLight"}
        steps = [
            lambda: client.put("/model", json=home_document),
            lambda: client.post("/goals", json={**goal, "value": 60}),
            lambda: client.post("/sensors/brightness", json={"value": 35.5}),
            lambda: client.put("/context", json={"season": "winter", "facts": {"weather": "rainy"}}),
            lambda: put_policy(client, "mediation", "brightest", BRIGHTEST),
            lambda: client.put("/defaults", json={"mediation": "brightest"}),
            lambda: client.request("delete", "/goals", json=goal),
        ]

        revisions = []
        for step in steps:
            response = step()
            assert response.status_code == 200, response.text
            revisions.append(response.json()["revision"])
            assert client.post("/react").json()["revision"] == revisions[-1]

        assert revisions == sorted(set(revisions))
        assert revisions[0] == 1

    def test_goal_changes_reaction(self, home_client):
        home_client.post("/goals", json={"user": "bob", "zone": "livingroom", "instance": "readingLight", "value": 60})
        actions = {x["actuator"]: x["value"] for x in home_client.post("/react").json()["actions"]}
        assert actions["smallLight"] == 60

    def test_invalid_request_is_filtered(self, home_client):
        home_client.post("/goals", json={"user": "bob", "zone": "livingroom", "instance": "roomTemp", "value": 80})

        body = home_client.post("/react").json()

        assert {"zone": "livingroom", "instance": "roomTemp", "value": 80, "user": "bob"} in body["requests"]
        assert {"zone": "livingroom", "instance": "roomTemp", "value": 20} in body["mediated"]

    def test_actions_invalid(self, home_client):
        put_policy(home_client, "actuation", "blast", "actuation blast\nemit 500\ncombine max within [-inf, inf]")
        home_client.put("/defaults", json={"actuation": "blast"})

        body = assert_error(home_client.post("/react"), 422, "actions-invalid")
        assert {"reason": "out-of-range", "actuator": "ac"}.items() <= body["details"][0].items()

    def test_policy_evaluation_error(self, home_client):
        put_policy(home_client, "mediation", "broken", 'mediation broken\nfail "not today"')
        home_client.put("/defaults", json={"mediation": "broken"})

        body = assert_error(home_client.post("/react"), 422, "evaluation-error")
        assert "not today" in body["message"]


class TestModel:
    def test_get_model(self, home_client):
        body = home_client.get("/model").json()

        assert body["revision"] == 1
        assert len(body["model"]["goals"]) == 4
        assert {x["actuatorId"] for x in body["model"]["actuators"]} == {"ac", "cornerLight", "mainLight", "smallLight"}

    def test_malformed_json(self, client):
        response = client.put("/model", content=b'{\n  "zones": [\n', headers={"content-type": "application/json"})
        body = assert_error(response, 400, "model-format")
        assert body["details"][0]["line"] == 3

    def test_nan_in_model(self, client, home_document):
        content = '{"sensorValues": [{"sensorId": "x", "value": NaN}]}'
        response = client.put("/model", content=content, headers={"content-type": "application/json"})
        assert_error(response, 400, "model-format")

    def test_dangling_reference(self, client, home_document):
        home_document["propertyInstances"][0]["actuators"].append("ghost")
        assert_error(client.put("/model", json=home_document), 400, "dangling-reference")
        assert client.get("/health").json()["revision"] == 0

    def test_media_type(self, client, home_document):
        response = client.put("/model", content=b"{}", headers={"content-type": "text/plain"})
        assert_error(response, 415, "unsupported-media-type")

    def test_bad_binary_setting(self, client, home_document):
        home_document["actuators"][0]["binary"] = {"on": "hot"}
        body = assert_error(client.put("/model", json=home_document), 400, "model-format")
        assert "must be a number" in body["message"]


class TestUpdates:
    def test_unknown_sensor(self, home_client):
        assert_error(home_client.post("/sensors/humidity", json={"value": 40}), 404, "unknown-sensor")

    @pytest.mark.parametrize("content", ['{"value": NaN}', '{"value": Infinity}', '{"value": "warm"}', "{}"])
    def test_bad_sensor_value(self, home_client, content):
        response = home_client.post(
            "/sensors/brightness", content=content, headers={"content-type": "application/json"}
        )
        body = assert_error(response, 400, "invalid-body")
        assert body["details"]

    def test_incomplete_goal(self, home_client):
        assert_error(home_client.post("/goals", json={"user": "alice"}), 400, "invalid-body")

    def test_goal_of_unknown_user_is_ignored(self, home_client):
        goal = {"user": "mallory", "zone": "livingroom", "instance": "roomTemp", "value": 35}
        assert home_client.post("/goals", json=goal).status_code == 200

        body = home_client.post("/react").json()

        assert goal in body["requests"]
        assert {"zone": "livingroom", "instance": "roomTemp", "value": 23} in body["mediated"]

    def test_goal_media_type(self, home_client):
        response = home_client.post("/goals", content="user=alice", headers={"content-type": "text/plain"})
        assert_error(response, 415, "unsupported-media-type")

    def test_context(self, home_client):
        assert home_client.put("/context", json={"season": "summer", "facts": {"weather": "dull"}}).status_code == 200
        assert_error(home_client.put("/context", json={"season": "monsoon"}), 400, "model-format")
        assert_error(home_client.put("/context", json={"facts": {"season": "winter"}}), 400, "model-format")


class TestPolicies:
    def test_list(self, home_client):
        body = home_client.get("/policies").json()

        assert body["revision"] == 1
        assert body["defaults"] == {"mediation": "average", "actuation": "split_equal_max"}
        assert body["validationBindings"] == {"livingroom": "comfort_range"}
        assert ("validation", "comfort_range") in {(x["kind"], x["name"]) for x in body["policies"]}

    def test_upload_and_get(self, home_client):
        assert put_policy(home_client, "mediation", "brightest", BRIGHTEST).json() == {"revision": 2}

        response = home_client.get("/policies/mediation/brightest")
        assert response.json() == {"kind": "mediation", "name": "brightest", "source": BRIGHTEST}

    def test_builtin_has_no_source(self, home_client):
        assert home_client.get("/policies/mediation/east").json()["source"] is None

    def test_unknown(self, home_client):
        assert_error(home_client.get("/policies/mediation/nope"), 404, "unknown-policy")
        assert_error(home_client.get("/policies/planning/east"), 404, "unknown-policy")
        assert_error(home_client.put("/defaults", json={"actuation": "nope"}), 404, "unknown-policy")
        assert_error(home_client.put("/validation/livingroom", json={"policy": "nope"}), 404, "unknown-policy")

    def test_syntax_error(self, home_client):
        response = put_policy(home_client, "mediation", "m", "mediation m\nif sensed then 1")
        body = assert_error(response, 400, "syntax-error")
        assert body["details"][0]["line"] == 2

    def test_nesting_too_deep(self, home_client):
        response = put_policy(home_client, "mediation", "m", "mediation m\n" + "-" * 3000 + "candidate")
        body = assert_error(response, 400, "syntax-error")
        assert "nests too deeply" in body["message"]

    def test_name_must_match(self, home_client):
        assert_error(put_policy(home_client, "mediation", "other", BRIGHTEST), 400, "syntax-error")
        assert_error(put_policy(home_client, "validation", "brightest", BRIGHTEST), 400, "syntax-error")

    def test_upload_media_type(self, home_client):
        response = home_client.put("/policies/mediation/brightest", json={"source": BRIGHTEST})
        assert_error(response, 415, "unsupported-media-type")

    def test_bind_validation(self, home_client):
        put_policy(home_client, "validation", "cosy", "validation cosy\nvalue >= 21")
        assert home_client.put("/validation/livingroom", json={"policy": "cosy"}).json() == {"revision": 3}

        mediated = home_client.post("/react").json()["mediated"]

        # alice asked for 20, so only bob's 26 remains
        assert {"zone": "livingroom", "instance": "roomTemp", "value": 26} in mediated

    def test_defaults(self, home_client):
        put_policy(home_client, "mediation", "brightest", BRIGHTEST)
        home_client.put("/defaults", json={"mediation": "brightest"})

        mediated = home_client.post("/react").json()["mediated"]
        assert {"zone": "livingroom", "instance": "roomTemp", "value": 26} in mediated


class TestDispatch:
    def test_dispatch(self, home_document):
        http = MagicMock(spec=requests.Session)
        http.post.return_value = MagicMock(status_code=200, ok=True)
        session = ApiSession(dispatcher=WebhookDispatcher({"ac": "http://ac.local/set"}, session=http))
        session.knowledge_base.replace_model(home_document)

        with TestClient(create_app(session)) as client:
            body = client.post("/react", params={"dispatch": "true"}).json()

        assert body["dispatch"] == [{"actuator": "ac", "url": "http://ac.local/set", "status": 200, "ok": True}]
        http.post.assert_called_once_with(
            "http://ac.local/set", json={"actuator": "ac", "value": 23, "revision": 1}, timeout=2.0
        )

    def test_dispatch_without_webhooks(self, home_client):
        assert home_client.post("/react?dispatch=true").json()["dispatch"] == []


def test_from_config():
    session = ApiSession.from_config(
        ServiceConfig(preload_scenario=scenario_dir / "smart_home.json", webhooks={"ac": "http://ac.local"})
    )

    assert session.revision == 1
    assert session.dispatcher is not None
    assert session.react()["actions"][0] == {"actuator": "ac", "value": 23}

