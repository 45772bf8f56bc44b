"""Read the service configuration from a YAML file and scenarios from JSON files"""

from __future__ import annotations

import json
import logging
import os
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import yaml

from goalarbiter.definitions import PolicyKind
from goalarbiter.dsl import rule_from_file
from goalarbiter.errors import ConfigError, ScenarioError
from goalarbiter.knowledge_base import Snapshot
from goalarbiter.model import load_goals, load_model
from goalarbiter.pipeline import ReactionResult, validate_actions, validate_mediation
from goalarbiter.registry import PolicyRegistry
from goalarbiter.rules import Action, MediatedRequest

logger = logging.getLogger(__name__)

DEFAULT_HOST = "127.0.0.1"
DEFAULT_PORT = 8080
DEFAULT_LOG_LEVEL = "INFO"
DEFAULT_WEBHOOK_TIMEOUT = 2.0

# Environment variables taking precedence over the configuration file
ENV_OVERRIDES = {
    "GOALARBITER_HOST": "host",
    "GOALARBITER_PORT": "port",
    "GOALARBITER_LOG_LEVEL": "log_level",
    "GOALARBITER_PRELOAD_SCENARIO": "preload_scenario",
}

LOG_LEVELS = ("CRITICAL", "ERROR", "WARNING", "INFO", "DEBUG")


@dataclass
class ServiceConfig:
    host: str = DEFAULT_HOST
    port: int = DEFAULT_PORT
    log_level: str = DEFAULT_LOG_LEVEL
    preload_scenario: Path | None = None
    webhooks: dict[str, str] = field(default_factory=dict)  #: actuator id -> URL actions are POSTed to
    webhook_timeout: float = DEFAULT_WEBHOOK_TIMEOUT


def parse_config_file(filename: str | Path, environ: Mapping[str, str] | None = None) -> ServiceConfig:
    """Parse a yaml file and return the ServiceConfig it describes"""
    try:
        with open(filename, encoding="utf8") as f:
            config = yaml.load(f, yaml.SafeLoader)
    except OSError as exc:
        raise ConfigError(f"cannot read configuration file {filename}: {exc.strerror}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"configuration file {filename} is not valid YAML: {exc}") from exc

    return parse_config(config, environ)


def parse_config_string(yaml_str: str, environ: Mapping[str, str] | None = None) -> ServiceConfig:
    """Parse a yaml string and return the ServiceConfig it describes"""
    try:
        config = yaml.load(yaml_str, yaml.SafeLoader)
    except yaml.YAMLError as exc:
        raise ConfigError(f"configuration is not valid YAML: {exc}") from exc

    return parse_config(config, environ)


def parse_config(yaml_obj: Mapping[str, Any] | None, environ: Mapping[str, str] | None = None) -> ServiceConfig:
    """
    Parse a dictionary that has been filled using yaml.load(), e.g.

        host: 0.0.0.0
        port: 8080
        log_level: DEBUG
        preload_scenario: scenarios/smart_home.json
        webhooks:
          ac: http://localhost:9000/ac

    Environment variables, os.environ unless `environ` is given, override the file.
    """
    if yaml_obj is None:
        yaml_obj = {}
    if not isinstance(yaml_obj, Mapping):
        raise ConfigError("configuration must be a mapping of settings")

    logger.debug("Processing yaml: \n%r", yaml_obj)

    settings = dict(yaml_obj)
    environ = os.environ if environ is None else environ
    for variable, key in ENV_OVERRIDES.items():
        if variable in environ:
            logger.debug("Setting %s from %s", key, variable)
            settings[key] = environ[variable]

    unknown = set(settings) - {"host", "port", "log_level", "preload_scenario", "webhooks", "webhook_timeout"}
    if unknown:
        logger.warning("Ignoring unknown configuration settings %s", sorted(unknown))

    config = ServiceConfig()

    host = settings.get("host", DEFAULT_HOST)
    if not isinstance(host, str) or not host:
        raise ConfigError(f"'host' must be a non-empty string, not {host!r}", [{"key": "host"}])
    config.host = host

    config.port = _parse_port(settings.get("port", DEFAULT_PORT))

    log_level = str(settings.get("log_level", DEFAULT_LOG_LEVEL)).upper()
    if log_level not in LOG_LEVELS:
        raise ConfigError(f"'log_level' must be one of {', '.join(LOG_LEVELS)}", [{"key": "log_level"}])
    config.log_level = log_level

    preload = settings.get("preload_scenario")
    config.preload_scenario = Path(preload) if preload else None

    webhooks = _optional(settings, "webhooks", {})
    if not isinstance(webhooks, Mapping) or not all(
        isinstance(k, str) and isinstance(v, str) for k, v in webhooks.items()
    ):
        raise ConfigError("'webhooks' must map actuator ids to URLs", [{"key": "webhooks"}])
    config.webhooks = dict(webhooks)

    timeout = settings.get("webhook_timeout", DEFAULT_WEBHOOK_TIMEOUT)
    try:
        config.webhook_timeout = float(timeout)
    except (TypeError, ValueError):
        raise ConfigError(
            f"'webhook_timeout' must be a number, not {timeout!r}", [{"key": "webhook_timeout"}]
        ) from None
    if config.webhook_timeout <= 0:
        raise ConfigError("'webhook_timeout' must be positive", [{"key": "webhook_timeout"}])

    return config


def _optional(section: Mapping[str, Any], key: str, default: Any) -> Any:
    """A missing key or an explicit null means the default; any other value is returned for type checking"""
    value = section.get(key)
    return default if value is None else value


def _parse_port(port: Any) -> int:
    try:
        if isinstance(port, bool):
            raise ValueError
        port = int(port)
    except (TypeError, ValueError):
        raise ConfigError(f"'port' must be an integer, not {port!r}", [{"key": "port"}]) from None
    if not 1 <= port <= 65535:
        raise ConfigError(f"'port' {port} is outside 1..65535", [{"key": "port"}])
    return port


# Scenarios


@dataclass
class Scenario:
    """
    Everything needed to reproduce a reaction: the environment document with its
    goals, the policies to register and, optionally, the expected result.
    """

    name: str
    document: dict[str, Any]
    registry: PolicyRegistry
    expected: ReactionResult | None = None
    path: Path | None = None

    def snapshot(self) -> Snapshot:
        model = load_model(self.document, self.registry.names(PolicyKind.MEDIATION))
        return Snapshot(model, load_goals(self.document))


def read_json(path: str | Path) -> Any:
    """Read a JSON document, reporting where it is malformed"""
    try:
        with open(path, encoding="utf8") as f:
            return json.load(f)
    except OSError as exc:
        raise ScenarioError(f"cannot read {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise ScenarioError(
            f"{path} is not valid JSON: {exc.msg} at line {exc.lineno}, column {exc.colno}",
            [{"line": exc.lineno, "column": exc.colno}],
        ) from exc


def load_scenario(path: str | Path, extra_policies: Iterable[str | Path] = ()) -> Scenario:
    """Read a scenario file. Policy sources are found relative to the scenario."""
    path = Path(path)
    document = read_json(path)
    return parse_scenario(document, path.parent, extra_policies, name=path.stem, path=path)


def parse_scenario(
    document: Any,
    base_dir: Path = Path("."),
    extra_policies: Iterable[str | Path] = (),
    name: str | None = None,
    path: Path | None = None,
) -> Scenario:
    """
    Build a Scenario from a parsed document. On top of the environment sections a
    scenario may hold

        "policies": {
            "sources": ["../policies/east.policy"],
            "defaultMediation": "average",
            "actuation": "split_equal_max",
            "requestValidation": {"livingroom": "comfort_range"}
        },
        "expected": {"mediated": [...], "actions": [...]}
    """
    if not isinstance(document, Mapping):
        raise ScenarioError("a scenario must be a JSON object")

    policies = _optional(document, "policies", {})
    if not isinstance(policies, Mapping):
        raise ScenarioError("'policies' must be an object")

    registry = PolicyRegistry()
    sources = _optional(policies, "sources", [])
    if not isinstance(sources, list) or not all(isinstance(x, str) for x in sources):
        raise ScenarioError("'policies.sources' must be an array of paths")
    for source in [*(base_dir / x for x in sources), *(Path(x) for x in extra_policies)]:
        try:
            registry.register(rule_from_file(source))
        except OSError as exc:
            raise ScenarioError(f"cannot read policy {source}: {exc.strerror}") from exc

    for key, attribute in (("defaultMediation", "default_mediation"), ("actuation", "default_actuation")):
        name = _optional(policies, key, None)
        if name is None:
            continue
        if not isinstance(name, str) or not name:
            raise ScenarioError(f"'policies.{key}' must be a policy name")
        setattr(registry, attribute, name)

    bindings = _optional(policies, "requestValidation", {})
    if not isinstance(bindings, Mapping):
        raise ScenarioError("'policies.requestValidation' must map zones to policy names")
    for zone_id, policy_name in bindings.items():
        registry.bind_validation(zone_id, policy_name)

    scenario = Scenario(
        name=name or str(document.get("name", "scenario")),
        document=dict(document),
        registry=registry,
        path=path,
    )

    if "expected" in document:
        scenario.expected = parse_expected(document["expected"])
        _check_expected(scenario)

    logger.debug("Loaded scenario %s with %i registered policies", scenario.name, len(registry))
    return scenario


def parse_expected(expected: Any) -> ReactionResult:
    if not isinstance(expected, Mapping):
        raise ScenarioError("'expected' must be an object")
    try:
        mediated = tuple(
            MediatedRequest(str(x["zone"]), str(x["instance"]), float(x["value"]))
            for x in expected.get("mediated", [])
        )
        actions = tuple(Action(str(x["actuator"]), float(x["value"])) for x in expected.get("actions", []))
    except (KeyError, TypeError, ValueError) as exc:
        raise ScenarioError(f"malformed expected result: {exc!r}") from exc
    return ReactionResult(mediated=mediated, actions=actions)


def _check_expected(scenario: Scenario) -> None:
    """The expected result must itself pass both validators"""
    assert scenario.expected is not None
    snapshot = scenario.snapshot()
    reports = (
        validate_mediation(scenario.expected.mediated, snapshot, scenario.registry),
        validate_actions(scenario.expected.actions, snapshot),
    )
    for report in reports:
        if not report:
            raise ScenarioError("expected result of the scenario fails validation", list(report.violations))
