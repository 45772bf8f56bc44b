"""
KnowledgeBase holds the environment model, the goals and the policy registry of a
running system and serialises changes to them.

Reactions never read the live store. They work on a Snapshot, an immutable view
captured under the lock, so a mutation arriving mid-reaction is not observed.
"""

from __future__ import annotations

import logging
import threading
from collections.abc import Mapping
from dataclasses import dataclass
from typing import Any

from goalarbiter import model
from goalarbiter.definitions import PolicyKind
from goalarbiter.errors import NoModelError
from goalarbiter.model import EnvironmentModel, Goal, GoalStore
from goalarbiter.registry import PolicyRegistry
from goalarbiter.rules import BaseRule

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Snapshot:
    """A consistent view of the knowledge base at one revision"""

    model: EnvironmentModel
    goals: GoalStore
    revision: int = 0


class KnowledgeBase:
    """
    The single logical store of a process. Every mutation takes the lock, replaces
    the immutable model or goal store and bumps the revision.
    """

    def __init__(self, registry: PolicyRegistry | None = None) -> None:
        self._lock = threading.Lock()
        self._model: EnvironmentModel | None = None
        self._goals = GoalStore()
        self._registry = registry if registry is not None else PolicyRegistry()
        self._revision = 0

    @property
    def revision(self) -> int:
        return self._revision

    @property
    def has_model(self) -> bool:
        return self._model is not None

    def _bump(self, reason: str) -> int:
        self._revision += 1
        logger.info("Revision %i: %s", self._revision, reason)
        return self._revision

    def _require_model(self) -> EnvironmentModel:
        if self._model is None:
            raise NoModelError("no environment model has been loaded")
        return self._model

    def replace_model(self, document: Mapping[str, Any]) -> int:
        """
        Load an environment document, replacing the model and the goals atomically.
        Nothing changes if the document is invalid.
        """
        with self._lock:
            new_model = model.load_model(document, self._registry.names(PolicyKind.MEDIATION))
            new_goals = model.load_goals(document)
            self._model, self._goals = new_model, new_goals
            return self._bump(f"model replaced, {len(new_model.instances)} property instances")

    def set_goal(self, goal: Goal) -> int:
        with self._lock:
            self._require_model()
            self._goals = model.set_goal(self._goals, goal)
            return self._bump(f"goal {goal.key} set to {goal.value}")

    def remove_goal(self, user: str, zone: str, instance: str) -> int:
        with self._lock:
            self._require_model()
            self._goals = model.remove_goal(self._goals, user, zone, instance)
            return self._bump(f"goal {(user, zone, instance)} removed")

    def update_sensor(self, sensor_id: str, value: float) -> int:
        with self._lock:
            self._model = model.update_sensor(self._require_model(), sensor_id, value)
            return self._bump(f"sensor {sensor_id} reading {value}")

    def set_context(self, season: str | None = None, **facts) -> int:
        with self._lock:
            self._model = model.set_context(self._require_model(), season, **facts)
            return self._bump("context updated")

    def register_policy(self, rule: BaseRule) -> int:
        with self._lock:
            self._registry.register(rule)
            return self._bump(f"{rule.kind.value} policy {rule.name} registered")

    def bind_validation(self, zone_id: str, name: str) -> int:
        with self._lock:
            self._registry.bind_validation(zone_id, name)
            return self._bump(f"validation policy {name} bound to zone {zone_id}")

    def set_defaults(self, mediation: str | None = None, actuation: str | None = None) -> int:
        with self._lock:
            # Check both before changing either
            if mediation is not None:
                self._registry.require(PolicyKind.MEDIATION, mediation)
            if actuation is not None:
                self._registry.require(PolicyKind.ACTUATION, actuation)
            if mediation is not None:
                self._registry.default_mediation = mediation
            if actuation is not None:
                self._registry.default_actuation = actuation
            return self._bump("policy defaults changed")

    def capture(self) -> tuple[Snapshot, PolicyRegistry]:
        """The current snapshot and a private copy of the registry, taken together"""
        with self._lock:
            snapshot = Snapshot(self._require_model(), self._goals, self._revision)
            return snapshot, self._registry.copy()

    def registry_view(self) -> tuple[PolicyRegistry, int]:
        with self._lock:
            return self._registry.copy(), self._revision

    def dump(self) -> tuple[dict[str, Any], int]:
        """The environment document of the current model and goals"""
        with self._lock:
            return model.dump_model(self._require_model(), self._goals), self._revision
