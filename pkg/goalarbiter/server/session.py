"""
ApiSession ties the knowledge base of a service process to reactions and,
optionally, to the webhook dispatcher.
"""

from __future__ import annotations

import logging
from typing import Any

from goalarbiter.config_reader import ServiceConfig, load_scenario
from goalarbiter.definitions import PolicyKind
from goalarbiter.dsl import rule_from_source
from goalarbiter.errors import PolicySyntaxError
from goalarbiter.knowledge_base import KnowledgeBase
from goalarbiter.pipeline import react

from .dispatch import WebhookDispatcher

logger = logging.getLogger(__name__)


class ApiSession:
    """The single tenant of a service process"""

    def __init__(self, knowledge_base: KnowledgeBase | None = None, dispatcher: WebhookDispatcher | None = None):
        self.knowledge_base = knowledge_base if knowledge_base is not None else KnowledgeBase()
        self.dispatcher = dispatcher

    @classmethod
    def from_config(cls, config: ServiceConfig) -> ApiSession:
        """Create a session, loading the preload scenario of the configuration if there is one"""
        dispatcher = WebhookDispatcher(config.webhooks, config.webhook_timeout) if config.webhooks else None
        if config.preload_scenario is None:
            return cls(dispatcher=dispatcher)

        scenario = load_scenario(config.preload_scenario)
        knowledge_base = KnowledgeBase(scenario.registry)
        knowledge_base.replace_model(scenario.document)
        logger.info("Preloaded scenario %s", scenario.name)
        return cls(knowledge_base, dispatcher)

    @property
    def revision(self) -> int:
        return self.knowledge_base.revision

    def upload_policy(self, kind: PolicyKind, name: str, source: str) -> int:
        """Register a policy program under the kind and name it declares"""
        rule = rule_from_source(source)
        if rule.kind is not kind or rule.name != name:
            raise PolicySyntaxError(
                f"source declares {rule.kind.value} policy '{rule.name}', not {kind.value} policy '{name}'",
                rule.program.line,
                rule.program.column,
            )
        return self.knowledge_base.register_policy(rule)

    def react(self, dispatch: bool = False) -> dict[str, Any]:
        """Run a reaction on a snapshot of the knowledge base; the store is not changed"""
        snapshot, registry = self.knowledge_base.capture()
        result = react(snapshot, registry)

        body = {"revision": snapshot.revision, **result.to_dict()}
        if dispatch:
            if self.dispatcher is None:
                logger.warning("Dispatch requested but no webhooks are configured")
                body["dispatch"] = []
            else:
                body["dispatch"] = self.dispatcher.dispatch(result.actions, snapshot.revision)
        return body
